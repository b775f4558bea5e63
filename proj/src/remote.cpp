#include <httplib.h>

#include <json.hpp>

#include "lorag/generator.hpp"

namespace lorag {

using json = nlohmann::ordered_json;

std::string render_initial_prompt(const Query& x) {
    return "Question:\n" + x.text + "\n\nAnswer the question.";
}

std::string render_refine_prompt(const Query& x, const GenerationResult& y_prev, const RetrievedContext& context) {
    std::string prompt = "Question:\n" + x.text + "\n\nPrevious answer:\n" + y_prev.text + "\n\nRetrieved passages:\n";
    std::size_t i = 0;
    for (const auto& passage : context.passages) {
        for (const auto& s : passage.sentences) prompt += "[" + std::to_string(++i) + "] " + s.text + "\n";
    }
    prompt += "\nRewrite the answer using only information supported by the passages.";
    return prompt;
}

std::string remote_request_body(const std::string& prompt, const GeneratorConfig& cfg) {
    json body;
    body["prompt"] = prompt;
    body["max_tokens"] = cfg.max_tokens;
    body["temperature"] = cfg.temperature;
    return body.dump();
}

GenerationResult parse_remote_response(const std::string& body, const std::string& endpoint) {
    using Kind = GenerationError::Kind;
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw GenerationError(Kind::kMalformed, endpoint, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("tokens") || !doc["tokens"].is_array()) {
        throw GenerationError(Kind::kMalformed, endpoint, "expected an object with a \"tokens\" array");
    }

    std::vector<GenerationStep> steps;
    bool all_logprobs = true;
    for (const json& tok : doc["tokens"]) {
        if (!tok.is_object() || !tok.contains("text") || !tok["text"].is_string()) {
            throw GenerationError(Kind::kMalformed, endpoint, "token entry without string \"text\"");
        }
        GenerationStep step{tok["text"].get<std::string>(), std::nullopt};
        auto lp = tok.find("logprob");
        if (lp == tok.end() || lp->is_null()) {
            all_logprobs = false;
        } else if (lp->is_number()) {
            const double v = lp->get<double>();
            if (!(v <= 0.0)) throw GenerationError(Kind::kMalformed, endpoint, "logprob must be <= 0");
            step.logprob = v;
        } else {
            throw GenerationError(Kind::kMalformed, endpoint, "logprob must be a number or null");
        }
        steps.push_back(std::move(step));
    }
    // A single missing logprob means the backend cannot score the sequence.
    if (!all_logprobs) {
        for (auto& s : steps) s.logprob.reset();
    }
    return GenerationResult::from_steps(std::move(steps));
}

RemoteGenerator::RemoteGenerator(GeneratorConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw GenerationError(GenerationError::Kind::kTransport, url, "endpoint URL must start with http:// or https://");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

GenerationResult RemoteGenerator::complete(const std::string& prompt) const {
    using Kind = GenerationError::Kind;
    const std::string& url = cfg_.endpoint_url;
    const Endpoint ep = split_url(url);

    // One client per call keeps concurrent requests independent.
    httplib::Client client(ep.origin);
    if (!client.is_valid()) throw GenerationError(Kind::kTransport, url, "unsupported endpoint URL");
    client.set_connection_timeout(10);
    client.set_read_timeout(300);

    auto res = client.Post(ep.path, remote_request_body(prompt, cfg_), "application/json");
    if (!res) throw GenerationError(Kind::kTransport, url, httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
        throw GenerationError(Kind::kStatus, url, "HTTP " + std::to_string(res->status));
    }
    return parse_remote_response(res->body, url);
}

GenerationResult RemoteGenerator::generate_initial(const Query& x, std::uint64_t) const {
    return complete(render_initial_prompt(x));
}

GenerationResult RemoteGenerator::refine(const Query& x, const GenerationResult& y_prev,
                                         const RetrievedContext& context, std::uint64_t) const {
    return complete(render_refine_prompt(x, y_prev, context));
}

}  // namespace lorag
