#include "lorag/serialize.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

namespace lorag {

ojson to_json(const GenerationResult& result) {
    ojson steps = ojson::array();
    for (const auto& s : result.steps) {
        ojson step;
        step["token"] = s.token;
        step["logprob"] = s.logprob ? ojson(*s.logprob) : ojson(nullptr);
        steps.push_back(std::move(step));
    }
    ojson j;
    j["text"] = result.text;
    j["steps"] = std::move(steps);
    return j;
}

GenerationResult generation_from_json(const ojson& j) {
    std::vector<GenerationStep> steps;
    for (const auto& s : j.at("steps")) {
        GenerationStep step{s.at("token").get<std::string>(), std::nullopt};
        if (!s.at("logprob").is_null()) step.logprob = s.at("logprob").get<double>();
        steps.push_back(std::move(step));
    }
    return GenerationResult::from_steps(std::move(steps));
}

ojson to_json(const RetrievedContext& context) {
    ojson out = ojson::array();
    for (const auto& p : context.passages) {
        ojson entry;
        entry["doc_id"] = p.doc_id;
        entry["score"] = p.score;
        ojson idx = ojson::array();
        for (const auto& s : p.sentences) idx.push_back(s.index);
        entry["sentence_indexes"] = std::move(idx);
        out.push_back(std::move(entry));
    }
    return out;
}

ojson to_json(const LoopTranscript& transcript) {
    ojson j;
    j["query"] = transcript.query.text;
    j["initial"] = to_json(transcript.initial);
    j["initial_context"] = to_json(transcript.initial_context);
    ojson iterations = ojson::array();
    for (const auto& rec : transcript.iterations) {
        ojson r;
        r["t"] = rec.t;
        r["output"] = to_json(rec.output);
        r["context"] = to_json(rec.context);
        r["distance"] = rec.distance_from_prev;
        iterations.push_back(std::move(r));
    }
    j["iterations"] = std::move(iterations);
    j["stop_reason"] = to_string(transcript.stop_reason);
    j["final"] = to_json(transcript.final);
    return j;
}

ojson to_json(const MetricsReport& report) {
    ojson j;
    j["bleu"] = report.bleu;
    j["rouge1_f"] = report.rouge1_f;
    j["rouge2_f"] = report.rouge2_f;
    j["rougeL_f"] = report.rougeL_f;
    j["perplexity"] = report.perplexity ? ojson(*report.perplexity) : ojson(nullptr);
    j["n_pairs"] = report.n_pairs;
    j["excluded_from_ppl"] = report.excluded_from_ppl;
    return j;
}

std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(len * 2);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

}  // namespace lorag
