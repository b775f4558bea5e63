#include "lorag/generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace lorag {

std::string to_string(Backend backend) {
    switch (backend) {
        case Backend::kStub: return "stub";
        case Backend::kRemote: return "remote";
        case Backend::kToyPolicy: return "toy-policy";
    }
    return "unknown";
}

Backend backend_from_string(const std::string& name) {
    if (name == "stub") return Backend::kStub;
    if (name == "remote") return Backend::kRemote;
    if (name == "toy-policy") return Backend::kToyPolicy;
    throw ConfigError("unknown generator backend '" + name + "' (expected stub, remote or toy-policy)");
}

void GeneratorConfig::validate() const {
    if (max_tokens < 1) throw ConfigError("generator.max_tokens must be at least 1");
    switch (backend) {
        case Backend::kStub:
            if (top_sentences < 1) throw ConfigError("generator.top_sentences must be at least 1");
            break;
        case Backend::kRemote:
            if (endpoint_url.empty()) throw ConfigError("remote backend requires generator.endpoint_url");
            [[fallthrough]];
        case Backend::kToyPolicy:
            if (!(temperature > 0.0) || !std::isfinite(temperature)) {
                throw ConfigError("generator.temperature must be a positive finite number");
            }
            break;
    }
}

GenerationResult GenerationResult::from_steps(std::vector<GenerationStep> steps) {
    GenerationResult r;
    r.steps = std::move(steps);
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        if (i > 0) r.text.push_back(' ');
        r.text += r.steps[i].token;
    }
    return r;
}

GenerationResult GenerationResult::from_tokens(const TokenSeq& tokens) {
    std::vector<GenerationStep> steps;
    steps.reserve(tokens.size());
    for (const auto& t : tokens) steps.push_back({t, std::nullopt});
    return from_steps(std::move(steps));
}

TokenSeq GenerationResult::step_tokens() const {
    TokenSeq out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.token);
    return out;
}

bool GenerationResult::has_logprobs() const {
    return !steps.empty() && std::all_of(steps.begin(), steps.end(), [](const auto& s) { return s.logprob.has_value(); });
}

std::optional<double> sequence_logprob(const GenerationResult& result) {
    double sum = 0.0;
    for (const auto& s : result.steps) {
        if (!s.logprob) return std::nullopt;
        sum += *s.logprob;
    }
    return sum;
}

Query Query::from_text(std::string text) {
    Query q;
    q.tokens = tokenize(text);
    q.text = std::move(text);
    return q;
}

GenerationError::GenerationError(Kind kind, std::string endpoint, std::string cause)
    : Error([&] {
          const char* what = kind == Kind::kTransport ? "transport failure"
                             : kind == Kind::kStatus  ? "non-success status"
                                                      : "malformed response";
          return std::string(what) + " from " + endpoint + ": " + cause;
      }()),
      kind_(kind),
      endpoint_(std::move(endpoint)),
      cause_(std::move(cause)) {}

// ---------------------------------------------------------------------------
// stub

StubGenerator::StubGenerator(GeneratorConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

GenerationResult StubGenerator::generate_initial(const Query& x, std::uint64_t) const {
    TokenSeq echo(x.tokens.begin(),
                  x.tokens.begin() + static_cast<std::ptrdiff_t>(std::min(cfg_.max_tokens, x.tokens.size())));
    return GenerationResult::from_tokens(echo);
}

namespace {

std::size_t overlap(const std::unordered_set<std::string_view>& a, const std::unordered_set<std::string_view>& b) {
    std::size_t n = 0;
    for (auto t : a) n += b.count(t);
    return n;
}

std::unordered_set<std::string_view> unique_of(const TokenSeq& tokens) {
    return {tokens.begin(), tokens.end()};
}

}  // namespace

GenerationResult StubGenerator::refine(const Query& x, const GenerationResult& y_prev,
                                       const RetrievedContext& context, std::uint64_t) const {
    if (context.empty()) return y_prev;

    struct Candidate {
        double score;
        const Sentence* sentence;
    };
    const TokenSeq y_tokens = tokenize(y_prev.text);
    const auto x_set = unique_of(x.tokens);
    const auto y_set = unique_of(y_tokens);

    std::vector<Candidate> candidates;
    for (const auto& passage : context.passages) {
        for (const auto& s : passage.sentences) {
            // Unique-token overlap with x, plus half the overlap with y_prev.
            const auto s_set = unique_of(s.tokens);
            const double score =
                static_cast<double>(overlap(s_set, x_set)) + 0.5 * static_cast<double>(overlap(s_set, y_set));
            candidates.push_back({score, &s});
        }
    }
    if (candidates.empty()) return y_prev;

    const std::size_t take = std::min(cfg_.top_sentences, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                          if (a.score != b.score) return a.score > b.score;
                          if (a.sentence->doc_id != b.sentence->doc_id) return a.sentence->doc_id < b.sentence->doc_id;
                          return a.sentence->index < b.sentence->index;
                      });

    TokenSeq out;
    for (std::size_t i = 0; i < take && out.size() < cfg_.max_tokens; ++i) {
        for (const auto& t : candidates[i].sentence->tokens) {
            if (out.size() == cfg_.max_tokens) break;
            out.push_back(t);
        }
    }
    return GenerationResult::from_tokens(out);
}

// ---------------------------------------------------------------------------
// toy policy

ToyPolicyGenerator::ToyPolicyGenerator(GeneratorConfig cfg, PolicyParams policy)
    : cfg_(std::move(cfg)), policy_(std::move(policy)) {
    cfg_.validate();
    policy_.validate();
}

GenerationResult ToyPolicyGenerator::sample(bool context, std::uint64_t seed) const {
    Rng rng(seed);
    const Trajectory traj = sample_trajectory(policy_, context, cfg_.max_tokens, cfg_.temperature, rng);
    std::vector<GenerationStep> steps;
    steps.reserve(traj.tokens.size());
    for (std::size_t i = 0; i < traj.tokens.size(); ++i) {
        steps.push_back({policy_.vocab()[traj.tokens[i]], traj.logprobs[i]});
    }
    return GenerationResult::from_steps(std::move(steps));
}

GenerationResult ToyPolicyGenerator::generate_initial(const Query&, std::uint64_t seed) const {
    return sample(false, seed);
}

GenerationResult ToyPolicyGenerator::refine(const Query&, const GenerationResult&, const RetrievedContext& context,
                                            std::uint64_t seed) const {
    return sample(!context.empty(), seed);
}

std::unique_ptr<Generator> make_generator(const GeneratorConfig& cfg, std::optional<PolicyParams> policy) {
    switch (cfg.backend) {
        case Backend::kStub: return std::make_unique<StubGenerator>(cfg);
        case Backend::kRemote: return std::make_unique<RemoteGenerator>(cfg);
        case Backend::kToyPolicy:
            if (!policy) throw ConfigError("toy-policy backend requires a policy checkpoint");
            return std::make_unique<ToyPolicyGenerator>(cfg, std::move(*policy));
    }
    throw ConfigError("unknown backend");
}

}  // namespace lorag
