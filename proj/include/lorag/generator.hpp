#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lorag/corpus.hpp"
#include "lorag/error.hpp"
#include "lorag/policy.hpp"
#include "lorag/retrieval.hpp"

namespace lorag {

enum class Backend { kStub, kRemote, kToyPolicy };

std::string to_string(Backend backend);
Backend backend_from_string(const std::string& name);

struct GeneratorConfig {
    Backend backend = Backend::kStub;
    std::size_t max_tokens = 64;
    double temperature = 1.0;       // remote and toy-policy
    std::size_t top_sentences = 2;  // stub
    std::string endpoint_url;       // remote

    /// Throws ConfigError when a field the backend needs is missing or out of range.
    void validate() const;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

struct GenerationStep {
    std::string token;
    std::optional<double> logprob;

    bool operator==(const GenerationStep&) const = default;
};

struct GenerationResult {
    std::vector<GenerationStep> steps;
    std::string text;  // space-join of step tokens

    static GenerationResult from_steps(std::vector<GenerationStep> steps);
    static GenerationResult from_tokens(const TokenSeq& tokens);

    TokenSeq step_tokens() const;
    bool has_logprobs() const;

    bool operator==(const GenerationResult&) const = default;
};

/// Sum of per-step log-probabilities; nullopt when the backend reported none.
std::optional<double> sequence_logprob(const GenerationResult& result);

/// The input x in both raw and tokenized form.
struct Query {
    std::string text;
    TokenSeq tokens;

    static Query from_text(std::string text);

    bool operator==(const Query&) const = default;
};

class GenerationError : public Error {
public:
    enum class Kind { kTransport, kStatus, kMalformed };

    GenerationError(Kind kind, std::string endpoint, std::string cause);

    Kind kind() const { return kind_; }
    const std::string& endpoint() const { return endpoint_; }
    const std::string& cause() const { return cause_; }

private:
    Kind kind_;
    std::string endpoint_;
    std::string cause_;
};

/// GenerativeModel (initial output) and the refinement step. Implementations
/// are stateless; all randomness comes from the per-call seed.
class Generator {
public:
    virtual ~Generator() = default;

    virtual GenerationResult generate_initial(const Query& x, std::uint64_t seed) const = 0;
    virtual GenerationResult refine(const Query& x, const GenerationResult& y_prev,
                                    const RetrievedContext& context, std::uint64_t seed) const = 0;
};

/// Deterministic extractive backend. The initial output echoes x; refinement
/// picks the context sentences that best overlap x and the previous answer.
class StubGenerator final : public Generator {
public:
    explicit StubGenerator(GeneratorConfig cfg);

    GenerationResult generate_initial(const Query& x, std::uint64_t seed) const override;
    GenerationResult refine(const Query& x, const GenerationResult& y_prev, const RetrievedContext& context,
                            std::uint64_t seed) const override;

private:
    GeneratorConfig cfg_;
};

/// Talks to an HTTP completion endpoint using the JSON wire format below.
///   request:  {"prompt": str, "max_tokens": int, "temperature": number}
///   response: {"tokens": [{"text": str, "logprob": number|null}, ...]}
class RemoteGenerator final : public Generator {
public:
    explicit RemoteGenerator(GeneratorConfig cfg);

    GenerationResult generate_initial(const Query& x, std::uint64_t seed) const override;
    GenerationResult refine(const Query& x, const GenerationResult& y_prev, const RetrievedContext& context,
                            std::uint64_t seed) const override;

    GenerationResult complete(const std::string& prompt) const;

private:
    GeneratorConfig cfg_;
};

std::string render_initial_prompt(const Query& x);
std::string render_refine_prompt(const Query& x, const GenerationResult& y_prev, const RetrievedContext& context);
std::string remote_request_body(const std::string& prompt, const GeneratorConfig& cfg);
GenerationResult parse_remote_response(const std::string& body, const std::string& endpoint);

/// Samples from a PolicyParams table. Conditioning is (previous token,
/// context-nonempty flag); generate_initial always uses flag 0.
class ToyPolicyGenerator final : public Generator {
public:
    ToyPolicyGenerator(GeneratorConfig cfg, PolicyParams policy);

    GenerationResult generate_initial(const Query& x, std::uint64_t seed) const override;
    GenerationResult refine(const Query& x, const GenerationResult& y_prev, const RetrievedContext& context,
                            std::uint64_t seed) const override;

    const PolicyParams& policy() const { return policy_; }

private:
    GenerationResult sample(bool context, std::uint64_t seed) const;

    GeneratorConfig cfg_;
    PolicyParams policy_;
};

/// Toy-policy configs need `policy`; other backends ignore it.
std::unique_ptr<Generator> make_generator(const GeneratorConfig& cfg,
                                          std::optional<PolicyParams> policy = std::nullopt);

}  // namespace lorag
