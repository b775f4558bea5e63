#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorag/error.hpp"
#include "lorag/random.hpp"

namespace lorag {

class PolicyError : public Error {
public:
    using Error::Error;
};

/// Logit table of the toy categorical generator. One row per conditioning key
/// (previous token or START, context-nonempty flag), V entries per row.
class PolicyParams {
public:
    PolicyParams() = default;
    /// All-zero logits, i.e. uniform rows.
    explicit PolicyParams(std::vector<std::string> vocab);
    PolicyParams(std::vector<std::string> vocab, std::vector<double> logits);

    std::size_t vocab_size() const { return vocab_.size(); }
    std::size_t row_count() const { return 2 * (vocab_.size() + 1); }
    const std::vector<std::string>& vocab() const { return vocab_; }
    std::optional<std::size_t> token_index(const std::string& token) const;

    /// `prev` empty means START.
    std::size_t row_index(std::optional<std::size_t> prev, bool context) const;
    std::string row_key(std::size_t row) const;
    std::optional<std::size_t> row_from_key(const std::string& key) const;

    std::span<const double> row(std::size_t r) const;
    std::span<double> row(std::size_t r);
    const std::vector<double>& logits() const { return logits_; }
    std::vector<double>& logits() { return logits_; }

    /// Throws PolicyError when the shape is wrong or an entry is not finite.
    void validate() const;

    bool operator==(const PolicyParams&) const = default;

private:
    std::vector<std::string> vocab_;
    std::vector<double> logits_;  // row-major, row_count() x vocab_size()
};

std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);
std::vector<double> log_softmax(std::span<const double> logits, double temperature = 1.0);

/// Inverse-CDF draw: first index whose cumulative probability exceeds u.
std::size_t sample_index(std::span<const double> probs, double u);

/// One autoregressive rollout of fixed length.
struct Trajectory {
    std::vector<std::size_t> tokens;
    std::vector<std::size_t> rows;
    std::vector<double> logprobs;
};

Trajectory sample_trajectory(const PolicyParams& policy, bool context, std::size_t max_tokens,
                             double temperature, Rng& rng);

/// Checkpoint JSON: {"vocab": [...], "logits": {"prev=<tok|START>,ctx=<0|1>": [...]}}.
std::string policy_to_json(const PolicyParams& policy);
PolicyParams policy_from_json(const std::string& text);
PolicyParams load_policy(const std::filesystem::path& path);
void save_policy(const PolicyParams& policy, const std::filesystem::path& path);

}  // namespace lorag
