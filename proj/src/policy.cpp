#include "lorag/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lorag {

using json = nlohmann::json;

PolicyParams::PolicyParams(std::vector<std::string> vocab)
    : vocab_(std::move(vocab)), logits_(row_count() * vocab_.size(), 0.0) {
    validate();
}

PolicyParams::PolicyParams(std::vector<std::string> vocab, std::vector<double> logits)
    : vocab_(std::move(vocab)), logits_(std::move(logits)) {
    validate();
}

std::optional<std::size_t> PolicyParams::token_index(const std::string& token) const {
    auto it = std::find(vocab_.begin(), vocab_.end(), token);
    if (it == vocab_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - vocab_.begin());
}

std::size_t PolicyParams::row_index(std::optional<std::size_t> prev, bool context) const {
    const std::size_t slot = prev ? *prev + 1 : 0;
    return slot * 2 + (context ? 1 : 0);
}

std::string PolicyParams::row_key(std::size_t row) const {
    const std::size_t slot = row / 2;
    const std::string prev = slot == 0 ? "START" : vocab_.at(slot - 1);
    return "prev=" + prev + ",ctx=" + (row % 2 == 1 ? "1" : "0");
}

std::optional<std::size_t> PolicyParams::row_from_key(const std::string& key) const {
    for (std::size_t r = 0; r < row_count(); ++r) {
        if (row_key(r) == key) return r;
    }
    return std::nullopt;
}

std::span<const double> PolicyParams::row(std::size_t r) const {
    return std::span<const double>(logits_).subspan(r * vocab_.size(), vocab_.size());
}

std::span<double> PolicyParams::row(std::size_t r) {
    return std::span<double>(logits_).subspan(r * vocab_.size(), vocab_.size());
}

void PolicyParams::validate() const {
    if (vocab_.empty()) throw PolicyError("policy vocabulary is empty");
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        if (vocab_[i] == "START") throw PolicyError("\"START\" is reserved and cannot be a vocabulary token");
        if (std::find(vocab_.begin() + static_cast<std::ptrdiff_t>(i) + 1, vocab_.end(), vocab_[i]) != vocab_.end()) {
            throw PolicyError("duplicate vocabulary token '" + vocab_[i] + "'");
        }
    }
    if (logits_.size() != row_count() * vocab_.size()) {
        throw PolicyError("logit table has " + std::to_string(logits_.size()) + " entries, expected " +
                          std::to_string(row_count() * vocab_.size()));
    }
    for (std::size_t i = 0; i < logits_.size(); ++i) {
        if (!std::isfinite(logits_[i])) {
            throw PolicyError("non-finite logit in row " + row_key(i / vocab_.size()));
        }
    }
}

std::vector<double> log_softmax(std::span<const double> logits, double temperature) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    double m = logits[0] / temperature;
    for (double l : logits) m = std::max(m, l / temperature);
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l / temperature - m);
    const double lse = m + std::log(sum);
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] / temperature - lse;
    return out;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    double m = logits[0] / temperature;
    for (double l : logits) m = std::max(m, l / temperature);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] / temperature - m);
        sum += out[i];
    }
    for (double& p : out) p /= sum;
    return out;
}

std::size_t sample_index(std::span<const double> probs, double u) {
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cum += probs[i];
        last_positive = i;
        if (u < cum) return i;
    }
    // Rounding can leave the cumulative sum just under 1.
    return last_positive;
}

Trajectory sample_trajectory(const PolicyParams& policy, bool context, std::size_t max_tokens,
                             double temperature, Rng& rng) {
    Trajectory traj;
    traj.tokens.reserve(max_tokens);
    traj.rows.reserve(max_tokens);
    traj.logprobs.reserve(max_tokens);
    std::optional<std::size_t> prev;
    for (std::size_t t = 0; t < max_tokens; ++t) {
        const std::size_t r = policy.row_index(prev, context);
        const auto probs = softmax(policy.row(r), temperature);
        const std::size_t tok = sample_index(probs, rng.uniform());
        traj.tokens.push_back(tok);
        traj.rows.push_back(r);
        traj.logprobs.push_back(log_softmax(policy.row(r), temperature)[tok]);
        prev = tok;
    }
    return traj;
}

std::string policy_to_json(const PolicyParams& policy) {
    json doc;
    doc["vocab"] = policy.vocab();
    json rows = json::object();
    for (std::size_t r = 0; r < policy.row_count(); ++r) {
        const auto row = policy.row(r);
        rows[policy.row_key(r)] = std::vector<double>(row.begin(), row.end());
    }
    doc["logits"] = std::move(rows);
    return doc.dump(2) + "\n";
}

PolicyParams policy_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PolicyError(std::string("invalid policy JSON: ") + e.what());
    }
    try {
        PolicyParams policy(doc.at("vocab").get<std::vector<std::string>>());
        const json& rows = doc.at("logits");
        if (rows.size() != policy.row_count()) {
            throw PolicyError("policy has " + std::to_string(rows.size()) + " logit rows, expected " +
                              std::to_string(policy.row_count()));
        }
        for (const auto& [key, values] : rows.items()) {
            auto r = policy.row_from_key(key);
            if (!r) throw PolicyError("unknown conditioning key '" + key + "'");
            auto vals = values.get<std::vector<double>>();
            if (vals.size() != policy.vocab_size()) throw PolicyError("row '" + key + "' has wrong width");
            std::copy(vals.begin(), vals.end(), policy.row(*r).begin());
        }
        policy.validate();
        return policy;
    } catch (const json::exception& e) {
        throw PolicyError(std::string("malformed policy: ") + e.what());
    }
}

PolicyParams load_policy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PolicyError("cannot open policy file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return policy_from_json(buf.str());
}

void save_policy(const PolicyParams& policy, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PolicyError("cannot write policy file " + path.string());
    out << policy_to_json(policy);
    if (!out) throw PolicyError("failed writing policy file " + path.string());
}

}  // namespace lorag
