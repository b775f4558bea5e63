#include "lorag/rl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

#include "lorag/metrics.hpp"
#include "lorag/random.hpp"

namespace lorag {

std::string to_string(RewardKind kind) {
    return kind == RewardKind::kTerminalRouge ? "terminal-rouge" : "grounding-overlap";
}

RewardKind reward_kind_from_string(const std::string& name) {
    if (name == "terminal-rouge") return RewardKind::kTerminalRouge;
    if (name == "grounding-overlap") return RewardKind::kGroundingOverlap;
    throw RlError("unknown reward kind '" + name + "' (expected terminal-rouge or grounding-overlap)");
}

void RewardSpec::validate() const {
    if (kind == RewardKind::kTerminalRouge && reference.empty()) {
        throw RlError("terminal-rouge reward requires a non-empty reference");
    }
    if (!std::isfinite(shift)) throw RlError("reward shift must be finite");
}

double reward(const RewardSpec& spec, const std::string& y_t, const TokenSeq& y_prefix, const TokenSeq&,
              const RetrievedContext& context, bool final_step) {
    spec.validate();
    double r = 0.0;
    switch (spec.kind) {
        case RewardKind::kGroundingOverlap:
            for (const auto& passage : context.passages) {
                for (const auto& s : passage.sentences) {
                    if (std::find(s.tokens.begin(), s.tokens.end(), y_t) != s.tokens.end()) {
                        r = 1.0;
                        break;
                    }
                }
                if (r == 1.0) break;
            }
            break;
        case RewardKind::kTerminalRouge:
            if (final_step) {
                TokenSeq full = y_prefix;
                full.push_back(y_t);
                r = rouge_l_f1(full, spec.reference);
            }
            break;
    }
    return r + spec.shift;
}

double Episode::total_reward() const {
    double sum = 0.0;
    for (double r : rewards) sum += r;
    return sum;
}

namespace {

constexpr std::size_t kBlock = 256;

// Caches what a rollout needs so the hot loop avoids re-deriving rewards.
class Rollouts {
public:
    Rollouts(const PolicyParams& policy, const RlTask& task)
        : policy_(policy), task_(task), context_flag_(!task.context.empty()) {
        policy.validate();
        task.reward.validate();
        if (task.max_tokens < 1) throw RlError("max_tokens must be at least 1");
        if (task.reward.kind == RewardKind::kGroundingOverlap) {
            for (const auto& tok : policy.vocab()) {
                token_reward_.push_back(reward(task.reward, tok, {}, task.x, task.context, false));
            }
        }
    }

    Episode run(std::uint64_t seed) const {
        Rng rng(seed);
        Episode ep;
        ep.trajectory = sample_trajectory(policy_, context_flag_, task_.max_tokens, 1.0, rng);
        const auto& toks = ep.trajectory.tokens;
        ep.rewards.resize(toks.size());
        if (task_.reward.kind == RewardKind::kGroundingOverlap) {
            for (std::size_t t = 0; t < toks.size(); ++t) ep.rewards[t] = token_reward_[toks[t]];
        } else {
            TokenSeq prefix;
            for (std::size_t t = 0; t < toks.size(); ++t) {
                const std::string& tok = policy_.vocab()[toks[t]];
                ep.rewards[t] = reward(task_.reward, tok, prefix, task_.x, task_.context, t + 1 == toks.size());
                prefix.push_back(tok);
            }
        }
        return ep;
    }

    // Adds one episode's score-function terms into `grads`; returns its total reward.
    double accumulate(std::uint64_t seed, std::vector<double>& grads) const {
        const Episode ep = run(seed);
        const std::size_t v = policy_.vocab_size();
        double to_go = 0.0;
        for (std::size_t t = ep.rewards.size(); t-- > 0;) {
            to_go += ep.rewards[t];
            if (to_go == 0.0) continue;
            const std::size_t r = ep.trajectory.rows[t];
            const auto probs = softmax(policy_.row(r));
            double* row = grads.data() + r * v;
            for (std::size_t i = 0; i < v; ++i) {
                const double onehot = i == ep.trajectory.tokens[t] ? 1.0 : 0.0;
                row[i] += to_go * (onehot - probs[i]);
            }
        }
        return ep.total_reward();
    }

private:
    const PolicyParams& policy_;
    const RlTask& task_;
    bool context_flag_;
    std::vector<double> token_reward_;
};

}  // namespace

Episode run_episode(const PolicyParams& policy, const RlTask& task, std::uint64_t seed) {
    return Rollouts(policy, task).run(seed);
}

GradEstimate reinforce_gradient(const PolicyParams& policy, const RlTask& task, std::size_t episodes,
                                std::uint64_t seed) {
    if (episodes < 1) throw RlError("episodes must be at least 1");
    const Rollouts rollouts(policy, task);
    const std::size_t width = policy.logits().size();
    const std::size_t blocks = (episodes + kBlock - 1) / kBlock;

    std::vector<std::vector<double>> block_grads(blocks, std::vector<double>(width, 0.0));
    std::vector<double> block_reward(blocks, 0.0);
    const auto nblocks = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < nblocks; ++b) {
        const auto blk = static_cast<std::size_t>(b);
        const std::size_t end = std::min(episodes, (blk + 1) * kBlock);
        for (std::size_t e = blk * kBlock; e < end; ++e) {
            block_reward[blk] += rollouts.accumulate(derive_seed(seed, e), block_grads[blk]);
        }
    }

    GradEstimate est;
    est.episodes = episodes;
    est.grads.assign(width, 0.0);
    double total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < width; ++i) est.grads[i] += block_grads[b][i];
        total += block_reward[b];
    }
    const auto n = static_cast<double>(episodes);
    for (double& g : est.grads) g /= n;
    est.mean_reward = total / n;
    return est;
}

GradEstimate reinforce_gradient_serial(const PolicyParams& policy, const RlTask& task, std::size_t episodes,
                                       std::uint64_t seed) {
    if (episodes < 1) throw RlError("episodes must be at least 1");
    const Rollouts rollouts(policy, task);
    GradEstimate est;
    est.episodes = episodes;
    est.grads.assign(policy.logits().size(), 0.0);
    double total = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) total += rollouts.accumulate(derive_seed(seed, e), est.grads);
    const auto n = static_cast<double>(episodes);
    for (double& g : est.grads) g /= n;
    est.mean_reward = total / n;
    return est;
}

double expected_return(const PolicyParams& policy, const RlTask& task, std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw RlError("trials must be at least 1");
    const Rollouts rollouts(policy, task);
    const std::size_t blocks = (trials + kBlock - 1) / kBlock;
    std::vector<double> block_reward(blocks, 0.0);
    const auto nblocks = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t b = 0; b < nblocks; ++b) {
        const auto blk = static_cast<std::size_t>(b);
        const std::size_t end = std::min(trials, (blk + 1) * kBlock);
        for (std::size_t e = blk * kBlock; e < end; ++e) {
            block_reward[blk] += rollouts.run(derive_seed(seed, e)).total_reward();
        }
    }
    double total = 0.0;
    for (double r : block_reward) total += r;
    return total / static_cast<double>(trials);
}

std::vector<std::size_t> reachable_rows(const PolicyParams& policy, const RlTask& task) {
    const bool ctx = !task.context.empty();
    std::vector<std::size_t> rows{policy.row_index(std::nullopt, ctx)};
    if (task.max_tokens > 1) {
        for (std::size_t i = 0; i < policy.vocab_size(); ++i) rows.push_back(policy.row_index(i, ctx));
    }
    return rows;
}

std::vector<double> row_visit_counts(const PolicyParams& policy, const RlTask& task) {
    const bool ctx = !task.context.empty();
    const std::size_t v = policy.vocab_size();
    std::vector<double> visits(policy.row_count(), 0.0);
    // prev_dist[0] is START, prev_dist[i + 1] is token i.
    std::vector<double> prev_dist(v + 1, 0.0);
    prev_dist[0] = 1.0;
    for (std::size_t t = 0; t < task.max_tokens; ++t) {
        std::vector<double> next(v + 1, 0.0);
        for (std::size_t slot = 0; slot <= v; ++slot) {
            if (prev_dist[slot] == 0.0) continue;
            const std::optional<std::size_t> prev = slot == 0 ? std::nullopt : std::optional<std::size_t>(slot - 1);
            const std::size_t r = policy.row_index(prev, ctx);
            visits[r] += prev_dist[slot];
            const auto probs = softmax(policy.row(r));
            for (std::size_t i = 0; i < v; ++i) next[i + 1] += prev_dist[slot] * probs[i];
        }
        prev_dist = std::move(next);
    }
    return visits;
}

namespace {

FdCheckResult compare(const PolicyParams& policy, const RlTask& task, const FdCheckOptions& opts,
                      const GradEstimate& rf, const std::vector<std::size_t>& coordinates) {
    FdCheckResult out;
    for (std::size_t idx : coordinates) {
        if (idx >= policy.logits().size()) throw RlError("fd_check coordinate out of range");
        PolicyParams plus = policy;
        PolicyParams minus = policy;
        plus.logits()[idx] += opts.h;
        minus.logits()[idx] -= opts.h;
        const double j_plus = expected_return(plus, task, opts.trials, opts.seed);
        const double j_minus = expected_return(minus, task, opts.trials, opts.seed);

        FdCoordinate c;
        c.index = idx;
        c.finite_difference = (j_plus - j_minus) / (2.0 * opts.h);
        c.reinforce = rf.grads[idx];
        const double denom = std::max({std::abs(c.finite_difference), std::abs(c.reinforce), 1e-8});
        c.rel_error = std::abs(c.finite_difference - c.reinforce) / denom;
        out.max_rel_error = std::max(out.max_rel_error, c.rel_error);
        out.coordinates.push_back(c);
    }
    return out;
}

}  // namespace

FdCheckResult fd_check(const PolicyParams& policy, const RlTask& task, const FdCheckOptions& opts) {
    if (!(opts.h > 0.0)) throw RlError("finite-difference step h must be positive");
    const GradEstimate rf = reinforce_gradient(policy, task, opts.episodes, opts.seed);

    std::vector<std::size_t> candidates;
    for (std::size_t r : reachable_rows(policy, task)) {
        for (std::size_t i = 0; i < policy.vocab_size(); ++i) {
            const std::size_t idx = r * policy.vocab_size() + i;
            if (std::abs(rf.grads[idx]) >= opts.min_magnitude) candidates.push_back(idx);
        }
    }
    if (candidates.empty()) throw RlError("fd_check: no coordinate has |gradient| >= min_magnitude");

    // Seeded Fisher-Yates; keep the first max_coordinates.
    Rng rng(derive_seed(opts.seed, 0xFDC0FFEEULL));
    for (std::size_t i = candidates.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(candidates[i - 1], candidates[std::min(j, i - 1)]);
    }
    if (candidates.size() > opts.max_coordinates) candidates.resize(opts.max_coordinates);
    std::sort(candidates.begin(), candidates.end());
    return compare(policy, task, opts, rf, candidates);
}

FdCheckResult fd_check(const PolicyParams& policy, const RlTask& task, const FdCheckOptions& opts,
                       const std::vector<std::size_t>& coordinates) {
    if (!(opts.h > 0.0)) throw RlError("finite-difference step h must be positive");
    return compare(policy, task, opts, reinforce_gradient(policy, task, opts.episodes, opts.seed), coordinates);
}

TrainResult train_toy(PolicyParams policy, const RlTask& task, std::size_t steps, double lr,
                      std::size_t episodes_per_step, std::uint64_t seed) {
    if (steps < 1) throw RlError("steps must be at least 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw RlError("learning rate must be a finite non-negative number");

    TrainResult out;
    out.reward_curve.reserve(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        const GradEstimate g = reinforce_gradient(policy, task, episodes_per_step, derive_seed(seed, s));
        for (std::size_t i = 0; i < g.grads.size(); ++i) {
            if (!std::isfinite(g.grads[i])) throw TrainingError(s + 1, "non-finite gradient");
        }
        if (lr != 0.0) {
            auto& logits = policy.logits();
            for (std::size_t i = 0; i < logits.size(); ++i) {
                logits[i] += lr * g.grads[i];
                if (!std::isfinite(logits[i])) throw TrainingError(s + 1, "non-finite parameter after update");
            }
        }
        out.reward_curve.push_back(g.mean_reward);
    }
    out.policy = std::move(policy);
    return out;
}

std::vector<double> window_means(const std::vector<double>& curve, std::size_t window) {
    std::vector<double> out;
    if (window == 0) return out;
    for (std::size_t start = 0; start < curve.size(); start += window) {
        const std::size_t end = std::min(curve.size(), start + window);
        double sum = 0.0;
        for (std::size_t i = start; i < end; ++i) sum += curve[i];
        out.push_back(sum / static_cast<double>(end - start));
    }
    return out;
}

std::string reward_curve_csv(const std::vector<double>& curve) {
    std::string out = "step,mean_reward\n";
    char buf[64];
    for (std::size_t i = 0; i < curve.size(); ++i) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, curve[i]);
        out += std::to_string(i + 1);
        out.push_back(',');
        out.append(buf, end);
        out.push_back('\n');
    }
    return out;
}

}  // namespace lorag
