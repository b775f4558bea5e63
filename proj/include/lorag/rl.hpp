#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorag/corpus.hpp"
#include "lorag/error.hpp"
#include "lorag/policy.hpp"
#include "lorag/retrieval.hpp"

namespace lorag {

class RlError : public Error {
public:
    using Error::Error;
};

/// A non-finite gradient or parameter during training; step() is 1-based.
class TrainingError : public RlError {
public:
    TrainingError(std::size_t step, const std::string& what)
        : RlError("training diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

enum class RewardKind { kTerminalRouge, kGroundingOverlap };

std::string to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& name);

struct RewardSpec {
    RewardKind kind = RewardKind::kGroundingOverlap;
    TokenSeq reference;  // terminal-rouge only
    double shift = 0.0;  // added to every per-step reward

    void validate() const;
};

/// Per-step reward r(y_t, y_<t, x).
///  grounding-overlap: 1 if y_t occurs in any context sentence, else 0.
///  terminal-rouge:    0 before the final step; at the final step, ROUGE-L F1
///                     of prefix + y_t against the reference.
double reward(const RewardSpec& spec, const std::string& y_t, const TokenSeq& y_prefix, const TokenSeq& x,
              const RetrievedContext& context, bool final_step);

/// Everything a rollout needs besides the parameters.
struct RlTask {
    TokenSeq x;
    RetrievedContext context;
    RewardSpec reward;
    std::size_t max_tokens = 3;
};

struct Episode {
    Trajectory trajectory;
    std::vector<double> rewards;

    double total_reward() const;
};

/// One temperature-1 rollout with per-step rewards.
Episode run_episode(const PolicyParams& policy, const RlTask& task, std::uint64_t seed);

struct GradEstimate {
    std::vector<double> grads;  // same layout as PolicyParams::logits()
    std::size_t episodes = 0;
    double mean_reward = 0.0;
};

/// Score-function estimate of the gradient of J = E[sum_t r_t]:
///
///   g = mean over episodes of  sum_t G_t * (onehot(y_t) - softmax(row_t))
///
/// placed on the row each step sampled from, where G_t = sum_{s>=t} r_s is
/// the reward-to-go. Episode e is seeded with derive_seed(seed, e).
/// Episodes run in parallel in fixed-size blocks; the block reduction order
/// is fixed, so the result is identical for any thread count.
GradEstimate reinforce_gradient(const PolicyParams& policy, const RlTask& task, std::size_t episodes,
                                std::uint64_t seed);

/// Single-threaded, episode-ordered reference for reinforce_gradient.
GradEstimate reinforce_gradient_serial(const PolicyParams& policy, const RlTask& task, std::size_t episodes,
                                       std::uint64_t seed);

/// Mean total reward over `trials` rollouts seeded like reinforce_gradient.
double expected_return(const PolicyParams& policy, const RlTask& task, std::size_t trials, std::uint64_t seed);

struct FdCoordinate {
    std::size_t index = 0;  // into PolicyParams::logits()
    double finite_difference = 0.0;
    double reinforce = 0.0;
    double rel_error = 0.0;
};

struct FdCheckResult {
    double max_rel_error = 0.0;
    std::vector<FdCoordinate> coordinates;
};

struct FdCheckOptions {
    double h = 0.05;
    std::size_t trials = 50000;
    std::size_t episodes = 50000;
    std::size_t max_coordinates = 8;
    // Coordinates whose REINFORCE estimate is smaller than this are not
    // sampled; their relative error would only measure Monte-Carlo noise.
    double min_magnitude = 0.1;
    std::uint64_t seed = 0;
};

/// Rows a rollout of `task` can reach: START and every previous token, all
/// with the task's context flag.
std::vector<std::size_t> reachable_rows(const PolicyParams& policy, const RlTask& task);

/// Expected number of times per episode each row is sampled from, by exact
/// propagation of the previous-token distribution (no sampling).
std::vector<double> row_visit_counts(const PolicyParams& policy, const RlTask& task);

/// Compares reinforce_gradient against central differences of
/// expected_return (common random numbers at theta +/- h) on up to
/// `max_coordinates` coordinates drawn from reachable rows with
/// |reinforce| >= min_magnitude. Relative error uses
/// max(|fd|, |reinforce|, 1e-8) as denominator. Throws RlError when no
/// coordinate qualifies.
FdCheckResult fd_check(const PolicyParams& policy, const RlTask& task, const FdCheckOptions& opts);

/// Same, on caller-chosen coordinates.
FdCheckResult fd_check(const PolicyParams& policy, const RlTask& task, const FdCheckOptions& opts,
                       const std::vector<std::size_t>& coordinates);

struct TrainResult {
    PolicyParams policy;
    std::vector<double> reward_curve;  // mean_reward per step
};

/// Plain gradient ascent, theta += lr * g. Step s uses derive_seed(seed, s).
TrainResult train_toy(PolicyParams policy, const RlTask& task, std::size_t steps, double lr,
                      std::size_t episodes_per_step, std::uint64_t seed);

/// Means of consecutive non-overlapping windows (the last may be shorter).
std::vector<double> window_means(const std::vector<double>& curve, std::size_t window);

/// "step,mean_reward" CSV with a header row.
std::string reward_curve_csv(const std::vector<double>& curve);

}  // namespace lorag
