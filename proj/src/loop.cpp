#include "lorag/loop.hpp"

#include <algorithm>
#include <cmath>

#include "lorag/random.hpp"

namespace lorag {

void LoopConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("loop.epsilon must lie in [0, 1]");
    if (k < 1) throw ConfigError("loop.k must be at least 1");
    if (!(w_y >= 0.0 && w_y <= 1.0)) throw ConfigError("loop.w_y must lie in [0, 1]");
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::kMaxIters: return "max_iters";
        case StopReason::kConverged: return "converged";
        case StopReason::kTZero: return "t_zero";
        case StopReason::kFailed: return "failed";
    }
    return "unknown";
}

LoopError::LoopError(std::size_t iteration, LoopTranscript partial, const std::string& cause)
    : Error("loop failed at iteration " + std::to_string(iteration) + ": " + cause),
      iteration_(iteration),
      partial_(std::move(partial)) {}

std::size_t token_edit_distance(const TokenSeq& a, const TokenSeq& b) {
    // Two-row DP over b.
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double convergence_distance(const GenerationResult& a, const GenerationResult& b) {
    const std::size_t longest = std::max(a.steps.size(), b.steps.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(token_edit_distance(a.step_tokens(), b.step_tokens())) /
           static_cast<double>(longest);
}

LoopTranscript run_loop(const Query& x, const Retriever& retriever, const Generator& generator,
                        const LoopConfig& cfg, std::uint64_t seed) {
    cfg.validate();

    LoopTranscript tr;
    tr.query = x;

    auto fail = [&](std::size_t t, const Error& e) {
        tr.stop_reason = StopReason::kFailed;
        tr.final = tr.iterations.empty() ? tr.initial : tr.iterations.back().output;
        return LoopError(t, tr, e.what());
    };

    try {
        tr.initial = generator.generate_initial(x, derive_seed(seed, 0));
    } catch (const Error& e) {
        throw fail(0, e);
    }
    tr.initial_context = retriever.retrieve(x.tokens, cfg.k);

    RetrievedContext context = tr.initial_context;
    const GenerationResult* y_prev = &tr.initial;
    tr.stop_reason = cfg.max_iters == 0 ? StopReason::kTZero : StopReason::kMaxIters;

    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        IterationRecord rec;
        rec.t = t;
        try {
            rec.output = generator.refine(x, *y_prev, context, derive_seed(seed, t));
        } catch (const Error& e) {
            throw fail(t, e);
        }
        rec.distance_from_prev = convergence_distance(*y_prev, rec.output);
        rec.context = std::move(context);
        tr.iterations.push_back(std::move(rec));
        y_prev = &tr.iterations.back().output;

        if (tr.iterations.back().distance_from_prev <= cfg.epsilon) {
            tr.stop_reason = StopReason::kConverged;
            break;
        }
        context = retriever.retrieve_joint(x.tokens, tokenize(y_prev->text), cfg.w_y, cfg.k);
    }

    tr.final = tr.iterations.empty() ? tr.initial : tr.iterations.back().output;
    return tr;
}

}  // namespace lorag
