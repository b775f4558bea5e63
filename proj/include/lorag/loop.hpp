#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lorag/generator.hpp"
#include "lorag/retrieval.hpp"

namespace lorag {

struct LoopConfig {
    std::size_t max_iters = 3;
    double epsilon = 0.02;
    std::size_t k = 5;
    double w_y = 0.5;

    void validate() const;
};

// kFailed only appears in partial transcripts attached to a LoopError.
enum class StopReason { kMaxIters, kConverged, kTZero, kFailed };

std::string to_string(StopReason reason);

struct IterationRecord {
    std::size_t t = 0;
    GenerationResult output;
    RetrievedContext context;  // the context this iteration consumed
    double distance_from_prev = 0.0;

    bool operator==(const IterationRecord&) const = default;
};

struct LoopTranscript {
    Query query;
    GenerationResult initial;
    RetrievedContext initial_context;
    std::vector<IterationRecord> iterations;
    StopReason stop_reason = StopReason::kTZero;
    GenerationResult final;

    bool operator==(const LoopTranscript&) const = default;
};

/// A generator failure inside the loop. Carries the iteration it happened in
/// (0 = initial generation) and everything recorded before it.
class LoopError : public Error {
public:
    LoopError(std::size_t iteration, LoopTranscript partial, const std::string& cause);

    std::size_t iteration() const { return iteration_; }
    const LoopTranscript& partial() const { return partial_; }

private:
    std::size_t iteration_;
    LoopTranscript partial_;
};

/// Token-level Levenshtein distance (unit costs).
std::size_t token_edit_distance(const TokenSeq& a, const TokenSeq& b);

/// Edit distance over step tokens normalized by the longer length; 0 when
/// both are empty.
double convergence_distance(const GenerationResult& a, const GenerationResult& b);

/// The iterative retrieve-refine loop:
///
///   y <- generate_initial(x);  C <- retrieve(x)
///   for t = 1..T:
///     y_t <- refine(x, y_{t-1}, C)
///     stop if distance(y_{t-1}, y_t) <= epsilon
///     C <- retrieve_joint(x, y_t)
///
/// Each iteration consumes the context retrieved before it. Generator calls
/// are seeded with derive_seed(seed, t), t = 0 for the initial output.
LoopTranscript run_loop(const Query& x, const Retriever& retriever, const Generator& generator,
                        const LoopConfig& cfg, std::uint64_t seed = 0);

}  // namespace lorag
