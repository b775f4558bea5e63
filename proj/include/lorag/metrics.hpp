#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lorag/corpus.hpp"
#include "lorag/error.hpp"

namespace lorag {

class MetricsError : public Error {
public:
    using Error::Error;
};

struct EvalPair {
    TokenSeq hypothesis;
    TokenSeq reference;
    std::optional<std::vector<double>> logprobs;  // one per hypothesis token
};

struct RougeScores {
    double rouge1_f = 0.0;
    double rouge2_f = 0.0;
    double rougeL_f = 0.0;
};

struct PerplexityResult {
    std::optional<double> value;
    std::size_t excluded = 0;  // pairs without logprobs
};

struct MetricsReport {
    double bleu = 0.0;
    double rouge1_f = 0.0;
    double rouge2_f = 0.0;
    double rougeL_f = 0.0;
    std::optional<double> perplexity;
    std::size_t n_pairs = 0;
    std::size_t excluded_from_ppl = 0;
};

// Precision used for an order with no clipped matches.
inline constexpr double kBleuEpsilon = 1e-9;

/// Corpus BLEU: clipped n-gram counts pooled over all pairs, uniform weights,
/// brevity penalty from total lengths. A zero match count for some order is
/// replaced by a precision of kBleuEpsilon.
double bleu(std::span<const EvalPair> pairs, std::size_t max_n = 4);

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

/// F1 of clipped n-gram overlap for one pair; 0 when P + R is 0.
double rouge_n_f1(const TokenSeq& hyp, const TokenSeq& ref, std::size_t n);
double rouge_l_f1(const TokenSeq& hyp, const TokenSeq& ref);

/// Macro-averaged ROUGE-1/2/L F1 (pairs scored in parallel).
RougeScores rouge(std::span<const EvalPair> pairs);
RougeScores rouge_serial(std::span<const EvalPair> pairs);

/// exp(-sum(logprobs) / token count) over pairs that carry logprobs.
PerplexityResult perplexity(std::span<const EvalPair> pairs);

MetricsReport evaluate(std::span<const EvalPair> pairs);

}  // namespace lorag
