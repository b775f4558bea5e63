#include "lorag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>

namespace lorag {
namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            key.push_back('\x1f');
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

std::size_t clipped_matches(const NgramCounts& hyp, const NgramCounts& ref) {
    std::size_t m = 0;
    for (const auto& [gram, c] : hyp) {
        auto it = ref.find(gram);
        if (it != ref.end()) m += std::min(c, it->second);
    }
    return m;
}

double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

void require_pairs(std::span<const EvalPair> pairs) {
    if (pairs.empty()) throw MetricsError("metric requires at least one pair");
}

}  // namespace

double bleu(std::span<const EvalPair> pairs, std::size_t max_n) {
    require_pairs(pairs);
    if (max_n < 1) throw MetricsError("BLEU max_n must be at least 1");

    std::vector<std::size_t> matches(max_n, 0);
    std::vector<std::size_t> totals(max_n, 0);
    std::size_t hyp_len = 0;
    std::size_t ref_len = 0;
    for (const auto& p : pairs) {
        hyp_len += p.hypothesis.size();
        ref_len += p.reference.size();
        for (std::size_t n = 1; n <= max_n; ++n) {
            const auto h = count_ngrams(p.hypothesis, n);
            matches[n - 1] += clipped_matches(h, count_ngrams(p.reference, n));
            if (p.hypothesis.size() >= n) totals[n - 1] += p.hypothesis.size() - n + 1;
        }
    }
    if (hyp_len == 0) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 0; n < max_n; ++n) {
        // A zero precision is floored at epsilon itself, not epsilon / total: dividing would make
        // sparse higher orders outweigh a zero unigram precision.
        const double p = matches[n] == 0 ? kBleuEpsilon
                                         : static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
        log_sum += std::log(p);
    }
    const double bp = std::exp(std::min(0.0, 1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len)));
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_n_f1(const TokenSeq& hyp, const TokenSeq& ref, std::size_t n) {
    const auto h = count_ngrams(hyp, n);
    const auto r = count_ngrams(ref, n);
    const std::size_t h_total = hyp.size() >= n ? hyp.size() - n + 1 : 0;
    const std::size_t r_total = ref.size() >= n ? ref.size() - n + 1 : 0;
    if (h_total == 0 || r_total == 0) return 0.0;
    const auto m = static_cast<double>(clipped_matches(h, r));
    return f1(m / static_cast<double>(h_total), m / static_cast<double>(r_total));
}

double rouge_l_f1(const TokenSeq& hyp, const TokenSeq& ref) {
    if (hyp.empty() || ref.empty()) return 0.0;
    const auto l = static_cast<double>(lcs_length(hyp, ref));
    return f1(l / static_cast<double>(hyp.size()), l / static_cast<double>(ref.size()));
}

namespace {

RougeScores average(const std::vector<RougeScores>& per_pair) {
    RougeScores sum;
    for (const auto& s : per_pair) {
        sum.rouge1_f += s.rouge1_f;
        sum.rouge2_f += s.rouge2_f;
        sum.rougeL_f += s.rougeL_f;
    }
    const auto n = static_cast<double>(per_pair.size());
    return {sum.rouge1_f / n, sum.rouge2_f / n, sum.rougeL_f / n};
}

RougeScores score_pair(const EvalPair& p) {
    return {rouge_n_f1(p.hypothesis, p.reference, 1), rouge_n_f1(p.hypothesis, p.reference, 2),
            rouge_l_f1(p.hypothesis, p.reference)};
}

}  // namespace

RougeScores rouge(std::span<const EvalPair> pairs) {
    require_pairs(pairs);
    std::vector<RougeScores> per_pair(pairs.size());
    const auto n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) per_pair[static_cast<std::size_t>(i)] = score_pair(pairs[static_cast<std::size_t>(i)]);
    // Reduce in pair order so the result does not depend on the schedule.
    return average(per_pair);
}

RougeScores rouge_serial(std::span<const EvalPair> pairs) {
    require_pairs(pairs);
    RougeScores sum;
    for (const auto& p : pairs) {
        const RougeScores s = score_pair(p);
        sum.rouge1_f += s.rouge1_f;
        sum.rouge2_f += s.rouge2_f;
        sum.rougeL_f += s.rougeL_f;
    }
    const auto n = static_cast<double>(pairs.size());
    return {sum.rouge1_f / n, sum.rouge2_f / n, sum.rougeL_f / n};
}

PerplexityResult perplexity(std::span<const EvalPair> pairs) {
    PerplexityResult out;
    double total = 0.0;
    std::size_t tokens = 0;
    bool any = false;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        if (!p.logprobs) {
            ++out.excluded;
            continue;
        }
        if (p.logprobs->size() != p.hypothesis.size()) {
            throw MetricsError("pair " + std::to_string(i) + ": " + std::to_string(p.logprobs->size()) +
                               " logprobs for " + std::to_string(p.hypothesis.size()) + " hypothesis tokens");
        }
        any = true;
        for (double lp : *p.logprobs) total += lp;
        tokens += p.logprobs->size();
    }
    // No scored tokens at all leaves perplexity undefined.
    if (any && tokens > 0) out.value = std::exp(-total / static_cast<double>(tokens));
    return out;
}

MetricsReport evaluate(std::span<const EvalPair> pairs) {
    MetricsReport r;
    r.bleu = bleu(pairs);
    const RougeScores rs = rouge(pairs);
    r.rouge1_f = rs.rouge1_f;
    r.rouge2_f = rs.rouge2_f;
    r.rougeL_f = rs.rougeL_f;
    const PerplexityResult ppl = perplexity(pairs);
    r.perplexity = ppl.value;
    r.excluded_from_ppl = ppl.excluded;
    r.n_pairs = pairs.size();
    return r;
}

}  // namespace lorag
