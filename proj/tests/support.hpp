// Independent oracles and shared fixtures for the test binaries. Nothing here
// calls into the library code it is used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lorag/corpus.hpp"
#include "lorag/generator.hpp"
#include "lorag/loop.hpp"
#include "lorag/rl.hpp"

namespace oracle {

using Tokens = std::vector<std::string>;

// BM25 straight from the definition, over raw token lists.
inline double bm25(const std::vector<Tokens>& docs, const Tokens& query, std::size_t d, double k1 = 1.2,
                   double b = 0.75) {
    const double n = static_cast<double>(docs.size());
    double total_len = 0;
    for (const auto& doc : docs) total_len += static_cast<double>(doc.size());
    const double avg = total_len / n;
    std::set<std::string> unique(query.begin(), query.end());
    // Sum in lexicographic term order, which is the library's summation order too.
    double score = 0;
    for (const auto& term : unique) {
        double df = 0;
        for (const auto& doc : docs) df += std::count(doc.begin(), doc.end(), term) > 0 ? 1 : 0;
        if (df == 0) continue;
        const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), term));
        if (tf == 0) continue;
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double len = static_cast<double>(docs[d].size());
        score += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avg));
    }
    return score;
}

struct Ranked {
    std::string id;
    double score;
};

// Score every document, drop non-positive, sort by score desc then id asc.
inline std::vector<Ranked> brute_rank(const std::vector<std::string>& ids, const std::vector<Tokens>& docs,
                                      const Tokens& x, const Tokens& y = {}, double w_y = 0.0) {
    std::vector<Ranked> out;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        double s = bm25(docs, x, d);
        if (w_y != 0.0) s += w_y * bm25(docs, y, d);
        if (s > 0) out.push_back({ids[d], s});
    }
    std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    return out;
}

// LCS by trying every subsequence of the shorter side, longest first.
inline std::size_t lcs_exhaustive(const Tokens& a, const Tokens& b) {
    const Tokens& s = a.size() <= b.size() ? a : b;
    const Tokens& l = a.size() <= b.size() ? b : a;
    std::size_t best = 0;
    const std::uint32_t limit = 1u << s.size();
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
        const auto bits = static_cast<std::size_t>(__builtin_popcount(mask));
        if (bits <= best) continue;
        std::size_t j = 0;
        bool ok = true;
        for (std::size_t i = 0; i < s.size() && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            while (j < l.size() && l[j] != s[i]) ++j;
            if (j == l.size()) ok = false;
            else ++j;
        }
        if (ok) best = bits;
    }
    return best;
}

inline std::size_t lcs_recursive(const Tokens& a, const Tokens& b, std::size_t i, std::size_t j,
                                 std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t v = a[i] == b[j] ? 1 + lcs_recursive(a, b, i + 1, j + 1, memo)
                                 : std::max(lcs_recursive(a, b, i + 1, j, memo), lcs_recursive(a, b, i, j + 1, memo));
    memo[key] = v;
    return v;
}

inline std::map<Tokens, int> ngrams(const Tokens& t, std::size_t n) {
    std::map<Tokens, int> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + n)];
    return out;
}

inline double f1(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

inline double rouge_n(const Tokens& h, const Tokens& r, std::size_t n) {
    auto hg = ngrams(h, n), rg = ngrams(r, n);
    double hc = 0, rc = 0, m = 0;
    for (auto& [g, c] : hg) hc += c;
    for (auto& [g, c] : rg) rc += c;
    if (hc == 0 || rc == 0) return 0.0;
    for (auto& [g, c] : hg)
        if (auto it = rg.find(g); it != rg.end()) m += std::min(c, it->second);
    return f1(m / hc, m / rc);
}

inline double rouge_l(const Tokens& h, const Tokens& r) {
    if (h.empty() || r.empty()) return 0.0;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const double l = static_cast<double>(lcs_recursive(h, r, 0, 0, memo));
    return f1(l / static_cast<double>(h.size()), l / static_cast<double>(r.size()));
}

// Corpus BLEU with the library's documented edge conventions: eps replaces a
// zero match count, an order with no hypothesis n-grams uses denominator 1,
// and an empty hypothesis side scores 0.
inline double bleu(const std::vector<std::pair<Tokens, Tokens>>& pairs, std::size_t max_n = 4, double eps = 1e-9) {
    double hyp_len = 0, ref_len = 0;
    for (auto& [h, r] : pairs) {
        hyp_len += static_cast<double>(h.size());
        ref_len += static_cast<double>(r.size());
    }
    if (hyp_len == 0) return 0.0;
    double log_sum = 0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        double match = 0, total = 0;
        for (auto& [h, r] : pairs) {
            auto hg = ngrams(h, n), rg = ngrams(r, n);
            for (auto& [g, c] : hg) {
                total += c;
                if (auto it = rg.find(g); it != rg.end()) match += std::min(c, it->second);
            }
        }
        log_sum += std::log(match == 0 ? eps : match / total);
    }
    const double bp = std::exp(std::min(0.0, 1.0 - ref_len / hyp_len));
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

inline std::size_t levenshtein(const Tokens& a, const Tokens& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    return d[a.size()][b.size()];
}

inline std::vector<double> softmax(const std::vector<double>& z) {
    double m = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double s = 0;
    for (std::size_t i = 0; i < z.size(); ++i) s += p[i] = std::exp(z[i] - m);
    for (auto& v : p) v /= s;
    return p;
}

}  // namespace oracle

namespace fixture {

// Random corpus over a small vocabulary; ids are zero-padded so that string
// order equals numeric order.
struct RandomCorpus {
    std::vector<std::string> ids;
    std::vector<oracle::Tokens> tokens;
    lorag::Corpus corpus;
};

inline RandomCorpus random_corpus(std::mt19937_64& rng, std::size_t docs, std::size_t vocab) {
    RandomCorpus rc;
    std::uniform_int_distribution<std::size_t> len(1, 12), word(0, vocab - 1);
    for (std::size_t d = 0; d < docs; ++d) {
        char id[32];
        std::snprintf(id, sizeof id, "doc%04zu", d);
        oracle::Tokens t;
        std::string text;
        for (std::size_t i = 0, n = len(rng); i < n; ++i) {
            t.push_back("w" + std::to_string(word(rng)));
            text += (i ? " " : "") + t.back();
        }
        rc.ids.push_back(id);
        rc.tokens.push_back(t);
        rc.corpus.add(lorag::Document{id, text, {}});
    }
    return rc;
}

inline oracle::Tokens random_query(std::mt19937_64& rng, std::size_t vocab, std::size_t max_len = 4) {
    std::uniform_int_distribution<std::size_t> len(1, max_len), word(0, vocab + 2);  // a few unknown words
    oracle::Tokens q;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) q.push_back("w" + std::to_string(word(rng)));
    return q;
}

// Three documents for the hand-traced convergence example.
inline lorag::Corpus three_docs() {
    lorag::Corpus c;
    c.add({"d1", "Paris is the capital of France. The Seine flows through Paris.", {}});
    c.add({"d2", "Berlin is the capital of Germany. Berlin has many museums.", {}});
    c.add({"d3", "Bread is baked in ovens. Ovens are hot.", {}});
    return c;
}
inline const char* kThreeDocQuery = "What is the capital of France?";

// Twenty questions whose answers sit verbatim in the corpus, next to a
// distractor per question. The query shares only the subject name with the
// answer sentence, so echoing the query cannot reproduce the reference.
struct Planted {
    lorag::Corpus corpus;
    std::vector<std::string> queries;
    std::vector<std::string> references;
};

inline Planted planted_twenty() {
    static const char* names[] = {"alvar", "brisk", "corvin", "dalia", "emrys", "fenna", "gorm",
                                  "hesper", "ilka", "jorund", "kestrel", "liora", "marek", "nyssa",
                                  "orrin", "pell", "quill", "rhosyn", "sabel", "tovah"};
    static const char* places[] = {"ashford", "bramley", "carrow", "dunmere", "elsdon", "farlow", "glenby",
                                   "harrow", "irby", "jesmond", "kelso", "lanark", "morpeth", "nairn",
                                   "oban", "penrith", "quorn", "rydal", "selby", "thirsk"};
    Planted p;
    for (std::size_t i = 0; i < 20; ++i) {
        const std::string name = names[i];
        const std::string ref = name + " keeps bees near the river at " + places[i];
        p.corpus.add({"fact" + std::to_string(100 + i), ref + ". Visitors arrive in summer.", {}});
        p.corpus.add({"noise" + std::to_string(100 + i), "The market at " + std::string(places[(i + 7) % 20]) +
                                                             " sells bread. Rain fell all week.", {}});
        p.queries.push_back("Where does " + name + " keep bees?");
        p.references.push_back(ref);
    }
    return p;
}

inline lorag::GeneratorConfig planted_generator() {
    lorag::GeneratorConfig g;
    g.top_sentences = 1;
    return g;
}

// Gradient-check setup: V=4, three tokens, grounding reward on {a, b}.
inline lorag::RlTask fd_task() {
    lorag::Document doc{"d1", "a b stays here.", {}};
    lorag::RlTask task;
    task.x = lorag::tokenize("which letters");
    task.context.k = 1;
    task.context.passages.push_back({doc.id, 1.0, lorag::split_sentences(doc)});
    task.reward.kind = lorag::RewardKind::kGroundingOverlap;
    task.max_tokens = 3;
    return task;
}

// Rows after a/b lean towards a/b, rows after c/d lean away; START is flat.
inline lorag::PolicyParams fd_policy() {
    lorag::PolicyParams p({"a", "b", "c", "d"});
    for (std::size_t prev = 0; prev < 4; ++prev) {
        auto row = p.row(p.row_index(prev, true));
        const double s = prev < 2 ? 1.0 : -1.0;
        row[0] = s;
        row[1] = s;
        row[2] = -s;
        row[3] = -s;
    }
    return p;
}
inline constexpr std::uint64_t kFdSeed = 100;

// V=5 task where only "c" is rewarded.
inline lorag::RlTask train_task() {
    lorag::Document doc{"ctx0", "the answer is c.", {}};
    lorag::RlTask task;
    task.x = lorag::tokenize("what is the answer");
    task.context.k = 1;
    task.context.passages.push_back({doc.id, 1.0, lorag::split_sentences(doc)});
    task.reward.kind = lorag::RewardKind::kGroundingOverlap;
    task.max_tokens = 3;
    return task;
}
inline lorag::PolicyParams train_policy() { return lorag::PolicyParams({"a", "b", "c", "d", "e"}); }
inline constexpr std::uint64_t kTrainSeed = 7;

}  // namespace fixture
