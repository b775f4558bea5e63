#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lorag/metrics.hpp"
#include "support.hpp"

using namespace lorag;

namespace {

std::vector<EvalPair> random_pairs(std::mt19937_64& rng, std::size_t n, std::size_t vocab = 6) {
    std::vector<EvalPair> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({fixture::random_query(rng, vocab, 10), fixture::random_query(rng, vocab, 10), std::nullopt});
    }
    return out;
}

std::vector<std::pair<TokenSeq, TokenSeq>> plain(const std::vector<EvalPair>& pairs) {
    std::vector<std::pair<TokenSeq, TokenSeq>> out;
    for (const auto& p : pairs) out.emplace_back(p.hypothesis, p.reference);
    return out;
}

}  // namespace

TEST(Bleu, IdenticalIsOne) {
    std::vector<EvalPair> pairs{{{"the", "cat", "sat", "on", "the", "mat"}, {"the", "cat", "sat", "on", "the", "mat"}, {}},
                                {{"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "e"}, {}}};
    EXPECT_EQ(bleu(pairs), 1.0);
}

TEST(Bleu, FourTokenHandValue) {
    std::vector<EvalPair> pairs{{{"a", "b", "c", "d"}, {"a", "b", "c", "e"}, {}}};
    // p1 = 3/4, p2 = 2/3, p3 = 1/2 (one matching trigram out of two), p4 = eps/1.
    const double want = std::exp((std::log(3.0 / 4) + std::log(2.0 / 3) + std::log(1.0 / 2) + std::log(1e-9)) / 4);
    EXPECT_NEAR(bleu(pairs), want, 1e-9);
    EXPECT_NEAR(bleu(pairs), oracle::bleu(plain(pairs)), 1e-15);
}

TEST(Bleu, BrevityPenalty) {
    std::vector<EvalPair> pairs{{{"a", "b"}, {"a", "b", "c", "d"}, {}}};
    EXPECT_NEAR(bleu(pairs, 1), std::exp(-1.0), 1e-15);
}

TEST(Bleu, EdgeCases) {
    EXPECT_THROW(bleu({}), MetricsError);
    std::vector<EvalPair> empty_hyp{{{}, {"a"}, {}}};
    EXPECT_EQ(bleu(empty_hyp), 0.0);
    EXPECT_THROW(bleu(empty_hyp, 0), MetricsError);
}

TEST(Bleu, MatchesOracleAndRange) {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 300; ++trial) {
        auto pairs = random_pairs(rng, 1 + rng() % 6);
        const double b = bleu(pairs);
        EXPECT_NEAR(b, oracle::bleu(plain(pairs)), 1e-12);
        EXPECT_GE(b, 0.0);
        EXPECT_LE(b, 1.0);
        EXPECT_GE(bleu(pairs, 1) + 1e-12, b);
    }
}

TEST(Rouge, HandExamples) {
    std::vector<EvalPair> swap{{{"a", "b"}, {"b", "a"}, {}}};
    auto r = rouge(swap);
    EXPECT_EQ(r.rouge1_f, 1.0);
    EXPECT_EQ(r.rouge2_f, 0.0);
    EXPECT_EQ(r.rougeL_f, 0.5);

    std::vector<EvalPair> same{{{"x", "y", "z"}, {"x", "y", "z"}, {}}};
    r = rouge(same);
    EXPECT_EQ(r.rouge1_f, 1.0);
    EXPECT_EQ(r.rouge2_f, 1.0);
    EXPECT_EQ(r.rougeL_f, 1.0);

    std::vector<EvalPair> disjoint{{{"p", "q"}, {"r", "s"}, {}}};
    r = rouge(disjoint);
    EXPECT_EQ(r.rouge1_f + r.rouge2_f + r.rougeL_f, 0.0);
    EXPECT_THROW(rouge({}), MetricsError);
}

TEST(Rouge, MatchesOracleAndSerial) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        auto pairs = random_pairs(rng, 1 + rng() % 40);
        double r1 = 0, r2 = 0, rl = 0;
        for (const auto& p : pairs) {
            r1 += oracle::rouge_n(p.hypothesis, p.reference, 1);
            r2 += oracle::rouge_n(p.hypothesis, p.reference, 2);
            rl += oracle::rouge_l(p.hypothesis, p.reference);
        }
        const double n = static_cast<double>(pairs.size());
        auto got = rouge(pairs);
        EXPECT_NEAR(got.rouge1_f, r1 / n, 1e-12);
        EXPECT_NEAR(got.rouge2_f, r2 / n, 1e-12);
        EXPECT_NEAR(got.rougeL_f, rl / n, 1e-12);
        auto serial = rouge_serial(pairs);
        EXPECT_EQ(got.rouge1_f, serial.rouge1_f);
        EXPECT_EQ(got.rouge2_f, serial.rouge2_f);
        EXPECT_EQ(got.rougeL_f, serial.rougeL_f);
    }
}

TEST(Rouge, Rouge1SymmetricUnderSwap) {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 500; ++trial) {
        auto h = fixture::random_query(rng, 5, 10), r = fixture::random_query(rng, 5, 10);
        EXPECT_NEAR(rouge_n_f1(h, r, 1), rouge_n_f1(r, h, 1), 1e-15);
    }
}

TEST(Metrics, PermutationInvariance) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 50; ++trial) {
        auto pairs = random_pairs(rng, 2 + rng() % 10);
        auto shuffled = pairs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_NEAR(bleu(pairs), bleu(shuffled), 1e-12);
        auto a = rouge(pairs), b = rouge(shuffled);
        EXPECT_NEAR(a.rouge1_f, b.rouge1_f, 1e-12);
        EXPECT_NEAR(a.rouge2_f, b.rouge2_f, 1e-12);
        EXPECT_NEAR(a.rougeL_f, b.rougeL_f, 1e-12);
    }
}

TEST(Lcs, Examples) {
    EXPECT_EQ(lcs_length({"a", "b", "c"}, {"a", "b", "c"}), 3u);
    EXPECT_EQ(lcs_length({"a"}, {"b"}), 0u);
    EXPECT_EQ(lcs_length({"a", "b", "c", "d"}, {"b", "d"}), 2u);
    EXPECT_EQ(oracle::lcs_exhaustive({"a", "b", "c", "d"}, {"b", "d"}), 2u);
    EXPECT_EQ(lcs_length({}, {"a"}), 0u);
}

TEST(Lcs, MatchesExhaustiveOracle) {
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 1000; ++trial) {
        auto a = fixture::random_query(rng, 3, 12), b = fixture::random_query(rng, 3, 12);
        ASSERT_EQ(lcs_length(a, b), oracle::lcs_exhaustive(a, b));
    }
}

TEST(Perplexity, Examples) {
    const double l50 = -std::log(50.0);
    std::vector<EvalPair> uniform{{{"a", "b", "c"}, {"x"}, std::vector<double>{l50, l50, l50}},
                                  {{"d"}, {"y"}, std::vector<double>{l50}}};
    EXPECT_NEAR(*perplexity(uniform).value, 50.0, 1e-9);

    std::vector<EvalPair> certain{{{"a", "b"}, {"a"}, std::vector<double>{0.0, 0.0}}};
    EXPECT_EQ(*perplexity(certain).value, 1.0);

    std::vector<EvalPair> pooled{{{"a", "b"}, {"a"}, std::vector<double>{-1, -1}},
                                 {{"a", "b", "c", "d"}, {"a"}, std::vector<double>{-2, -2, -2, -2}}};
    EXPECT_NEAR(*perplexity(pooled).value, std::exp(10.0 / 6.0), 1e-12);
}

TEST(Perplexity, ExclusionAndErrors) {
    std::vector<EvalPair> mixed{{{"a"}, {"a"}, std::nullopt}, {{"b", "c"}, {"b"}, std::vector<double>{-1, -3}}};
    auto p = perplexity(mixed);
    EXPECT_NEAR(*p.value, std::exp(2.0), 1e-12);
    EXPECT_EQ(p.excluded, 1u);

    std::vector<EvalPair> none{{{"a"}, {"a"}, std::nullopt}};
    EXPECT_FALSE(perplexity(none).value);
    EXPECT_EQ(perplexity(none).excluded, 1u);

    std::vector<EvalPair> bad{{{"a"}, {"a"}, std::vector<double>{-1}}, {{"a", "b"}, {"a"}, std::vector<double>{-1}}};
    try {
        perplexity(bad);
        FAIL() << "expected MetricsError";
    } catch (const MetricsError& e) {
        EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
    }
}

TEST(Perplexity, AtLeastOneForNonPositiveLogprobs) {
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> lp(-6.0, 0.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto pairs = random_pairs(rng, 1 + rng() % 5);
        for (auto& p : pairs) {
            std::vector<double> v;
            for (std::size_t i = 0; i < p.hypothesis.size(); ++i) v.push_back(lp(rng));
            p.logprobs = v;
        }
        EXPECT_GE(*perplexity(pairs).value, 1.0);
    }
}

TEST(Evaluate, ReportFields) {
    std::vector<EvalPair> pairs{{{"a", "b"}, {"a", "b"}, std::nullopt}, {{"c"}, {"d"}, std::nullopt}};
    auto r = evaluate(pairs);
    EXPECT_EQ(r.n_pairs, 2u);
    EXPECT_EQ(r.excluded_from_ppl, 2u);
    EXPECT_FALSE(r.perplexity);
    EXPECT_DOUBLE_EQ(r.rougeL_f, 0.5);
    EXPECT_NEAR(r.bleu, oracle::bleu(plain(pairs)), 1e-15);
}
