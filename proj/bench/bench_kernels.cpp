// Serial references against their OpenMP counterparts.
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "lorag/metrics.hpp"
#include "lorag/retrieval.hpp"
#include "lorag/rl.hpp"

namespace {

using namespace lorag;

Index make_index(std::size_t docs) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> len(20, 200), word(0, 4999);
    Corpus c;
    for (std::size_t d = 0; d < docs; ++d) {
        std::string text;
        for (int i = len(rng); i > 0; --i) text += "w" + std::to_string(word(rng)) + " ";
        c.add({"doc" + std::to_string(d), text, {}});
    }
    return Index::build(std::move(c));
}

const Index& shared_index() {
    static const Index idx = make_index(20000);
    return idx;
}

const TokenSeq kQuery{"w1", "w17", "w256", "w999", "w4000", "w12", "w3141"};

void BM_ScoreSerial(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(score_documents_serial(shared_index(), kQuery));
}
void BM_ScoreParallel(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(score_documents(shared_index(), kQuery));
}

RlTask rl_task() {
    Document doc{"d1", "a b c stays here. d e follows.", {}};
    RlTask t;
    t.x = tokenize("which letters");
    t.context.k = 1;
    t.context.passages.push_back({doc.id, 1.0, split_sentences(doc)});
    t.reward.kind = RewardKind::kGroundingOverlap;
    t.max_tokens = 8;
    return t;
}

void BM_ReinforceSerial(benchmark::State& s) {
    PolicyParams p({"a", "b", "c", "d", "e", "f"});
    const auto task = rl_task();
    for (auto _ : s) benchmark::DoNotOptimize(reinforce_gradient_serial(p, task, 4096, 3));
}
void BM_ReinforceParallel(benchmark::State& s) {
    PolicyParams p({"a", "b", "c", "d", "e", "f"});
    const auto task = rl_task();
    for (auto _ : s) benchmark::DoNotOptimize(reinforce_gradient(p, task, 4096, 3));
}

std::vector<EvalPair> eval_pairs() {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> len(50, 150), word(0, 99);
    std::vector<EvalPair> pairs(2000);
    for (auto& p : pairs) {
        for (int i = len(rng); i > 0; --i) p.hypothesis.push_back("w" + std::to_string(word(rng)));
        for (int i = len(rng); i > 0; --i) p.reference.push_back("w" + std::to_string(word(rng)));
    }
    return pairs;
}

void BM_RougeSerial(benchmark::State& s) {
    const auto pairs = eval_pairs();
    for (auto _ : s) benchmark::DoNotOptimize(rouge_serial(pairs));
}
void BM_RougeParallel(benchmark::State& s) {
    const auto pairs = eval_pairs();
    for (auto _ : s) benchmark::DoNotOptimize(rouge(pairs));
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReinforceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReinforceParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RougeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RougeParallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    shared_index();  // build outside the timed region
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
