#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "lorag/generator.hpp"
#include "lorag/loop.hpp"
#include "lorag/retrieval.hpp"
#include "lorag/rl.hpp"
#include "lorag/serialize.hpp"

namespace lorag {

struct RunConfig {
    std::filesystem::path index_dir;
    GeneratorConfig generator;
    std::filesystem::path policy_path;  // toy-policy checkpoint
    LoopConfig loop;
    Bm25Params bm25;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
};

/// Built-in defaults; LORAG_ENDPOINT, when set, supplies the endpoint URL.
RunConfig default_run_config();

/// Overlays the keys present in `j` (same names as RunConfig, nested
/// `generator`, `loop` and `bm25` objects). Unknown keys are rejected.
void apply_config_json(RunConfig& cfg, const ojson& j);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Command-line values; unset fields fall through to the config file, then
/// to the defaults.
struct RunOverrides {
    std::filesystem::path config;
    std::optional<std::filesystem::path> index_dir;
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::size_t> max_iters;
    std::optional<double> epsilon;
    std::optional<std::size_t> k;
    std::optional<double> w_y;
    std::optional<std::string> backend;
    std::optional<std::string> endpoint;
    std::optional<std::uint64_t> seed;
};

RunConfig resolve_run_config(const RunOverrides& flags);

/// Effective configuration as embedded in output artifacts. output_dir is
/// left out so relocating a run does not change its artifacts.
ojson to_json(const RunConfig& cfg);

/// Transcript file name for (query, config): transcript-<sha256[:16]>.json.
std::string transcript_filename(const std::string& query, const RunConfig& cfg);

int cmd_ingest(const std::filesystem::path& corpus_path, const std::filesystem::path& index_dir,
               std::ostream& out, std::ostream& err);

int cmd_run(const std::string& query, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Dataset: JSONL with `query` and `reference`. Writes <output_dir>/metrics.json.
int cmd_eval(const std::filesystem::path& dataset_path, const RunConfig& cfg, std::ostream& out,
             std::ostream& err);

/// Task fixture for train-toy (JSON):
///   {"vocab": [...], "query": str, "context": [str, ...],
///    "reward": "grounding-overlap" | "terminal-rouge", "reference": str,
///    "shift": number (added to every per-step reward),
///    "max_tokens": int, "steps": int, "lr": number,
///    "episodes_per_step": int, "seed": int}
/// Only `vocab` is required. Each context string becomes one passage.
struct ToyTask {
    RlTask task;
    PolicyParams initial;
    std::size_t steps = 200;
    double lr = 0.5;
    std::size_t episodes_per_step = 64;
    std::uint64_t seed = 0;
};

ToyTask load_toy_task(const std::filesystem::path& path);
ToyTask parse_toy_task(const std::string& text);

struct TrainOverrides {
    std::optional<std::size_t> steps;
    std::optional<double> lr;
    std::optional<std::size_t> episodes;
    std::optional<std::uint64_t> seed;
    std::filesystem::path output_dir = "out";
};

/// Writes <output_dir>/policy.json and <output_dir>/reward_curve.csv.
int cmd_train_toy(const std::filesystem::path& task_path, const TrainOverrides& overrides, std::ostream& out,
                  std::ostream& err);

}  // namespace lorag
