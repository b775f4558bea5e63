#include "lorag/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "lorag/metrics.hpp"
#include "lorag/random.hpp"

namespace fs = std::filesystem;

namespace lorag {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Writes to a sibling temp file and renames, so a reader never sees a
// half-written artifact.
void write_file(const fs::path& path, const std::string& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << data;
        out.flush();
        if (!out) throw Error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

void check_keys(const ojson& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
}

std::size_t get_count(const ojson& j, const std::string& name) {
    if (!j.is_number_unsigned()) throw ConfigError(name + " must be a non-negative integer");
    return j.get<std::size_t>();
}

double get_real(const ojson& j, const std::string& name) {
    if (!j.is_number()) throw ConfigError(name + " must be a number");
    return j.get<double>();
}

std::string get_string(const ojson& j, const std::string& name) {
    if (!j.is_string()) throw ConfigError(name + " must be a string");
    return j.get<std::string>();
}

std::string fmt_real(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
}

}  // namespace

RunConfig default_run_config() {
    RunConfig cfg;
    if (const char* env = std::getenv("LORAG_ENDPOINT"); env && *env) cfg.generator.endpoint_url = env;
    return cfg;
}

void apply_config_json(RunConfig& cfg, const ojson& j) {
    check_keys(j, {"index_dir", "generator", "loop", "bm25", "seed", "output_dir"}, "");
    if (j.contains("index_dir")) cfg.index_dir = get_string(j["index_dir"], "index_dir");
    if (j.contains("output_dir")) cfg.output_dir = get_string(j["output_dir"], "output_dir");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("generator")) {
        const ojson& g = j["generator"];
        check_keys(g, {"backend", "max_tokens", "temperature", "top_sentences", "endpoint_url", "policy_path"},
                   "generator");
        if (g.contains("backend"))
            cfg.generator.backend = backend_from_string(get_string(g["backend"], "generator.backend"));
        if (g.contains("max_tokens")) cfg.generator.max_tokens = get_count(g["max_tokens"], "generator.max_tokens");
        if (g.contains("temperature")) cfg.generator.temperature = get_real(g["temperature"], "generator.temperature");
        if (g.contains("top_sentences"))
            cfg.generator.top_sentences = get_count(g["top_sentences"], "generator.top_sentences");
        if (g.contains("endpoint_url"))
            cfg.generator.endpoint_url = get_string(g["endpoint_url"], "generator.endpoint_url");
        if (g.contains("policy_path")) cfg.policy_path = get_string(g["policy_path"], "generator.policy_path");
    }
    if (j.contains("loop")) {
        const ojson& l = j["loop"];
        check_keys(l, {"max_iters", "epsilon", "k", "w_y"}, "loop");
        if (l.contains("max_iters")) cfg.loop.max_iters = get_count(l["max_iters"], "loop.max_iters");
        if (l.contains("epsilon")) cfg.loop.epsilon = get_real(l["epsilon"], "loop.epsilon");
        if (l.contains("k")) cfg.loop.k = get_count(l["k"], "loop.k");
        if (l.contains("w_y")) cfg.loop.w_y = get_real(l["w_y"], "loop.w_y");
    }
    if (j.contains("bm25")) {
        const ojson& b = j["bm25"];
        check_keys(b, {"k1", "b"}, "bm25");
        if (b.contains("k1")) cfg.bm25.k1 = get_real(b["k1"], "bm25.k1");
        if (b.contains("b")) cfg.bm25.b = get_real(b["b"], "bm25.b");
    }
}

void apply_config_file(RunConfig& cfg, const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ConfigError("invalid config " + path.string() + ": " + e.what());
    }
    apply_config_json(cfg, j);
}

RunConfig resolve_run_config(const RunOverrides& f) {
    RunConfig cfg = default_run_config();
    if (!f.config.empty()) apply_config_file(cfg, f.config);
    if (f.index_dir) cfg.index_dir = *f.index_dir;
    if (f.output_dir) cfg.output_dir = *f.output_dir;
    if (f.max_iters) cfg.loop.max_iters = *f.max_iters;
    if (f.epsilon) cfg.loop.epsilon = *f.epsilon;
    if (f.k) cfg.loop.k = *f.k;
    if (f.w_y) cfg.loop.w_y = *f.w_y;
    if (f.backend) cfg.generator.backend = backend_from_string(*f.backend);
    if (f.endpoint) cfg.generator.endpoint_url = *f.endpoint;
    if (f.seed) cfg.seed = *f.seed;
    return cfg;
}

ojson to_json(const RunConfig& cfg) {
    ojson g;
    g["backend"] = to_string(cfg.generator.backend);
    g["max_tokens"] = cfg.generator.max_tokens;
    g["temperature"] = cfg.generator.temperature;
    g["top_sentences"] = cfg.generator.top_sentences;
    // Only the backend-relevant location goes in, so e.g. an unrelated
    // LORAG_ENDPOINT does not change a stub run's artifacts.
    if (cfg.generator.backend == Backend::kRemote) g["endpoint_url"] = cfg.generator.endpoint_url;
    if (cfg.generator.backend == Backend::kToyPolicy) g["policy_path"] = cfg.policy_path.generic_string();
    ojson l;
    l["max_iters"] = cfg.loop.max_iters;
    l["epsilon"] = cfg.loop.epsilon;
    l["k"] = cfg.loop.k;
    l["w_y"] = cfg.loop.w_y;
    ojson b;
    b["k1"] = cfg.bm25.k1;
    b["b"] = cfg.bm25.b;
    ojson j;
    j["index_dir"] = cfg.index_dir.generic_string();
    j["generator"] = std::move(g);
    j["loop"] = std::move(l);
    j["bm25"] = std::move(b);
    j["seed"] = cfg.seed;
    return j;
}

std::string transcript_filename(const std::string& query, const RunConfig& cfg) {
    std::string key = query;
    key += '\n';
    key += to_json(cfg).dump();
    return "transcript-" + sha256_hex(key).substr(0, 16) + ".json";
}

int cmd_ingest(const fs::path& corpus_path, const fs::path& index_dir, std::ostream& out, std::ostream& err) {
    try {
        Index index = Index::build(ingest(corpus_path));
        index.save(index_dir);
        out << "documents: " << index.doc_count() << "\n";
        out << "terms: " << index.term_count() << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "ingest: " << e.what() << "\n";
        return 1;
    }
}

namespace {

std::unique_ptr<Generator> generator_for(const RunConfig& cfg) {
    std::optional<PolicyParams> policy;
    if (cfg.generator.backend == Backend::kToyPolicy) {
        if (cfg.policy_path.empty()) throw ConfigError("toy-policy backend requires generator.policy_path");
        policy = load_policy(cfg.policy_path);
    }
    return make_generator(cfg.generator, std::move(policy));
}

void validate_run_config(const RunConfig& cfg) {
    if (cfg.index_dir.empty()) throw ConfigError("index_dir is required");
    cfg.generator.validate();
    cfg.loop.validate();
    if (!(cfg.bm25.k1 >= 0.0) || !(cfg.bm25.b >= 0.0 && cfg.bm25.b <= 1.0)) {
        throw ConfigError("bm25 needs k1 >= 0 and b in [0, 1]");
    }
}

std::string transcript_document(const LoopTranscript& t, const RunConfig& cfg) {
    ojson j = to_json(t);
    j["config"] = to_json(cfg);
    return j.dump(2) + "\n";
}

}  // namespace

int cmd_run(const std::string& query, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::unique_ptr<Index> index;
    std::unique_ptr<Generator> gen;
    try {
        validate_run_config(cfg);
        index = std::make_unique<Index>(Index::load(cfg.index_dir));
        gen = generator_for(cfg);
    } catch (const std::exception& e) {
        err << "run: " << e.what() << "\n";
        return 1;
    }
    const fs::path path = cfg.output_dir / transcript_filename(query, cfg);
    Bm25Retriever retriever(*index, cfg.bm25);
    try {
        LoopTranscript t = run_loop(Query::from_text(query), retriever, *gen, cfg.loop, cfg.seed);
        write_file(path, transcript_document(t, cfg));
        out << "final: " << t.final.text << "\n";
        out << "stop_reason: " << to_string(t.stop_reason) << "\n";
        out << "transcript: " << path.string() << "\n";
        return 0;
    } catch (const LoopError& e) {
        err << "run: " << e.what() << "\n";
        fs::path partial = path;
        partial += ".partial";
        try {
            write_file(partial, transcript_document(e.partial(), cfg));
            err << "partial transcript: " << partial.string() << "\n";
        } catch (const std::exception& w) {
            err << "run: " << w.what() << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        err << "run: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const fs::path& dataset_path, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    struct Line {
        std::size_t number = 0;  // 1-based line in the file
        std::optional<std::string> query;
        std::string reference;
    };
    std::vector<Line> lines;
    std::unique_ptr<Index> index;
    std::unique_ptr<Generator> gen;
    try {
        validate_run_config(cfg);
        std::istringstream in(read_file(dataset_path));
        std::string raw;
        for (std::size_t n = 1; std::getline(in, raw); ++n) {
            if (is_blank(raw)) continue;
            Line line;
            line.number = n;
            try {
                auto j = ojson::parse(raw);
                line.query = j.at("query").get<std::string>();
                line.reference = j.at("reference").get<std::string>();
            } catch (const ojson::exception& e) {
                err << "eval: " << dataset_path.string() << ":" << n << ": " << e.what() << "\n";
                line.query.reset();
            }
            lines.push_back(std::move(line));
        }
        if (lines.empty()) throw Error("dataset " + dataset_path.string() + " has no entries");
        index = std::make_unique<Index>(Index::load(cfg.index_dir));
        gen = generator_for(cfg);
    } catch (const std::exception& e) {
        err << "eval: " << e.what() << "\n";
        return 1;
    }

    Bm25Retriever retriever(*index, cfg.bm25);
    std::vector<std::optional<EvalPair>> results(lines.size());
    std::vector<std::string> errors(lines.size());
    const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const Line& line = lines[static_cast<std::size_t>(i)];
        if (!line.query) continue;
        try {
            LoopTranscript t = run_loop(Query::from_text(*line.query), retriever, *gen, cfg.loop,
                                        derive_seed(cfg.seed, line.number));
            EvalPair pair{tokenize(t.final.text), tokenize(line.reference), std::nullopt};
            if (t.final.has_logprobs() && t.final.step_tokens() == pair.hypothesis) {
                std::vector<double> lp;
                for (const auto& s : t.final.steps) lp.push_back(*s.logprob);
                pair.logprobs = std::move(lp);
            }
            results[static_cast<std::size_t>(i)] = std::move(pair);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }

    std::vector<EvalPair> pairs;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (results[i]) {
            pairs.push_back(std::move(*results[i]));
        } else {
            ++failed;
            if (!errors[i].empty()) err << "eval: line " << lines[i].number << ": " << errors[i] << "\n";
        }
    }
    if (pairs.empty()) {
        err << "eval: all " << lines.size() << " lines failed\n";
        return 1;
    }
    try {
        MetricsReport report = evaluate(pairs);
        ojson j = to_json(report);
        j["failed"] = failed;
        j["config"] = to_json(cfg);
        write_file(cfg.output_dir / "metrics.json", j.dump(2) + "\n");
        out << "bleu=" << fmt_real(report.bleu) << " rougeL=" << fmt_real(report.rougeL_f)
            << " ppl=" << (report.perplexity ? fmt_real(*report.perplexity) : std::string("absent")) << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "eval: " << e.what() << "\n";
        return 1;
    }
}

ToyTask parse_toy_task(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::parse_error& e) {
        throw ConfigError(std::string("invalid task JSON: ") + e.what());
    }
    check_keys(j, {"vocab", "query", "context", "reward", "reference", "shift", "max_tokens", "steps", "lr",
                   "episodes_per_step", "seed"},
               "task");
    if (!j.contains("vocab") || !j["vocab"].is_array()) throw ConfigError("task needs a 'vocab' array");
    std::vector<std::string> vocab;
    for (const auto& v : j["vocab"]) vocab.push_back(get_string(v, "task.vocab[]"));

    ToyTask task{RlTask{}, PolicyParams(std::move(vocab)), 200, 0.5, 64, 0};
    task.initial.validate();
    if (j.contains("query")) task.task.x = tokenize(get_string(j["query"], "task.query"));
    if (j.contains("context")) {
        if (!j["context"].is_array()) throw ConfigError("task.context must be an array of strings");
        std::size_t i = 0;
        for (const auto& c : j["context"]) {
            Document doc{"ctx" + std::to_string(i++), get_string(c, "task.context[]"), {}};
            task.task.context.passages.push_back(Passage{doc.id, 1.0, split_sentences(doc)});
        }
        task.task.context.k = task.task.context.passages.size();
    }
    if (j.contains("reward")) {
        try {
            task.task.reward.kind = reward_kind_from_string(get_string(j["reward"], "task.reward"));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("reference")) task.task.reward.reference = tokenize(get_string(j["reference"], "task.reference"));
    if (j.contains("shift")) task.task.reward.shift = get_real(j["shift"], "task.shift");
    if (j.contains("max_tokens")) task.task.max_tokens = get_count(j["max_tokens"], "task.max_tokens");
    if (j.contains("steps")) task.steps = get_count(j["steps"], "task.steps");
    if (j.contains("lr")) task.lr = get_real(j["lr"], "task.lr");
    if (j.contains("episodes_per_step")) task.episodes_per_step = get_count(j["episodes_per_step"], "task.episodes_per_step");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("task.seed must be a non-negative integer");
        task.seed = j["seed"].get<std::uint64_t>();
    }
    try {
        task.task.reward.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (task.task.max_tokens < 1) throw ConfigError("task.max_tokens must be at least 1");
    return task;
}

ToyTask load_toy_task(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return parse_toy_task(text);
}

int cmd_train_toy(const fs::path& task_path, const TrainOverrides& overrides, std::ostream& out,
                  std::ostream& err) {
    try {
        ToyTask task = load_toy_task(task_path);
        if (overrides.steps) task.steps = *overrides.steps;
        if (overrides.lr) task.lr = *overrides.lr;
        if (overrides.episodes) task.episodes_per_step = *overrides.episodes;
        if (overrides.seed) task.seed = *overrides.seed;
        if (task.steps < 1) throw ConfigError("steps must be at least 1");
        if (task.episodes_per_step < 1) throw ConfigError("episodes must be at least 1");
        if (!std::isfinite(task.lr) || task.lr < 0.0) throw ConfigError("lr must be a finite non-negative number");

        TrainResult result = train_toy(task.initial, task.task, task.steps, task.lr, task.episodes_per_step, task.seed);

        auto checkpoint = nlohmann::json::parse(policy_to_json(result.policy));
        nlohmann::json training;
        training["steps"] = task.steps;
        training["lr"] = task.lr;
        training["episodes_per_step"] = task.episodes_per_step;
        training["seed"] = task.seed;
        training["max_tokens"] = task.task.max_tokens;
        training["reward"] = to_string(task.task.reward.kind);
        checkpoint["training"] = std::move(training);
        write_file(overrides.output_dir / "policy.json", checkpoint.dump(2) + "\n");
        write_file(overrides.output_dir / "reward_curve.csv", reward_curve_csv(result.reward_curve));

        auto windows = window_means(result.reward_curve, 20);
        out << "first_window_mean=" << fmt_real(windows.front()) << " last_window_mean=" << fmt_real(windows.back())
            << "\n";
        return 0;
    } catch (const TrainingError& e) {
        err << "train-toy: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "train-toy: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace lorag
