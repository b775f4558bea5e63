#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lorag/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Iterative retrieval-augmented generation engine"};
    app.require_subcommand(1);

    std::string corpus, index_dir;
    auto* ingest = app.add_subcommand("ingest", "Build a BM25 index from a JSONL corpus");
    ingest->add_option("--corpus", corpus, "JSONL corpus file")->required();
    ingest->add_option("--index", index_dir, "Index directory to write")->required();

    lorag::RunOverrides run_flags;
    std::string query;
    auto* run = app.add_subcommand("run", "Run the refinement loop for one query");
    run->add_option("--index", run_flags.index_dir, "Index directory");
    run->add_option("--query", query, "Query text")->required();
    run->add_option("--config", run_flags.config, "JSON config file");
    run->add_option("--max-iters", run_flags.max_iters, "Refinement iterations T");
    run->add_option("--epsilon", run_flags.epsilon, "Convergence threshold");
    run->add_option("--k", run_flags.k, "Passages per retrieval");
    run->add_option("--w-y", run_flags.w_y, "Weight of the output in joint retrieval");
    run->add_option("--backend", run_flags.backend, "stub, remote or toy-policy");
    run->add_option("--endpoint", run_flags.endpoint, "Remote completion URL");
    run->add_option("--seed", run_flags.seed, "Seed");
    run->add_option("--out", run_flags.output_dir, "Output directory");

    lorag::RunOverrides eval_flags;
    std::string dataset;
    auto* eval = app.add_subcommand("eval", "Run the loop over a dataset and score it");
    eval->add_option("--index", eval_flags.index_dir, "Index directory");
    eval->add_option("--dataset", dataset, "JSONL with query and reference")->required();
    eval->add_option("--config", eval_flags.config, "JSON config file");
    eval->add_option("--out", eval_flags.output_dir, "Output directory");

    std::string task;
    lorag::TrainOverrides train;
    std::optional<std::string> train_out;
    auto* train_toy = app.add_subcommand("train-toy", "Train the toy policy with REINFORCE");
    train_toy->add_option("--task", task, "Task JSON")->required();
    train_toy->add_option("--steps", train.steps, "Gradient steps");
    train_toy->add_option("--lr", train.lr, "Learning rate");
    train_toy->add_option("--episodes", train.episodes, "Episodes per step");
    train_toy->add_option("--seed", train.seed, "Seed");
    train_toy->add_option("--out", train_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return lorag::cmd_ingest(corpus, index_dir, std::cout, std::cerr);
        if (*run) return lorag::cmd_run(query, lorag::resolve_run_config(run_flags), std::cout, std::cerr);
        if (*eval) return lorag::cmd_eval(dataset, lorag::resolve_run_config(eval_flags), std::cout, std::cerr);
        if (*train_toy) {
            if (train_out) train.output_dir = *train_out;
            return lorag::cmd_train_toy(task, train, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "lorag: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
