#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "tayfcs/common.hpp"
#include "tayfcs/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string checkpoint;
    std::string score_report;
    std::string selection;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

tayfcs::pipeline::PipelineConfig resolve(const CliOptions& opts) {
    auto cfg = tayfcs::pipeline::load_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.threads > 0) cfg.threads = opts.threads;
    if (opts.seed_set) {
        cfg.data_seed = tayfcs::derive_seed(opts.seed, "cli.data");
        cfg.dnn.train.seed = tayfcs::derive_seed(opts.seed, "cli.model");
        cfg.selection.seed = tayfcs::derive_seed(opts.seed, "cli.selection");
        cfg.selection.surrogate.originals.seed = tayfcs::derive_seed(opts.seed, "cli.surrogate");
        if (cfg.synth) cfg.synth->seed = tayfcs::derive_seed(opts.seed, "cli.synth");
    }
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Pipeline config file (JSON)")
        ->required();
    cmd->add_option("--out", opts.out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "Master seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "Worker threads for prediction");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TayFCS: Taylor-expansion feature combination selection for deep recommenders"};
    app.require_subcommand(1);

    CliOptions opts;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic CSV from the config's synth block");
    CLI::App* prepare = app.add_subcommand("prepare", "Load CSV, split, build vocabularies, encode");
    CLI::App* train_base = app.add_subcommand("train-base", "Train the base DNN on original fields");
    CLI::App* score = app.add_subcommand("score", "Rank all order-2/3 field combinations");
    CLI::App* select = app.add_subcommand("select", "Run LRE redundancy elimination");
    CLI::App* augment = app.add_subcommand("augment", "Materialize selections, retrain, evaluate");
    CLI::App* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage in order");
    for (CLI::App* cmd : {synth, prepare, train_base, score, select, augment, pipeline_cmd}) {
        add_common(cmd, opts);
    }
    score->add_option("--checkpoint", opts.checkpoint, "Model checkpoint to score with");
    select->add_option("--scores", opts.score_report, "Score report to select from");
    augment->add_option("--selection", opts.selection, "Selection artifact to materialize");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = resolve(opts);
        if (synth->parsed()) {
            tayfcs::pipeline::stage_synth(cfg);
            std::printf("synth: wrote %s\n", cfg.csv_path.c_str());
        } else if (prepare->parsed()) {
            tayfcs::pipeline::stage_prepare(cfg);
            std::printf("prepare: wrote splits to %s\n", cfg.output_dir.c_str());
        } else if (train_base->parsed()) {
            tayfcs::pipeline::stage_train_base(cfg);
            std::printf("train-base: checkpoint + metrics in %s\n", cfg.output_dir.c_str());
        } else if (score->parsed()) {
            tayfcs::pipeline::stage_score(cfg, opts.checkpoint);
            std::printf("score: report in %s\n", cfg.output_dir.c_str());
        } else if (select->parsed()) {
            tayfcs::pipeline::stage_select(cfg, opts.score_report);
            std::printf("select: artifact in %s\n", cfg.output_dir.c_str());
        } else if (augment->parsed()) {
            tayfcs::pipeline::stage_augment(cfg, opts.selection);
            std::printf("augment: final metrics in %s\n", cfg.output_dir.c_str());
        } else if (pipeline_cmd->parsed()) {
            tayfcs::pipeline::run_pipeline(cfg);
            std::printf("pipeline: complete, artifacts in %s\n", cfg.output_dir.c_str());
        }
    } catch (const tayfcs::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const tayfcs::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const tayfcs::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
