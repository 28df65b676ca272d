#pragma once

#include <array>
#include <optional>
#include <string>

#include "tayfcs/data.hpp"
#include "tayfcs/lre.hpp"
#include "tayfcs/models.hpp"
#include "tayfcs/tayscorer.hpp"

namespace tayfcs::pipeline {

struct PipelineConfig {
    // data
    std::string csv_path;
    std::string label_column = "label";
    char delimiter = ',';
    std::array<double, 3> ratios = {0.7, 0.2, 0.1};
    uint64_t data_seed = 42;

    // synth subcommand (optional)
    std::optional<data::SyntheticSpec> synth;

    // model
    models::DnnConfig dnn;

    // selection (scorer + LRE)
    lre::SelectionConfig selection;
    tayscorer::SignalSource signal_source = tayscorer::SignalSource::Loss;
    tayscorer::ExpansionMode expansion_mode = tayscorer::ExpansionMode::DataMean;
    size_t scoring_batch = 8192;

    // execution (not part of the semantic hash)
    std::string output_dir = "out";
    int threads = 1;

    void validate() const;
};

PipelineConfig load_config(const std::string& path);

// Hash over everything that affects results; output_dir and threads are
// execution details and excluded, so reruns in different directories produce
// byte-identical artifacts.
std::string config_hash(const PipelineConfig& cfg);

struct StagePaths {
    std::string splits, prepare_meta;
    std::string base_ckpt, base_metrics;
    std::string score_report;
    std::string selection;
    std::string aug_ckpt, final_metrics;
    std::string ledger;

    static StagePaths in(const std::string& out_dir);
};

void stage_synth(const PipelineConfig& cfg);
void stage_prepare(const PipelineConfig& cfg);
void stage_train_base(const PipelineConfig& cfg);
void stage_score(const PipelineConfig& cfg, const std::string& ckpt_override = {});
void stage_select(const PipelineConfig& cfg, const std::string& report_override = {});
void stage_augment(const PipelineConfig& cfg, const std::string& selection_override = {});

// Runs every stage in order, reusing artifacts whose recorded config hash and
// upstream checksums already match (so an interrupted run resumes).
void run_pipeline(const PipelineConfig& cfg);

}  // namespace tayfcs::pipeline
