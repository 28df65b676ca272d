#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tayfcs/combiner.hpp"
#include "tayfcs/data.hpp"
#include "tayfcs/models.hpp"

namespace tayfcs::lre {

// Surrogate training happens in two phases: the original fields are fitted
// jointly first, then frozen while the window features are fitted on the
// residual by full-batch proximal steps. Per-value gradients are
// count-normalized (mean residual over the records carrying the value), so
// the L1 threshold is in residual units: it sits above the finite-sample
// covariance floor but far below any real signal. Features that add nothing
// over the originals keep exactly-zero weights, their shuffle gain is
// exactly 0, and they are evicted.
struct SurrogateConfig {
    models::LrConfig originals;  // phase A: joint GD + L2 over original fields
    // Full-batch normalized polish of the originals after phase A, so the
    // residual the window sees is free of leftover main effects.
    double polish_lr = 0.3;
    size_t polish_iterations = 150;
    double window_lr = 0.5;
    size_t window_iterations = 50;
    double window_l1 = 0.05;
};

struct SelectionConfig {
    int k = 5;                  // combinations to output
    int window_size = 10;       // S_w
    int max_iterations = 1;     // T_iter
    int max_order = 3;          // Od_max, 2 or 3
    double scoring_fraction = 1.0;
    uint64_t tau = combiner::kDefaultTau;
    uint64_t seed = 0;
    SurrogateConfig surrogate;

    void validate() const;
};

struct Candidate {
    combiner::CombinationSpec combo;
    double score = 0.0;
    size_t rank = 0;  // position in the ranked candidate list
};

struct GainRecord {
    Candidate candidate;
    double gain = 0.0;   // Logloss(shuffled) - Logloss(baseline) on validation
    int iteration = 0;
    bool evicted = false;
};

struct GainReport {
    int iteration = 0;
    double baseline_logloss = 0.0;
    std::vector<GainRecord> entries;  // one per window feature
};

struct FeatureWindow {
    std::vector<Candidate> entries;
    size_t cursor = 0;  // next ranked candidate to shift in; never rewinds
    int iteration = 0;

    // Tops the window up to `capacity` from the ranked list.
    void refill(const std::vector<Candidate>& ranked, size_t capacity);
};

struct SelectedEntry {
    Candidate candidate;
    std::optional<double> gain;  // absent when the entry was never measured
};

struct SelectionArtifact {
    std::vector<SelectedEntry> selected;   // original-rank order, at most K
    std::vector<GainRecord> eviction_log;
    std::vector<GainReport> rounds;
    bool truncated = false;  // fewer than K survivors were available
};

// Phase A + phase B surrogate over originals (fields 0..num_original-1 of
// the augmented dataset) plus all appended window columns.
models::LrModel train_surrogate(const data::Dataset& train_aug,
                                size_t num_original_fields,
                                const SurrogateConfig& cfg);

// Validation-Logloss change caused by shuffling one active feature column
// with a seeded permutation, model parameters frozen. Positive means the
// feature is informative.
double shuffle_gain(const models::LrModel& model, const data::Dataset& val_aug,
                    int feature_field_id, uint64_t seed);

// One LRE round: retrain surrogate, measure gains, evict G <= 0, refill.
GainReport lre_iterate(FeatureWindow& window, const std::vector<Candidate>& ranked,
                       const data::Dataset& train_ds, const data::Dataset& val_ds,
                       const SelectionConfig& cfg);

// Runs up to T_iter rounds (stops early when every gain is positive) and
// returns the first K surviving candidates in original importance order.
SelectionArtifact run_lre(const std::vector<Candidate>& ranked,
                          const data::Dataset& train_ds, const data::Dataset& val_ds,
                          const SelectionConfig& cfg);

}  // namespace tayfcs::lre
