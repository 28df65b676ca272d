#pragma once

#include <cstdint>
#include <vector>

#include "tayfcs/data.hpp"
#include "tayfcs/models.hpp"

namespace tayfcs::tayscorer {

// Which per-record function the gradient signals differentiate.
enum class SignalSource { Loss, Logit };

// How the expansion point is formed: frequency-weighted mean of the
// embeddings seen in the scoring data, or the unweighted mean of all
// embedding-table rows.
enum class ExpansionMode { DataMean, VocabMean };

struct ExpansionPoint {
    size_t embed_dim = 0;
    std::vector<std::vector<double>> x0;  // per model field (table order), length d
};

ExpansionPoint compute_expansion_point(const models::DnnModel& model,
                                       const data::Dataset& scoring,
                                       ExpansionMode mode = ExpansionMode::DataMean);

// Per-record scalar signals s[r][i] = J_i . (e_i - x0_i): the record's
// gradient w.r.t. field i's embedding input dotted with the embedding's
// deviation from the expansion point.
struct SignalMatrix {
    size_t num_records = 0;
    size_t num_fields = 0;
    std::vector<int> field_ids;  // dataset field ids, column order
    std::vector<double> s;       // num_records x num_fields

    double at(size_t record, size_t field) const {
        return s[record * num_fields + field];
    }
};

// One backward pass per batch, independent of how many combinations will be
// scored afterwards (net.backward_passes counts them).
SignalMatrix field_signals(const models::DnnModel& model, const ExpansionPoint& x0,
                           const data::Dataset& scoring, size_t batch_size = 8192,
                           SignalSource source = SignalSource::Loss);

struct ComboScore {
    std::vector<int> fields;  // strictly increasing dataset field ids
    double score = 0.0;

    int order() const { return static_cast<int>(fields.size()); }
};

// score(i,j) = mean over records of |s_i * s_j|, for all C(F,2) pairs.
std::vector<ComboScore> score_order2(const SignalMatrix& signals);

// score(i,j,k) = mean over records of |s_i * s_j * s_k|, all C(F,3) triples.
// Only strictly increasing (distinct-field) triples are combinations; the
// diagonal Taylor terms involve repeated fields and are not emitted.
std::vector<ComboScore> score_order3(const SignalMatrix& signals);

// Merged descending by score; ties broken by lower order first, then
// lexicographic field tuple.
std::vector<ComboScore> rank_combinations(std::vector<ComboScore> order2,
                                          std::vector<ComboScore> order3);

// Exact mixed directional derivative at the expansion point, by nested
// central differences over embedding inputs, averaged as
// mean_r |D^k L_r(x0)[u_1..u_k]| with u_i = e_i - x0_i. Tiny models only.
double exact_importance_oracle(const models::DnnModel& model, const ExpansionPoint& x0,
                               const data::Dataset& scoring,
                               const std::vector<int>& combo_fields, double h = 1e-3,
                               SignalSource source = SignalSource::Loss);

}  // namespace tayfcs::tayscorer
