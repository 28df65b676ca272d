#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tayfcs/data.hpp"

namespace tayfcs::nn {

struct EmbeddingTable {
    size_t cardinality = 0;
    size_t dim = 0;
    std::vector<double> w;  // cardinality x dim, row-major

    const double* row(uint32_t idx) const { return w.data() + static_cast<size_t>(idx) * dim; }
    double* row(uint32_t idx) { return w.data() + static_cast<size_t>(idx) * dim; }
};

struct DenseLayer {
    size_t in = 0, out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out
};

// Embedding tables (one per active field) + MLP head. Hidden activations are
// ReLU, the final layer is identity and a sigmoid produces the probability.
struct Net {
    std::vector<EmbeddingTable> tables;
    std::vector<DenseLayer> layers;
    size_t embed_dim = 0;

    // Instrumentation: incremented once per backward pass over a batch.
    mutable uint64_t backward_passes = 0;

    size_t num_fields() const { return tables.size(); }
    size_t input_dim() const { return tables.size() * embed_dim; }
};

// Xavier-uniform init for every parameter matrix, zero biases.
Net make_net(const std::vector<uint32_t>& cardinalities, size_t embed_dim,
             const std::vector<size_t>& hidden_dims, uint64_t seed);

// Flat view over all parameter tensors, tables first then layer w/b pairs.
struct TensorRef {
    double* ptr = nullptr;
    size_t size = 0;
};
std::vector<TensorRef> parameters(Net& net);

struct Gradients {
    std::vector<std::vector<double>> tensors;  // parallel to parameters()
    void zero();
};
Gradients make_gradients(const Net& net);

// Per-record gradients of each record's own loss term w.r.t. its per-field
// embedding inputs: batch x F x d.
struct GradientTape {
    size_t batch = 0, num_fields = 0, dim = 0;
    std::vector<double> g;

    const double* row(size_t record, size_t field) const {
        return g.data() + (record * num_fields + field) * dim;
    }
    double* row(size_t record, size_t field) {
        return g.data() + (record * num_fields + field) * dim;
    }
};

struct ForwardCache {
    size_t batch = 0;
    std::vector<uint32_t> values;          // batch x F looked-up indices
    std::vector<double> input;             // batch x (F*d) embedding concat
    std::vector<std::vector<double>> acts; // per hidden layer: batch x out
    std::vector<double> logits;            // batch
    std::vector<double> probs;             // batch
};

// Maps net fields onto dataset columns. active_fields[i] is the dataset
// field backing table i.
void forward(const Net& net, const data::Dataset& ds,
             const std::vector<int>& active_fields,
             std::span<const size_t> record_ids, ForwardCache& cache);

double bce_loss(std::span<const double> probs, std::span<const uint8_t> labels);

// Per-record d(loss)/d(logit), zero where the probability clamp flattens the
// loss. Used by backward(); exposed for the scorer's logit-source variant.
std::vector<double> loss_logit_deltas(const ForwardCache& cache,
                                      std::span<const uint8_t> labels);

// One backpropagation over the batch. Parameter gradients are for the mean
// batch loss; the tape rows are per-record (unscaled) loss gradients.
// Either output may be null. Increments net.backward_passes.
void backward(const Net& net, const ForwardCache& cache,
              std::span<const uint8_t> labels, Gradients* param_grads,
              GradientTape* tape);

// Backward pass with caller-supplied per-record logit deltas, filling only
// the tape. Increments net.backward_passes.
void backward_to_inputs(const Net& net, const ForwardCache& cache,
                        std::span<const double> logit_deltas, GradientTape& tape);

// MLP evaluation from a raw embedding-input vector (used by the
// finite-difference oracle, which perturbs embedding inputs directly).
double mlp_logit(const Net& net, std::span<const double> input);
double loss_from_logit(double logit, uint8_t label);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    uint64_t step = 0;
    std::vector<std::vector<double>> m, v;  // parallel to parameters()
};
AdamState make_adam(const Net& net, const AdamConfig& cfg);

// Standard Adam update with bias correction.
void adam_step(Net& net, const Gradients& grads, AdamState& state);

struct TrainConfig {
    size_t max_epochs = 100;
    size_t batch_size = 10000;
    AdamConfig adam;
    uint64_t seed = 0;
    size_t patience = 2;  // consecutive non-improving val epochs before stopping
};

struct EpochStats {
    size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_auc = 0.0;
    double val_logloss = 0.0;
    double val_metric = 0.0;  // AUC - Logloss
};

struct TrainResult {
    std::vector<EpochStats> history;
    size_t best_epoch = 0;
    double best_metric = 0.0;
};

// Seeded-shuffle mini-batch training, early stop on (AUC - Logloss) over the
// validation split. Leaves the net at the best epoch's parameters.
TrainResult train(Net& net, const data::Dataset& train_ds,
                  const data::Dataset& val_ds,
                  const std::vector<int>& active_fields, const TrainConfig& cfg);

std::vector<double> predict(const Net& net, const data::Dataset& ds,
                            const std::vector<int>& active_fields,
                            size_t batch_size = 8192, int threads = 1);

}  // namespace tayfcs::nn
