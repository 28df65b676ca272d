#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tayfcs/data.hpp"
#include "tayfcs/nn_core.hpp"

namespace tayfcs::models {

struct DnnConfig {
    size_t embed_dim = 16;
    std::vector<size_t> hidden_dims = {64, 64};
    nn::TrainConfig train;
};

struct DnnModel {
    std::vector<int> active_fields;  // dataset field ids, table order
    nn::Net net;
    uint64_t schema_hash = 0;  // over the active fields' schemas
};

DnnModel train_dnn(const data::Dataset& train_ds, const data::Dataset& val_ds,
                   std::vector<int> active_fields, const DnnConfig& cfg,
                   nn::TrainResult* history = nullptr);

// One probability per record. The dataset must contain every active field
// with a matching schema; extra (inactive) columns are ignored.
std::vector<double> dnn_predict(const DnnModel& model, const data::Dataset& ds,
                                int threads = 1);

struct LrConfig {
    double lr = 0.1;
    size_t epochs = 5;
    size_t batch_size = 512;
    double l2 = 1e-6;
    uint64_t seed = 0;
};

// Sparse one-hot linear model: one scalar weight per categorical value.
struct LrModel {
    double bias = 0.0;
    std::vector<int> active_fields;
    std::vector<std::vector<double>> weights;  // per active field, by value index
    uint64_t schema_hash = 0;

    int position_of(int field_id) const;  // -1 when inactive
};

// Joint mini-batch gradient descent on BCE with L2 (applied per batch to the
// weights the batch touches).
LrModel lr_train(const data::Dataset& train_ds, const std::vector<int>& active_fields,
                 const LrConfig& cfg);

std::vector<double> lr_predict(const LrModel& model, const data::Dataset& ds);

// Stable digest of all parameters; used to prove the surrogate stays frozen
// across gain measurements.
uint64_t lr_params_checksum(const LrModel& model);

// Checkpoint container, binary, round-trips bit-exactly.
// Layout (little-endian): magic "TAYFCKPT", u32 version, u8 kind,
// u64 schema_hash, then the kind-specific sections (all array lengths are
// u64 counts followed by raw f64/u32 payloads).
void save_dnn(const DnnModel& model, const std::string& path);
DnnModel load_dnn(const std::string& path);
void save_lr(const LrModel& model, const std::string& path);
LrModel load_lr(const std::string& path);

uint64_t active_schema_hash(const data::Dataset& ds, const std::vector<int>& active_fields);

}  // namespace tayfcs::models
