#include "tayfcs/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "tayfcs/common.hpp"
#include "tayfcs/eval.hpp"

namespace tayfcs::models {

uint64_t active_schema_hash(const data::Dataset& ds, const std::vector<int>& active_fields) {
    std::vector<data::FieldSchema> subset;
    for (int f : active_fields) {
        if (f < 0 || static_cast<size_t>(f) >= ds.fields.size()) {
            throw DataError("active field id " + std::to_string(f) + " missing from dataset");
        }
        subset.push_back(ds.fields[static_cast<size_t>(f)]);
    }
    return data::schema_hash(subset);
}

DnnModel train_dnn(const data::Dataset& train_ds, const data::Dataset& val_ds,
                   std::vector<int> active_fields, const DnnConfig& cfg,
                   nn::TrainResult* history) {
    DnnModel model;
    model.schema_hash = active_schema_hash(train_ds, active_fields);
    if (active_schema_hash(val_ds, active_fields) != model.schema_hash) {
        throw DataError("train_dnn: train/val schema mismatch");
    }
    std::vector<uint32_t> cards;
    for (int f : active_fields) {
        cards.push_back(train_ds.fields[static_cast<size_t>(f)].cardinality);
    }
    model.active_fields = std::move(active_fields);
    model.net = nn::make_net(cards, cfg.embed_dim, cfg.hidden_dims, cfg.train.seed);
    nn::TrainResult result =
        nn::train(model.net, train_ds, val_ds, model.active_fields, cfg.train);
    if (history != nullptr) *history = std::move(result);
    return model;
}

std::vector<double> dnn_predict(const DnnModel& model, const data::Dataset& ds,
                                int threads) {
    if (active_schema_hash(ds, model.active_fields) != model.schema_hash) {
        throw DataError("dnn_predict: dataset schema does not match model");
    }
    return nn::predict(model.net, ds, model.active_fields, 8192, threads);
}

int LrModel::position_of(int field_id) const {
    for (size_t i = 0; i < active_fields.size(); ++i) {
        if (active_fields[i] == field_id) return static_cast<int>(i);
    }
    return -1;
}

LrModel lr_train(const data::Dataset& train_ds, const std::vector<int>& active_fields,
                 const LrConfig& cfg) {
    if (train_ds.num_records() == 0) throw DataError("lr_train: empty dataset");
    if (cfg.batch_size < 1 || cfg.epochs < 1) {
        throw ConfigError("lr_train: epochs and batch_size must be >= 1");
    }

    LrModel model;
    model.active_fields = active_fields;
    model.schema_hash = active_schema_hash(train_ds, active_fields);
    for (int f : active_fields) {
        model.weights.emplace_back(train_ds.fields[static_cast<size_t>(f)].cardinality, 0.0);
    }

    const size_t n = train_ds.num_records();
    const size_t num_active = active_fields.size();
    std::vector<std::pair<uint32_t, uint32_t>> touched;  // (active pos, value idx)

    for (size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, "lr.epoch." + std::to_string(epoch)));
        std::vector<size_t> order = rng.permutation(n);

        for (size_t start = 0; start < n; start += cfg.batch_size) {
            const size_t count = std::min(cfg.batch_size, n - start);
            const double inv_b = 1.0 / static_cast<double>(count);

            // Margins with batch-frozen weights, then sequential updates.
            std::vector<double> grad(count);
            for (size_t r = 0; r < count; ++r) {
                const size_t rec = order[start + r];
                double z = model.bias;
                for (size_t a = 0; a < num_active; ++a) {
                    const uint32_t v =
                        train_ds.columns[static_cast<size_t>(active_fields[a])][rec];
                    z += model.weights[a][v];
                }
                grad[r] = sigmoid(z) - static_cast<double>(train_ds.labels[rec]);
            }
            touched.clear();
            for (size_t r = 0; r < count; ++r) {
                const size_t rec = order[start + r];
                const double step = cfg.lr * grad[r] * inv_b;
                model.bias -= step;
                for (size_t a = 0; a < num_active; ++a) {
                    const uint32_t v =
                        train_ds.columns[static_cast<size_t>(active_fields[a])][rec];
                    model.weights[a][v] -= step;
                    touched.emplace_back(static_cast<uint32_t>(a), v);
                }
            }
            if (cfg.l2 > 0.0) {
                std::sort(touched.begin(), touched.end());
                touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
                const double shrink = 1.0 - cfg.lr * cfg.l2;
                for (const auto& [a, v] : touched) model.weights[a][v] *= shrink;
            }
        }
    }
    return model;
}

std::vector<double> lr_predict(const LrModel& model, const data::Dataset& ds) {
    if (active_schema_hash(ds, model.active_fields) != model.schema_hash) {
        throw DataError("lr_predict: dataset schema does not match model");
    }
    const size_t n = ds.num_records();
    std::vector<double> probs(n);
    for (size_t r = 0; r < n; ++r) {
        double z = model.bias;
        for (size_t a = 0; a < model.active_fields.size(); ++a) {
            const uint32_t v =
                ds.columns[static_cast<size_t>(model.active_fields[a])][r];
            z += model.weights[a][v];
        }
        probs[r] = sigmoid(z);
    }
    return probs;
}

uint64_t lr_params_checksum(const LrModel& model) {
    uint64_t h = stable_hash64(std::bit_cast<uint64_t>(model.bias));
    for (const auto& w : model.weights) {
        for (double x : w) h = stable_hash64(h, std::bit_cast<uint64_t>(x));
    }
    return h;
}

namespace {

constexpr char kMagic[8] = {'T', 'A', 'Y', 'F', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

void put_f64_array(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    for (double x : v) put_f64(out, x);
}

uint32_t get_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
    return v;
}

uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::vector<double> get_f64_array(std::istream& in) {
    std::vector<double> v(get_u64(in));
    for (double& x : v) x = get_f64(in);
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, uint8_t expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw DataError("not a checkpoint file: " + path);
    }
    if (get_u32(in) != kVersion) throw DataError("unsupported checkpoint version: " + path);
    char kind = 0;
    in.read(&kind, 1);
    if (static_cast<uint8_t>(kind) != expected_kind) {
        throw DataError("checkpoint kind mismatch: " + path);
    }
    return in;
}

}  // namespace

void save_dnn(const DnnModel& model, const std::string& path) {
    std::ofstream out = open_out(path);
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    out.put(0);  // kind: dnn
    put_u64(out, model.schema_hash);
    put_u64(out, model.active_fields.size());
    for (int f : model.active_fields) put_u32(out, static_cast<uint32_t>(f));
    put_u64(out, model.net.embed_dim);
    put_u64(out, model.net.tables.size());
    for (const auto& t : model.net.tables) {
        put_u64(out, t.cardinality);
        put_f64_array(out, t.w);
    }
    put_u64(out, model.net.layers.size());
    for (const auto& l : model.net.layers) {
        put_u64(out, l.in);
        put_u64(out, l.out);
        put_f64_array(out, l.w);
        put_f64_array(out, l.b);
    }
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

DnnModel load_dnn(const std::string& path) {
    std::ifstream in = open_in(path, 0);
    DnnModel model;
    model.schema_hash = get_u64(in);
    model.active_fields.resize(get_u64(in));
    for (int& f : model.active_fields) f = static_cast<int>(get_u32(in));
    model.net.embed_dim = get_u64(in);
    model.net.tables.resize(get_u64(in));
    for (auto& t : model.net.tables) {
        t.cardinality = get_u64(in);
        t.dim = model.net.embed_dim;
        t.w = get_f64_array(in);
    }
    model.net.layers.resize(get_u64(in));
    for (auto& l : model.net.layers) {
        l.in = get_u64(in);
        l.out = get_u64(in);
        l.w = get_f64_array(in);
        l.b = get_f64_array(in);
    }
    if (!in) throw DataError("truncated checkpoint: " + path);
    return model;
}

void save_lr(const LrModel& model, const std::string& path) {
    std::ofstream out = open_out(path);
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    out.put(1);  // kind: lr
    put_u64(out, model.schema_hash);
    put_f64(out, model.bias);
    put_u64(out, model.active_fields.size());
    for (int f : model.active_fields) put_u32(out, static_cast<uint32_t>(f));
    for (const auto& w : model.weights) put_f64_array(out, w);
    if (!out) throw DataError("failed writing checkpoint: " + path);
}

LrModel load_lr(const std::string& path) {
    std::ifstream in = open_in(path, 1);
    LrModel model;
    model.schema_hash = get_u64(in);
    model.bias = get_f64(in);
    model.active_fields.resize(get_u64(in));
    for (int& f : model.active_fields) f = static_cast<int>(get_u32(in));
    model.weights.resize(model.active_fields.size());
    for (auto& w : model.weights) w = get_f64_array(in);
    if (!in) throw DataError("truncated checkpoint: " + path);
    return model;
}

}  // namespace tayfcs::models
