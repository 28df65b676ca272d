#include "tayfcs/nn_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <thread>

#include "tayfcs/common.hpp"
#include "tayfcs/eval.hpp"

namespace tayfcs::nn {

namespace {

void xavier_fill(std::vector<double>& w, size_t fan_in, size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : w) x = (2.0 * rng.next_unit() - 1.0) * a;
}

}  // namespace

Net make_net(const std::vector<uint32_t>& cardinalities, size_t embed_dim,
             const std::vector<size_t>& hidden_dims, uint64_t seed) {
    if (embed_dim == 0) throw ConfigError("embed_dim must be >= 1");
    if (cardinalities.empty()) throw ConfigError("net needs at least one field");

    Net net;
    net.embed_dim = embed_dim;
    Rng rng(derive_seed(seed, "nn.init"));

    for (uint32_t card : cardinalities) {
        if (card < 2) throw ConfigError("field cardinality must be >= 2");
        EmbeddingTable t;
        t.cardinality = card;
        t.dim = embed_dim;
        t.w.resize(static_cast<size_t>(card) * embed_dim);
        xavier_fill(t.w, card, embed_dim, rng);
        net.tables.push_back(std::move(t));
    }

    size_t in = net.input_dim();
    for (size_t h : hidden_dims) {
        if (h == 0) throw ConfigError("hidden layer width must be >= 1");
        DenseLayer layer;
        layer.in = in;
        layer.out = h;
        layer.w.resize(h * in);
        layer.b.assign(h, 0.0);
        xavier_fill(layer.w, in, h, rng);
        net.layers.push_back(std::move(layer));
        in = h;
    }
    DenseLayer out_layer;
    out_layer.in = in;
    out_layer.out = 1;
    out_layer.w.resize(in);
    out_layer.b.assign(1, 0.0);
    xavier_fill(out_layer.w, in, 1, rng);
    net.layers.push_back(std::move(out_layer));
    return net;
}

std::vector<TensorRef> parameters(Net& net) {
    std::vector<TensorRef> refs;
    for (auto& t : net.tables) refs.push_back({t.w.data(), t.w.size()});
    for (auto& l : net.layers) {
        refs.push_back({l.w.data(), l.w.size()});
        refs.push_back({l.b.data(), l.b.size()});
    }
    return refs;
}

void Gradients::zero() {
    for (auto& t : tensors) std::fill(t.begin(), t.end(), 0.0);
}

Gradients make_gradients(const Net& net) {
    Gradients g;
    for (const auto& t : net.tables) g.tensors.emplace_back(t.w.size(), 0.0);
    for (const auto& l : net.layers) {
        g.tensors.emplace_back(l.w.size(), 0.0);
        g.tensors.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

void forward(const Net& net, const data::Dataset& ds,
             const std::vector<int>& active_fields,
             std::span<const size_t> record_ids, ForwardCache& cache) {
    const size_t F = net.num_fields();
    if (active_fields.size() != F) {
        throw DataError("forward: active field count does not match net");
    }
    const size_t d = net.embed_dim;
    const size_t in_dim = net.input_dim();
    const size_t B = record_ids.size();

    cache.batch = B;
    cache.values.resize(B * F);
    cache.input.resize(B * in_dim);
    cache.acts.assign(net.layers.size() > 0 ? net.layers.size() - 1 : 0, {});
    cache.logits.resize(B);
    cache.probs.resize(B);

    for (size_t f = 0; f < F; ++f) {
        const auto& col = ds.column(active_fields[f]);
        const auto& table = net.tables[f];
        for (size_t r = 0; r < B; ++r) {
            const uint32_t v = col[record_ids[r]];
            if (v >= table.cardinality) {
                throw DataError("forward: value index out of range for field " +
                                ds.fields[static_cast<size_t>(active_fields[f])].name);
            }
            cache.values[r * F + f] = v;
            std::memcpy(cache.input.data() + r * in_dim + f * d, table.row(v),
                        d * sizeof(double));
        }
    }

    const double* prev = cache.input.data();
    size_t prev_dim = in_dim;
    for (size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        const bool last = (l + 1 == net.layers.size());
        std::vector<double>* out = nullptr;
        if (!last) {
            cache.acts[l].assign(B * layer.out, 0.0);
            out = &cache.acts[l];
        }
        for (size_t r = 0; r < B; ++r) {
            const double* x = prev + r * prev_dim;
            for (size_t o = 0; o < layer.out; ++o) {
                const double* wrow = layer.w.data() + o * layer.in;
                double z = layer.b[o];
                for (size_t i = 0; i < layer.in; ++i) z += wrow[i] * x[i];
                if (last) {
                    cache.logits[r] = z;
                } else {
                    (*out)[r * layer.out + o] = z > 0.0 ? z : 0.0;
                }
            }
        }
        if (!last) {
            prev = out->data();
            prev_dim = layer.out;
        }
    }
    for (size_t r = 0; r < B; ++r) cache.probs[r] = sigmoid(cache.logits[r]);
}

double bce_loss(std::span<const double> probs, std::span<const uint8_t> labels) {
    if (probs.size() != labels.size()) {
        throw DataError("bce_loss: length mismatch");
    }
    if (probs.empty()) throw DataError("bce_loss: empty batch");
    double sum = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], eval::kProbEps, 1.0 - eval::kProbEps);
        sum += labels[i] != 0 ? -std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(probs.size());
}

std::vector<double> loss_logit_deltas(const ForwardCache& cache,
                                      std::span<const uint8_t> labels) {
    if (labels.size() != cache.batch) {
        throw DataError("loss_logit_deltas: label count mismatch");
    }
    std::vector<double> deltas(cache.batch);
    for (size_t r = 0; r < cache.batch; ++r) {
        const double p = cache.probs[r];
        // Inside the clamp the loss is flat in the logit.
        if (p < eval::kProbEps || p > 1.0 - eval::kProbEps) {
            deltas[r] = 0.0;
        } else {
            deltas[r] = p - static_cast<double>(labels[r]);
        }
    }
    return deltas;
}

namespace {

// Shared backprop core: per-record logit deltas in, per-record input
// gradients out, optional mean-scaled parameter gradients.
void backprop(const Net& net, const ForwardCache& cache,
              std::span<const double> deltas, Gradients* param_grads,
              GradientTape* tape) {
    const size_t B = cache.batch;
    const size_t F = net.num_fields();
    const size_t d = net.embed_dim;
    const size_t L = net.layers.size();
    const double inv_b = B > 0 ? 1.0 / static_cast<double>(B) : 0.0;

    // g holds dL_r/dz for the current layer, per record.
    std::vector<double> g(B);
    for (size_t r = 0; r < B; ++r) g[r] = deltas[r];
    std::vector<double> g_prev;

    const size_t table_tensors = net.tables.size();
    for (size_t li = L; li-- > 0;) {
        const auto& layer = net.layers[li];
        const double* below =
            li == 0 ? cache.input.data() : cache.acts[li - 1].data();
        const size_t below_dim = layer.in;

        if (param_grads != nullptr) {
            auto& gw = param_grads->tensors[table_tensors + 2 * li];
            auto& gb = param_grads->tensors[table_tensors + 2 * li + 1];
            for (size_t r = 0; r < B; ++r) {
                const double* x = below + r * below_dim;
                for (size_t o = 0; o < layer.out; ++o) {
                    const double go = g[r * layer.out + o] * inv_b;
                    if (go == 0.0) continue;
                    double* grow = gw.data() + o * layer.in;
                    for (size_t i = 0; i < layer.in; ++i) grow[i] += go * x[i];
                    gb[o] += go;
                }
            }
        }

        g_prev.assign(B * below_dim, 0.0);
        for (size_t r = 0; r < B; ++r) {
            double* gp = g_prev.data() + r * below_dim;
            const double* x = below + r * below_dim;
            for (size_t o = 0; o < layer.out; ++o) {
                const double go = g[r * layer.out + o];
                if (go == 0.0) continue;
                const double* wrow = layer.w.data() + o * layer.in;
                for (size_t i = 0; i < layer.in; ++i) gp[i] += go * wrow[i];
            }
            if (li > 0) {
                for (size_t i = 0; i < below_dim; ++i) {
                    if (x[i] <= 0.0) gp[i] = 0.0;  // ReLU mask
                }
            }
        }
        g.swap(g_prev);
    }

    // g now holds per-record input gradients (batch x F*d).
    if (tape != nullptr) {
        tape->batch = B;
        tape->num_fields = F;
        tape->dim = d;
        tape->g.assign(B * F * d, 0.0);
        std::memcpy(tape->g.data(), g.data(), B * F * d * sizeof(double));
    }
    if (param_grads != nullptr) {
        for (size_t f = 0; f < F; ++f) {
            auto& gt = param_grads->tensors[f];
            for (size_t r = 0; r < B; ++r) {
                const uint32_t v = cache.values[r * F + f];
                double* grow = gt.data() + static_cast<size_t>(v) * d;
                const double* src = g.data() + r * F * d + f * d;
                for (size_t k = 0; k < d; ++k) grow[k] += inv_b * src[k];
            }
        }
    }
    net.backward_passes++;
}

}  // namespace

void backward(const Net& net, const ForwardCache& cache,
              std::span<const uint8_t> labels, Gradients* param_grads,
              GradientTape* tape) {
    const std::vector<double> deltas = loss_logit_deltas(cache, labels);
    backprop(net, cache, deltas, param_grads, tape);
}

void backward_to_inputs(const Net& net, const ForwardCache& cache,
                        std::span<const double> logit_deltas, GradientTape& tape) {
    if (logit_deltas.size() != cache.batch) {
        throw DataError("backward_to_inputs: delta count mismatch");
    }
    backprop(net, cache, logit_deltas, nullptr, &tape);
}

double mlp_logit(const Net& net, std::span<const double> input) {
    if (input.size() != net.input_dim()) {
        throw DataError("mlp_logit: input dimension mismatch");
    }
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        const bool last = (l + 1 == net.layers.size());
        next.assign(layer.out, 0.0);
        for (size_t o = 0; o < layer.out; ++o) {
            const double* wrow = layer.w.data() + o * layer.in;
            double z = layer.b[o];
            for (size_t i = 0; i < layer.in; ++i) z += wrow[i] * cur[i];
            next[o] = (!last && z < 0.0) ? 0.0 : z;
        }
        cur.swap(next);
    }
    return cur[0];
}

double loss_from_logit(double logit, uint8_t label) {
    const double p = std::clamp(sigmoid(logit), eval::kProbEps, 1.0 - eval::kProbEps);
    return label != 0 ? -std::log(p) : -std::log(1.0 - p);
}

AdamState make_adam(const Net& net, const AdamConfig& cfg) {
    AdamState st;
    st.cfg = cfg;
    for (const auto& ref : parameters(const_cast<Net&>(net))) {
        st.m.emplace_back(ref.size, 0.0);
        st.v.emplace_back(ref.size, 0.0);
    }
    return st;
}

void adam_step(Net& net, const Gradients& grads, AdamState& state) {
    auto refs = parameters(net);
    if (grads.tensors.size() != refs.size() || state.m.size() != refs.size()) {
        throw ConfigError("adam_step: gradient/state shape mismatch");
    }
    state.step++;
    const auto& c = state.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (size_t t = 0; t < refs.size(); ++t) {
        if (grads.tensors[t].size() != refs[t].size) {
            throw ConfigError("adam_step: tensor shape mismatch");
        }
        double* p = refs[t].ptr;
        const double* g = grads.tensors[t].data();
        double* m = state.m[t].data();
        double* v = state.v[t].data();
        for (size_t i = 0; i < refs[t].size; ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

namespace {

std::vector<double> snapshot(Net& net) {
    std::vector<double> snap;
    for (const auto& ref : parameters(net)) {
        snap.insert(snap.end(), ref.ptr, ref.ptr + ref.size);
    }
    return snap;
}

void restore(Net& net, const std::vector<double>& snap) {
    size_t off = 0;
    for (const auto& ref : parameters(net)) {
        std::copy(snap.begin() + static_cast<ptrdiff_t>(off),
                  snap.begin() + static_cast<ptrdiff_t>(off + ref.size), ref.ptr);
        off += ref.size;
    }
}

}  // namespace

TrainResult train(Net& net, const data::Dataset& train_ds,
                  const data::Dataset& val_ds,
                  const std::vector<int>& active_fields, const TrainConfig& cfg) {
    if (train_ds.num_records() == 0) throw DataError("train: empty training set");
    if (cfg.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");

    const size_t n = train_ds.num_records();
    Gradients grads = make_gradients(net);
    AdamState adam = make_adam(net, cfg.adam);
    ForwardCache cache;

    TrainResult result;
    double best_metric = -1e300;
    std::vector<double> best_params = snapshot(net);
    size_t non_improving = 0;

    std::vector<uint8_t> batch_labels;
    for (size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, "nn.epoch." + std::to_string(epoch)));
        std::vector<size_t> order = rng.permutation(n);

        double loss_sum = 0.0;
        for (size_t start = 0; start < n; start += cfg.batch_size) {
            const size_t count = std::min(cfg.batch_size, n - start);
            std::span<const size_t> ids(order.data() + start, count);
            forward(net, train_ds, active_fields, ids, cache);
            batch_labels.resize(count);
            for (size_t r = 0; r < count; ++r) batch_labels[r] = train_ds.labels[ids[r]];
            loss_sum += bce_loss(cache.probs, batch_labels) * static_cast<double>(count);
            grads.zero();
            backward(net, cache, batch_labels, &grads, nullptr);
            adam_step(net, grads, adam);
        }
        const double train_loss = loss_sum / static_cast<double>(n);

        const std::vector<double> val_probs = predict(net, val_ds, active_fields);
        const double val_auc = eval::auc(val_ds.labels, val_probs);
        const double val_logloss = eval::logloss(val_ds.labels, val_probs);
        const double metric = val_auc - val_logloss;
        if (!std::isfinite(train_loss) || !std::isfinite(metric)) {
            throw NumericError("train: non-finite loss or validation metric at epoch " +
                               std::to_string(epoch));
        }
        result.history.push_back({epoch, train_loss, val_auc, val_logloss, metric});

        if (metric > best_metric) {
            best_metric = metric;
            result.best_epoch = epoch;
            best_params = snapshot(net);
            non_improving = 0;
        } else {
            if (++non_improving >= cfg.patience) break;
        }
    }
    restore(net, best_params);
    result.best_metric = best_metric;
    return result;
}

std::vector<double> predict(const Net& net, const data::Dataset& ds,
                            const std::vector<int>& active_fields,
                            size_t batch_size, int threads) {
    const size_t n = ds.num_records();
    std::vector<double> probs(n);
    std::vector<size_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = i;

    auto run_range = [&](size_t lo, size_t hi) {
        ForwardCache cache;
        for (size_t start = lo; start < hi; start += batch_size) {
            const size_t count = std::min(batch_size, hi - start);
            forward(net, ds, active_fields, {ids.data() + start, count}, cache);
            std::copy(cache.probs.begin(), cache.probs.end(),
                      probs.begin() + static_cast<ptrdiff_t>(start));
        }
    };

    if (threads <= 1 || n < 2 * batch_size) {
        run_range(0, n);
    } else {
        const size_t workers = std::min<size_t>(static_cast<size_t>(threads), 8);
        const size_t chunk = (n + workers - 1) / workers;
        std::vector<std::thread> pool;
        for (size_t w = 0; w < workers; ++w) {
            const size_t lo = w * chunk;
            const size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    return probs;
}

}  // namespace tayfcs::nn
