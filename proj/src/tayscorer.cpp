#include "tayfcs/tayscorer.hpp"

#include <algorithm>
#include <cmath>

#include "tayfcs/common.hpp"
#include "tayfcs/nn_core.hpp"

namespace tayfcs::tayscorer {

ExpansionPoint compute_expansion_point(const models::DnnModel& model,
                                       const data::Dataset& scoring,
                                       ExpansionMode mode) {
    const size_t F = model.net.num_fields();
    const size_t d = model.net.embed_dim;
    ExpansionPoint point;
    point.embed_dim = d;
    point.x0.assign(F, std::vector<double>(d, 0.0));

    if (mode == ExpansionMode::VocabMean) {
        for (size_t f = 0; f < F; ++f) {
            const auto& table = model.net.tables[f];
            for (uint32_t v = 0; v < table.cardinality; ++v) {
                const double* row = table.row(v);
                for (size_t k = 0; k < d; ++k) point.x0[f][k] += row[k];
            }
            const double inv = 1.0 / static_cast<double>(table.cardinality);
            for (size_t k = 0; k < d; ++k) point.x0[f][k] *= inv;
        }
        return point;
    }

    const size_t n = scoring.num_records();
    if (n == 0) throw DataError("compute_expansion_point: empty scoring dataset");
    for (size_t f = 0; f < F; ++f) {
        const auto& col = scoring.column(model.active_fields[f]);
        const auto& table = model.net.tables[f];
        for (size_t r = 0; r < n; ++r) {
            const double* row = table.row(col[r]);
            for (size_t k = 0; k < d; ++k) point.x0[f][k] += row[k];
        }
        const double inv = 1.0 / static_cast<double>(n);
        for (size_t k = 0; k < d; ++k) point.x0[f][k] *= inv;
    }
    return point;
}

SignalMatrix field_signals(const models::DnnModel& model, const ExpansionPoint& x0,
                           const data::Dataset& scoring, size_t batch_size,
                           SignalSource source) {
    if (batch_size < 1) throw ConfigError("field_signals: batch_size must be >= 1");
    const size_t F = model.net.num_fields();
    const size_t d = model.net.embed_dim;
    if (x0.x0.size() != F || x0.embed_dim != d) {
        throw DataError("field_signals: expansion point does not match model");
    }
    const size_t n = scoring.num_records();

    SignalMatrix sig;
    sig.num_records = n;
    sig.num_fields = F;
    sig.field_ids = model.active_fields;
    sig.s.assign(n * F, 0.0);

    std::vector<size_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = i;

    nn::ForwardCache cache;
    nn::GradientTape tape;
    std::vector<uint8_t> labels;
    std::vector<double> deltas;
    for (size_t start = 0; start < n; start += batch_size) {
        const size_t count = std::min(batch_size, n - start);
        nn::forward(model.net, scoring, model.active_fields, {ids.data() + start, count},
                    cache);
        if (source == SignalSource::Loss) {
            labels.resize(count);
            for (size_t r = 0; r < count; ++r) labels[r] = scoring.labels[start + r];
            deltas = nn::loss_logit_deltas(cache, labels);
        } else {
            deltas.assign(count, 1.0);
        }
        nn::backward_to_inputs(model.net, cache, deltas, tape);

        const size_t in_dim = F * d;
        for (size_t r = 0; r < count; ++r) {
            const double* emb = cache.input.data() + r * in_dim;
            for (size_t f = 0; f < F; ++f) {
                const double* grad = tape.row(r, f);
                const double* e = emb + f * d;
                const double* ref = x0.x0[f].data();
                double dot = 0.0;
                for (size_t k = 0; k < d; ++k) dot += grad[k] * (e[k] - ref[k]);
                sig.s[(start + r) * F + f] = dot;
            }
        }
    }
    return sig;
}

std::vector<ComboScore> score_order2(const SignalMatrix& signals) {
    const size_t F = signals.num_fields;
    const size_t n = signals.num_records;
    if (n == 0) throw DataError("score_order2: no signal records");

    std::vector<ComboScore> out;
    out.reserve(F * (F - 1) / 2);
    for (size_t i = 0; i < F; ++i) {
        for (size_t j = i + 1; j < F; ++j) {
            double sum = 0.0;
            for (size_t r = 0; r < n; ++r) {
                sum += std::abs(signals.at(r, i) * signals.at(r, j));
            }
            ComboScore cs;
            cs.fields = {signals.field_ids[i], signals.field_ids[j]};
            cs.score = sum / static_cast<double>(n);
            out.push_back(std::move(cs));
        }
    }
    return out;
}

std::vector<ComboScore> score_order3(const SignalMatrix& signals) {
    const size_t F = signals.num_fields;
    const size_t n = signals.num_records;
    if (n == 0) throw DataError("score_order3: no signal records");

    std::vector<ComboScore> out;
    if (F < 3) return out;
    out.reserve(F * (F - 1) * (F - 2) / 6);
    for (size_t i = 0; i < F; ++i) {
        for (size_t j = i + 1; j < F; ++j) {
            for (size_t k = j + 1; k < F; ++k) {
                double sum = 0.0;
                for (size_t r = 0; r < n; ++r) {
                    sum += std::abs(signals.at(r, i) * signals.at(r, j) * signals.at(r, k));
                }
                ComboScore cs;
                cs.fields = {signals.field_ids[i], signals.field_ids[j],
                             signals.field_ids[k]};
                cs.score = sum / static_cast<double>(n);
                out.push_back(std::move(cs));
            }
        }
    }
    return out;
}

std::vector<ComboScore> rank_combinations(std::vector<ComboScore> order2,
                                          std::vector<ComboScore> order3) {
    std::vector<ComboScore> merged = std::move(order2);
    merged.insert(merged.end(), std::make_move_iterator(order3.begin()),
                  std::make_move_iterator(order3.end()));
    std::sort(merged.begin(), merged.end(), [](const ComboScore& a, const ComboScore& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.order() != b.order()) return a.order() < b.order();
        return a.fields < b.fields;
    });
    return merged;
}

double exact_importance_oracle(const models::DnnModel& model, const ExpansionPoint& x0,
                               const data::Dataset& scoring,
                               const std::vector<int>& combo_fields, double h,
                               SignalSource source) {
    const size_t F = model.net.num_fields();
    const size_t d = model.net.embed_dim;
    if (F > 8 || d > 4) {
        throw ConfigError("exact_importance_oracle: tiny models only (F <= 8, d <= 4)");
    }
    const size_t k = combo_fields.size();
    if (k < 2 || k > 3) {
        throw ConfigError("exact_importance_oracle: order must be 2 or 3");
    }

    // Map dataset field ids to model table positions.
    std::vector<size_t> pos(k);
    for (size_t i = 0; i < k; ++i) {
        auto it = std::find(model.active_fields.begin(), model.active_fields.end(),
                            combo_fields[i]);
        if (it == model.active_fields.end()) {
            throw DataError("exact_importance_oracle: field not active in model");
        }
        pos[i] = static_cast<size_t>(it - model.active_fields.begin());
    }

    std::vector<double> base(F * d);
    for (size_t f = 0; f < F; ++f) {
        std::copy(x0.x0[f].begin(), x0.x0[f].end(), base.begin() + static_cast<ptrdiff_t>(f * d));
    }

    const size_t n = scoring.num_records();
    if (n == 0) throw DataError("exact_importance_oracle: empty scoring dataset");

    std::vector<double> input(F * d);
    std::vector<double> u(k * d);
    double sum = 0.0;
    const double denom = std::pow(2.0 * h, static_cast<double>(k));
    for (size_t r = 0; r < n; ++r) {
        for (size_t i = 0; i < k; ++i) {
            const auto& table = model.net.tables[pos[i]];
            const uint32_t v = scoring.column(model.active_fields[pos[i]])[r];
            const double* row = table.row(v);
            for (size_t c = 0; c < d; ++c) u[i * d + c] = row[c] - x0.x0[pos[i]][c];
        }
        // Signed stencil over the +-h corners gives the mixed directional
        // derivative contracted with the deviation vectors.
        double term = 0.0;
        for (size_t mask = 0; mask < (size_t{1} << k); ++mask) {
            input = base;
            double sign = 1.0;
            for (size_t i = 0; i < k; ++i) {
                const double s = (mask >> i) & 1 ? 1.0 : -1.0;
                sign *= s;
                double* slot = input.data() + pos[i] * d;
                for (size_t c = 0; c < d; ++c) slot[c] += s * h * u[i * d + c];
            }
            const double logit = nn::mlp_logit(model.net, input);
            const double value = source == SignalSource::Loss
                                     ? nn::loss_from_logit(logit, scoring.labels[r])
                                     : logit;
            term += sign * value;
        }
        sum += std::abs(term / denom);
    }
    return sum / static_cast<double>(n);
}

}  // namespace tayfcs::tayscorer
