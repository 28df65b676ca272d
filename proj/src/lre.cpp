#include "tayfcs/lre.hpp"

#include <algorithm>
#include <cmath>

#include "tayfcs/common.hpp"
#include "tayfcs/eval.hpp"

namespace tayfcs::lre {

void SelectionConfig::validate() const {
    if (k < 1) throw ConfigError("selection: K must be >= 1");
    if (window_size < k) throw ConfigError("selection: window size S_w must be >= K");
    if (max_iterations < 0) throw ConfigError("selection: T_iter must be >= 0");
    if (max_order != 2 && max_order != 3) {
        throw ConfigError("selection: Od_max must be 2 or 3");
    }
    if (!(scoring_fraction > 0.0) || scoring_fraction > 1.0) {
        throw ConfigError("selection: scoring_fraction must be in (0, 1]");
    }
    if (tau == 0 || tau > 0xffffffffULL) throw ConfigError("selection: tau must be in [1, 2^32)");
}

void FeatureWindow::refill(const std::vector<Candidate>& ranked, size_t capacity) {
    while (entries.size() < capacity && cursor < ranked.size()) {
        entries.push_back(ranked[cursor++]);
    }
}

models::LrModel train_surrogate(const data::Dataset& train_aug,
                                size_t num_original_fields,
                                const SurrogateConfig& cfg) {
    if (num_original_fields == 0 || num_original_fields > train_aug.num_fields()) {
        throw DataError("train_surrogate: bad original field count");
    }
    std::vector<int> originals(num_original_fields);
    for (size_t i = 0; i < num_original_fields; ++i) originals[i] = static_cast<int>(i);

    models::LrModel model = models::lr_train(train_aug, originals, cfg.originals);

    const size_t n = train_aug.num_records();

    // Polish the originals with full-batch count-normalized steps: each
    // weight moves by lr times the mean residual over its own records, so
    // per-value optimality gaps shrink geometrically regardless of value
    // frequency.
    {
        std::vector<std::vector<double>> grad_sum(num_original_fields);
        std::vector<std::vector<uint32_t>> counts(num_original_fields);
        for (size_t a = 0; a < num_original_fields; ++a) {
            const size_t card = train_aug.fields[a].cardinality;
            grad_sum[a].assign(card, 0.0);
            counts[a].assign(card, 0);
            for (uint32_t v : train_aug.columns[a]) counts[a][v]++;
        }
        for (size_t iter = 0; iter < cfg.polish_iterations; ++iter) {
            for (auto& g : grad_sum) std::fill(g.begin(), g.end(), 0.0);
            double bias_sum = 0.0;
            for (size_t r = 0; r < n; ++r) {
                double z = model.bias;
                for (size_t a = 0; a < num_original_fields; ++a) {
                    z += model.weights[a][train_aug.columns[a][r]];
                }
                const double residual =
                    sigmoid(z) - static_cast<double>(train_aug.labels[r]);
                bias_sum += residual;
                for (size_t a = 0; a < num_original_fields; ++a) {
                    grad_sum[a][train_aug.columns[a][r]] += residual;
                }
            }
            model.bias -= cfg.polish_lr * bias_sum / static_cast<double>(n);
            for (size_t a = 0; a < num_original_fields; ++a) {
                for (size_t v = 0; v < grad_sum[a].size(); ++v) {
                    if (counts[a][v] == 0) continue;
                    model.weights[a][v] -= cfg.polish_lr * grad_sum[a][v] / counts[a][v];
                }
            }
        }
    }

    const size_t num_window = train_aug.num_fields() - num_original_fields;
    if (num_window == 0) return model;

    std::vector<int> actives = originals;
    for (size_t i = 0; i < num_window; ++i) {
        const int fid = static_cast<int>(num_original_fields + i);
        actives.push_back(fid);
        model.weights.emplace_back(train_aug.fields[static_cast<size_t>(fid)].cardinality,
                                   0.0);
    }
    model.active_fields = actives;
    model.schema_hash = models::active_schema_hash(train_aug, actives);

    // Phase B: window features are fitted greedily in window (importance)
    // order, each on the residual of the originals plus the features fitted
    // before it. A feature whose information is already covered upstream
    // sees no systematic residual, never escapes the L1 threshold, and keeps
    // exactly-zero weights. Full-batch proximal steps, deterministic.
    std::vector<double> base_logit(n, model.bias);
    for (size_t a = 0; a < num_original_fields; ++a) {
        const auto& col = train_aug.columns[a];
        for (size_t r = 0; r < n; ++r) base_logit[r] += model.weights[a][col[r]];
    }

    const double threshold = cfg.window_lr * cfg.window_l1;
    std::vector<double> grad_sum;
    std::vector<uint32_t> counts;
    for (size_t w = 0; w < num_window; ++w) {
        const size_t field = num_original_fields + w;
        const auto& col = train_aug.columns[field];
        auto& weights = model.weights[field];
        grad_sum.assign(weights.size(), 0.0);
        counts.assign(weights.size(), 0);
        for (uint32_t v : col) counts[v]++;

        for (size_t iter = 0; iter < cfg.window_iterations; ++iter) {
            std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
            for (size_t r = 0; r < n; ++r) {
                const double z = base_logit[r] + weights[col[r]];
                grad_sum[col[r]] += sigmoid(z) - static_cast<double>(train_aug.labels[r]);
            }
            for (size_t v = 0; v < weights.size(); ++v) {
                if (counts[v] == 0) continue;
                double x = weights[v] - cfg.window_lr * grad_sum[v] / counts[v];
                if (x > threshold) {
                    x -= threshold;
                } else if (x < -threshold) {
                    x += threshold;
                } else {
                    x = 0.0;
                }
                weights[v] = x;
            }
        }
        for (size_t r = 0; r < n; ++r) base_logit[r] += weights[col[r]];
    }
    return model;
}

double shuffle_gain(const models::LrModel& model, const data::Dataset& val_aug,
                    int feature_field_id, uint64_t seed) {
    if (model.position_of(feature_field_id) < 0) {
        throw DataError("shuffle_gain: feature field " + std::to_string(feature_field_id) +
                        " is not active in the surrogate");
    }
    const std::vector<double> baseline = lr_predict(model, val_aug);
    const double baseline_ll = eval::logloss(val_aug.labels, baseline);
    const data::Dataset shuffled = data::shuffle_field(val_aug, feature_field_id, seed);
    const std::vector<double> perturbed = lr_predict(model, shuffled);
    return eval::logloss(val_aug.labels, perturbed) - baseline_ll;
}

namespace {

std::vector<combiner::CombinationSpec> window_combos(const FeatureWindow& window) {
    std::vector<combiner::CombinationSpec> combos;
    combos.reserve(window.entries.size());
    for (const auto& c : window.entries) combos.push_back(c.combo);
    return combos;
}

}  // namespace

GainReport lre_iterate(FeatureWindow& window, const std::vector<Candidate>& ranked,
                       const data::Dataset& train_ds, const data::Dataset& val_ds,
                       const SelectionConfig& cfg) {
    window.iteration++;
    GainReport report;
    report.iteration = window.iteration;
    if (window.entries.empty()) return report;

    const auto combos = window_combos(window);
    const data::Dataset train_aug = combiner::materialize(train_ds, combos, cfg.tau);
    const data::Dataset val_aug = combiner::materialize(val_ds, combos, cfg.tau);
    const size_t num_original = train_ds.num_fields();

    const models::LrModel surrogate =
        train_surrogate(train_aug, num_original, cfg.surrogate);
    report.baseline_logloss =
        eval::logloss(val_aug.labels, lr_predict(surrogate, val_aug));

    for (size_t i = 0; i < window.entries.size(); ++i) {
        const int field_id = static_cast<int>(num_original + i);
        const uint64_t seed = derive_seed(
            cfg.seed, "lre.gain." + std::to_string(window.iteration) + "." +
                          window.entries[i].combo.name);
        GainRecord rec;
        rec.candidate = window.entries[i];
        rec.iteration = window.iteration;
        rec.gain = shuffle_gain(surrogate, val_aug, field_id, seed);
        rec.evicted = rec.gain <= 0.0;
        report.entries.push_back(std::move(rec));
    }

    std::vector<Candidate> survivors;
    for (const auto& rec : report.entries) {
        if (!rec.evicted) survivors.push_back(rec.candidate);
    }
    window.entries = std::move(survivors);
    window.refill(ranked, static_cast<size_t>(cfg.window_size));
    return report;
}

SelectionArtifact run_lre(const std::vector<Candidate>& ranked,
                          const data::Dataset& train_ds, const data::Dataset& val_ds,
                          const SelectionConfig& cfg) {
    cfg.validate();
    if (ranked.size() < static_cast<size_t>(cfg.k)) {
        throw ConfigError("run_lre: ranked list shorter than K");
    }

    FeatureWindow window;
    window.refill(ranked, static_cast<size_t>(cfg.window_size));

    SelectionArtifact artifact;
    std::vector<GainRecord> last_gains;
    for (int t = 0; t < cfg.max_iterations; ++t) {
        GainReport report = lre_iterate(window, ranked, train_ds, val_ds, cfg);
        bool any_evicted = false;
        for (const auto& rec : report.entries) {
            if (rec.evicted) {
                any_evicted = true;
                artifact.eviction_log.push_back(rec);
            }
        }
        last_gains = report.entries;
        artifact.rounds.push_back(std::move(report));
        if (!any_evicted) break;
    }

    std::vector<SelectedEntry> survivors;
    for (const auto& cand : window.entries) {
        SelectedEntry entry;
        entry.candidate = cand;
        for (const auto& rec : last_gains) {
            if (rec.candidate.combo == cand.combo) {
                entry.gain = rec.gain;
                break;
            }
        }
        survivors.push_back(std::move(entry));
    }
    std::sort(survivors.begin(), survivors.end(),
              [](const SelectedEntry& a, const SelectedEntry& b) {
                  return a.candidate.rank < b.candidate.rank;
              });
    if (survivors.size() > static_cast<size_t>(cfg.k)) {
        survivors.resize(static_cast<size_t>(cfg.k));
    } else if (survivors.size() < static_cast<size_t>(cfg.k)) {
        artifact.truncated = true;
    }
    artifact.selected = std::move(survivors);
    return artifact;
}

}  // namespace tayfcs::lre
