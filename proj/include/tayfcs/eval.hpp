#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tayfcs::eval {

// AUC / Logloss deltas of at least this size count as a noteworthy change.
inline constexpr double kNoteworthyDelta = 0.001;

// Probability clamp applied before taking logs.
inline constexpr double kProbEps = 1e-7;

// Rank-based AUC (Mann-Whitney), ties credited 1/2 via average ranks.
// Throws DataError when labels are single-class.
double auc(const std::vector<uint8_t>& labels, const std::vector<double>& scores);

// Mean binary cross-entropy over the batch, scores clamped to
// [kProbEps, 1 - kProbEps].
double logloss(const std::vector<uint8_t>& labels, const std::vector<double>& scores);

// Relative AUC improvement over a baseline, in percent:
//   ((auc_method - 0.5) / (auc_base - 0.5) - 1) * 100
// Throws DataError when auc_base <= 0.5.
double rel_imp(double auc_method, double auc_base);

struct MetricsReport {
    double auc = 0.0;
    double logloss = 0.0;
    std::optional<double> rel_imp_pct;    // vs. baseline, when one was given
    std::optional<double> baseline_auc;
    bool noteworthy = false;              // |auc - baseline_auc| >= kNoteworthyDelta
    size_t record_count = 0;
    std::string model_id;
    std::string split_tag;
};

MetricsReport evaluate(const std::vector<uint8_t>& labels,
                       const std::vector<double>& scores,
                       const std::string& model_id,
                       const std::string& split_tag,
                       const MetricsReport* baseline = nullptr);

}  // namespace tayfcs::eval
