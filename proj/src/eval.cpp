#include "tayfcs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tayfcs/common.hpp"

namespace tayfcs::eval {

double auc(const std::vector<uint8_t>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size()) {
        throw DataError("auc: labels/scores length mismatch");
    }
    const size_t n = labels.size();
    size_t positives = 0;
    for (uint8_t y : labels) positives += (y != 0);
    const size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
        throw DataError("auc: undefined for single-class labels");
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups, 1-based.
    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // (i+1 + j) / 2
        for (size_t k = i; k < j; ++k) {
            if (labels[order[k]] != 0) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double m = static_cast<double>(negatives);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * m);
}

double logloss(const std::vector<uint8_t>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size()) {
        throw DataError("logloss: labels/scores length mismatch");
    }
    if (labels.empty()) {
        throw DataError("logloss: empty input");
    }
    double sum = 0.0;
    for (size_t i = 0; i < labels.size(); ++i) {
        const double p = std::clamp(scores[i], kProbEps, 1.0 - kProbEps);
        sum += labels[i] != 0 ? -std::log(p) : -std::log(1.0 - p);
    }
    return sum / static_cast<double>(labels.size());
}

double rel_imp(double auc_method, double auc_base) {
    if (auc_base <= 0.5) {
        throw DataError("rel_imp: baseline AUC must exceed 0.5");
    }
    return ((auc_method - 0.5) / (auc_base - 0.5) - 1.0) * 100.0;
}

MetricsReport evaluate(const std::vector<uint8_t>& labels,
                       const std::vector<double>& scores,
                       const std::string& model_id,
                       const std::string& split_tag,
                       const MetricsReport* baseline) {
    MetricsReport report;
    report.auc = auc(labels, scores);
    report.logloss = logloss(labels, scores);
    report.record_count = labels.size();
    report.model_id = model_id;
    report.split_tag = split_tag;
    if (baseline != nullptr) {
        report.baseline_auc = baseline->auc;
        report.rel_imp_pct = rel_imp(report.auc, baseline->auc);
        report.noteworthy = std::abs(report.auc - baseline->auc) >= kNoteworthyDelta;
    }
    return report;
}

}  // namespace tayfcs::eval
