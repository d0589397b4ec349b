#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "stvs/core/error.hpp"

namespace stvs {

/// Binary classification scores in percent with unstable (1) as the positive
/// class. When a ratio has an empty denominator it is 100 if the matching
/// error count is also zero (nothing to find, nothing wrongly found) and 0
/// otherwise.
struct MetricsReport {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<MetricsReport> folds;  ///< per-fold reports for k-fold runs

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

inline MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    MetricsReport r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.tn = tn;
    const std::size_t total = tp + fp + fn + tn;
    if (total == 0) throw ArgumentError("metrics of an empty prediction set");
    r.accuracy = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total);
    r.precision = tp + fp ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp) : (fp == 0 ? 100.0 : 0.0);
    r.recall = tp + fn ? 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn) : (fn == 0 ? 100.0 : 0.0);
    r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

inline MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.empty()) throw ArgumentError("metrics of an empty prediction set");
    if (predictions.size() != labels.size())
        throw ArgumentError("prediction count " + std::to_string(predictions.size()) + " differs from label count " +
                            std::to_string(labels.size()));
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool p = predictions[i] == 1, y = labels[i] == 1;
        if (p && y) ++tp;
        else if (p) ++fp;
        else if (y) ++fn;
        else ++tn;
    }
    return metrics_from_counts(tp, fp, fn, tn);
}

/// Averages the scores of several reports and sums their confusion counts.
inline MetricsReport average_metrics(const std::vector<MetricsReport>& parts) {
    if (parts.empty()) throw ArgumentError("nothing to average");
    MetricsReport r;
    for (const auto& p : parts) {
        r.tp += p.tp;
        r.fp += p.fp;
        r.fn += p.fn;
        r.tn += p.tn;
        r.accuracy += p.accuracy;
        r.precision += p.precision;
        r.recall += p.recall;
        r.f1 += p.f1;
    }
    const auto n = static_cast<double>(parts.size());
    r.accuracy /= n;
    r.precision /= n;
    r.recall /= n;
    r.f1 /= n;
    r.folds = parts;
    return r;
}

inline nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json j{{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
                     {"tp", r.tp},             {"fp", r.fp},               {"fn", r.fn},         {"tn", r.tn}};
    if (!r.folds.empty()) {
        j["folds"] = nlohmann::json::array();
        for (const auto& f : r.folds) j["folds"].push_back(to_json(f));
    }
    return j;
}

}  // namespace stvs
