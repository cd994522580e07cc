#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tremor/errors.hpp"

namespace tremor {

// Binary confusion counts; the positive class is PD throughout.
struct ConfusionMatrix {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }

    bool operator==(const ConfusionMatrix&) const = default;
};

inline void check_binary(std::span<const int> v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0 && v[i] != 1) {
            throw DataError(std::string(name) + "[" + std::to_string(i) +
                            "] is not binary: " + std::to_string(v[i]));
        }
    }
}

inline ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw DataError("confusion: length mismatch (" + std::to_string(y_true.size()) +
                        " vs " + std::to_string(y_pred.size()) + ")");
    }
    if (y_true.empty()) {
        throw DataError("confusion: empty input");
    }
    check_binary(y_true, "y_true");
    check_binary(y_pred, "y_pred");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1) {
            (y_pred[i] == 1 ? cm.tp : cm.fn)++;
        } else {
            (y_pred[i] == 1 ? cm.fp : cm.tn)++;
        }
    }
    return cm;
}

struct BasicMetrics {
    double accuracy = 0.0;
    double tpr = 0.0;
    double ppv = 0.0;
    double f1 = 0.0;
};

// Degenerate denominators follow the conservative convention: ppv = 0 when no
// positive predictions, tpr = 0 when no positive truths, f1 = 0 when both are 0.
inline BasicMetrics basic_metrics(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) {
        throw DataError("basic_metrics: empty confusion matrix");
    }
    BasicMetrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    m.tpr = (cm.tp + cm.fn) > 0
                ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn)
                : 0.0;
    m.ppv = (cm.tp + cm.fp) > 0
                ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp)
                : 0.0;
    m.f1 = (m.ppv + m.tpr) > 0.0 ? 2.0 * m.ppv * m.tpr / (m.ppv + m.tpr) : 0.0;
    return m;
}

struct WeightedMetrics {
    double ppv = 0.0;
    double tpr = 0.0;
    double f1 = 0.0;
};

// Per-class precision/recall/F1 averaged with support weights. The weighted
// recall algebraically collapses to (tp + tn) / n, i.e. to accuracy, and is
// computed in that form so the identity holds exactly.
inline WeightedMetrics weighted_metrics(std::span<const int> y_true,
                                        std::span<const int> y_pred) {
    const ConfusionMatrix cm = confusion(y_true, y_pred);
    const double n = static_cast<double>(cm.total());
    const double n_pos = static_cast<double>(cm.tp + cm.fn);
    const double n_neg = static_cast<double>(cm.tn + cm.fp);

    const double ppv_pos = (cm.tp + cm.fp) > 0
                               ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp)
                               : 0.0;
    const double ppv_neg = (cm.tn + cm.fn) > 0
                               ? static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fn)
                               : 0.0;
    const double tpr_pos = n_pos > 0 ? static_cast<double>(cm.tp) / n_pos : 0.0;
    const double tpr_neg = n_neg > 0 ? static_cast<double>(cm.tn) / n_neg : 0.0;
    const double f1_pos = (ppv_pos + tpr_pos) > 0 ? 2 * ppv_pos * tpr_pos / (ppv_pos + tpr_pos) : 0.0;
    const double f1_neg = (ppv_neg + tpr_neg) > 0 ? 2 * ppv_neg * tpr_neg / (ppv_neg + tpr_neg) : 0.0;

    WeightedMetrics w;
    w.ppv = (n_pos * ppv_pos + n_neg * ppv_neg) / n;
    w.tpr = static_cast<double>(cm.tp + cm.tn) / n;
    w.f1 = (n_pos * f1_pos + n_neg * f1_neg) / n;
    return w;
}

enum class AucTies {
    Strict, // ties contribute 0
    Half,   // ties contribute 1/2
};

// AUC as the fraction of (negative, positive) pairs ranked correctly,
// computed over sorted scores in O(n log n). Must agree with the literal
// pairwise double sum.
inline double auc(std::span<const int> y_true, std::span<const double> scores,
                  AucTies ties = AucTies::Strict) {
    if (y_true.size() != scores.size()) {
        throw DataError("auc: length mismatch");
    }
    check_binary(y_true, "y_true");
    long n_pos = 0;
    long n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) {
            throw DataError("auc: non-finite score at index " + std::to_string(i));
        }
        (y_true[i] == 1 ? n_pos : n_neg)++;
    }
    if (n_pos == 0 || n_neg == 0) {
        throw DataError("auc: both classes must be present");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pairs = 0.0;
    long neg_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long group_pos = 0;
        long group_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (y_true[order[j]] == 1 ? group_pos : group_neg)++;
            ++j;
        }
        pairs += static_cast<double>(group_pos) * static_cast<double>(neg_below);
        if (ties == AucTies::Half) {
            pairs += 0.5 * static_cast<double>(group_pos) * static_cast<double>(group_neg);
        }
        neg_below += group_neg;
        i = j;
    }
    return pairs / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// One evaluated model on one subset; the row format of the result tables.
struct EvalReport {
    std::string model;
    std::string subset;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double ppv = 0.0;
    double tpr = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    double weighted_ppv = 0.0;
    double weighted_tpr = 0.0;
    double weighted_f1 = 0.0;
};

inline EvalReport evaluate_predictions(std::span<const int> y_true,
                                       std::span<const int> y_pred,
                                       std::span<const double> scores,
                                       const std::string& model,
                                       const std::string& subset) {
    EvalReport r;
    r.model = model;
    r.subset = subset;
    r.confusion = confusion(y_true, y_pred);
    const BasicMetrics b = basic_metrics(r.confusion);
    r.accuracy = b.accuracy;
    r.ppv = b.ppv;
    r.tpr = b.tpr;
    r.f1 = b.f1;
    r.auc = auc(y_true, scores);
    const WeightedMetrics w = weighted_metrics(y_true, y_pred);
    r.weighted_ppv = w.ppv;
    r.weighted_tpr = w.tpr;
    r.weighted_f1 = w.f1;
    return r;
}

inline nlohmann::json to_json(const ConfusionMatrix& cm) {
    return {{"TP", cm.tp}, {"FP", cm.fp}, {"TN", cm.tn}, {"FN", cm.fn}};
}

inline ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
    ConfusionMatrix cm;
    cm.tp = j.at("TP").get<long>();
    cm.fp = j.at("FP").get<long>();
    cm.tn = j.at("TN").get<long>();
    cm.fn = j.at("FN").get<long>();
    return cm;
}

inline nlohmann::json to_json(const EvalReport& r) {
    return {{"model", r.model},
            {"subset", r.subset},
            {"confusion", to_json(r.confusion)},
            {"accuracy", r.accuracy},
            {"ppv", r.ppv},
            {"tpr", r.tpr},
            {"f1", r.f1},
            {"auc", r.auc},
            {"weighted_ppv", r.weighted_ppv},
            {"weighted_tpr", r.weighted_tpr},
            {"weighted_f1", r.weighted_f1}};
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.model = j.at("model").get<std::string>();
    r.subset = j.at("subset").get<std::string>();
    r.confusion = confusion_from_json(j.at("confusion"));
    r.accuracy = j.at("accuracy").get<double>();
    r.ppv = j.at("ppv").get<double>();
    r.tpr = j.at("tpr").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.auc = j.at("auc").get<double>();
    r.weighted_ppv = j.at("weighted_ppv").get<double>();
    r.weighted_tpr = j.at("weighted_tpr").get<double>();
    r.weighted_f1 = j.at("weighted_f1").get<double>();
    return r;
}

namespace detail {
inline std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}
} // namespace detail

// Markdown result table; column order is part of the report contract.
inline std::string render_eval_table(const std::vector<EvalReport>& rows) {
    std::string out;
    out += "| Algorithm | Accuracy | PPV | TPR | F1-score | AUC |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + r.model + " | " + detail::fixed2(r.accuracy) + " | " +
               detail::fixed2(r.ppv) + " | " + detail::fixed2(r.tpr) + " | " +
               detail::fixed2(r.f1) + " | " + detail::fixed2(r.auc) + " |\n";
    }
    return out;
}

} // namespace tremor
