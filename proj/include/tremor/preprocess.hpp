#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tremor/dataset.hpp"
#include "tremor/errors.hpp"
#include "tremor/matrix.hpp"
#include "tremor/random.hpp"

namespace tremor {

// Per-feature min/max fitted on training rows only.
struct ScalerParams {
    std::vector<double> x_min;
    std::vector<double> x_max;
    std::vector<std::string> feature_names;

    bool operator==(const ScalerParams&) const = default;
};

inline nlohmann::json to_json(const ScalerParams& p) {
    return {{"x_min", p.x_min}, {"x_max", p.x_max}, {"feature_names", p.feature_names}};
}

inline ScalerParams scaler_from_json(const nlohmann::json& j) {
    ScalerParams p;
    p.x_min = j.at("x_min").get<std::vector<double>>();
    p.x_max = j.at("x_max").get<std::vector<double>>();
    p.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    return p;
}

inline ScalerParams fit_minmax(const LabeledDataset& train) {
    if (train.n() == 0) {
        throw DataError("fit_minmax: empty dataset");
    }
    ScalerParams p;
    p.feature_names = train.feature_names;
    p.x_min.resize(train.p());
    p.x_max.resize(train.p());
    for (std::size_t j = 0; j < train.p(); ++j) {
        double lo = train.X.at(0, j);
        double hi = lo;
        for (std::size_t i = 1; i < train.n(); ++i) {
            lo = std::min(lo, train.X.at(i, j));
            hi = std::max(hi, train.X.at(i, j));
        }
        p.x_min[j] = lo;
        p.x_max[j] = hi;
    }
    return p;
}

// x_norm = (x - x_min) / (x_max - x_min). A constant column maps to 0.
// Values outside the training range are left unclipped.
inline LabeledDataset transform_minmax(const ScalerParams& params, const LabeledDataset& ds) {
    if (params.feature_names != ds.feature_names) {
        throw DataError("transform_minmax: feature names do not match the fitted scaler");
    }
    LabeledDataset out = ds;
    for (std::size_t j = 0; j < ds.p(); ++j) {
        const double lo = params.x_min[j];
        const double range = params.x_max[j] - lo;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            out.X.at(i, j) = range > 0.0 ? (ds.X.at(i, j) - lo) / range : 0.0;
        }
    }
    return out;
}

namespace detail {

// Floor on reachability sums; duplicated points would otherwise divide by zero.
inline constexpr double kLrdFloor = 1e-12;

} // namespace detail

// Local outlier factor with Euclidean distances. The k-distance of a point is
// the distance to its k-th nearest neighbour (self excluded); the
// neighbourhood includes every point tied at that distance. lrd is
// |N| / sum of reachability distances, and LOF is the mean neighbour lrd over
// the point's own lrd, so values near 1 mean inlier.
inline std::vector<double> lof_scores(const Matrix& X, int k) {
    const std::size_t n = X.rows();
    if (k < 1) {
        throw ConfigError("lof_scores: k must be >= 1");
    }
    if (n <= static_cast<std::size_t>(k)) {
        throw DataError("lof_scores: need at least k+1 points, have " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (double v : X.row(i)) {
            if (!std::isfinite(v)) {
                throw DataError("lof_scores: non-finite feature value");
            }
        }
    }

    Matrix dist(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = euclidean_distance(X.row(i), X.row(j));
            dist.at(i, j) = d;
            dist.at(j, i) = d;
        }
    }

    std::vector<double> k_dist(n);
    std::vector<std::vector<std::size_t>> neigh(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> order;
        order.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                order.push_back(j);
            }
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double da = dist.at(i, a);
            const double db = dist.at(i, b);
            return da != db ? da < db : a < b;
        });
        k_dist[i] = dist.at(i, order[static_cast<std::size_t>(k) - 1]);
        for (std::size_t j : order) {
            if (dist.at(i, j) <= k_dist[i]) {
                neigh[i].push_back(j);
            } else {
                break;
            }
        }
    }

    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double reach_sum = 0.0;
        for (std::size_t j : neigh[i]) {
            reach_sum += std::max(k_dist[j], dist.at(i, j));
        }
        lrd[i] = static_cast<double>(neigh[i].size()) / std::max(reach_sum, detail::kLrdFloor);
    }

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ratio_sum = 0.0;
        for (std::size_t j : neigh[i]) {
            ratio_sum += lrd[j] / lrd[i];
        }
        scores[i] = ratio_sum / static_cast<double>(neigh[i].size());
    }
    return scores;
}

struct LofReport {
    int k = 0;
    std::vector<double> scores;
    double threshold = 0.0;
    std::vector<std::size_t> kept_indices;
};

inline nlohmann::json to_json(const LofReport& r) {
    return {{"k", r.k},
            {"scores", r.scores},
            {"threshold", r.threshold},
            {"kept_indices", r.kept_indices}};
}

inline LofReport lof_report_from_json(const nlohmann::json& j) {
    LofReport r;
    r.k = j.at("k").get<int>();
    r.scores = j.at("scores").get<std::vector<double>>();
    r.threshold = j.at("threshold").get<double>();
    r.kept_indices = j.at("kept_indices").get<std::vector<std::size_t>>();
    return r;
}

// Drops training rows whose LOF exceeds the threshold. k is capped at n-1.
// Refuses to empty a class.
inline std::pair<LabeledDataset, LofReport> remove_outliers(const LabeledDataset& train, int k,
                                                            double threshold) {
    if (k < 1) {
        throw ConfigError("remove_outliers: k must be >= 1");
    }
    if (train.n() < 2) {
        throw DataError("remove_outliers: need at least 2 rows");
    }
    const int k_eff = std::min<int>(k, static_cast<int>(train.n()) - 1);

    LofReport report;
    report.k = k_eff;
    report.threshold = threshold;
    report.scores = lof_scores(train.X, k_eff);
    for (std::size_t i = 0; i < report.scores.size(); ++i) {
        if (report.scores[i] <= threshold) {
            report.kept_indices.push_back(i);
        }
    }

    std::size_t kept_pos = 0;
    std::size_t kept_neg = 0;
    for (std::size_t i : report.kept_indices) {
        (train.y[i] == 1 ? kept_pos : kept_neg)++;
    }
    if (kept_pos == 0 || kept_neg == 0) {
        throw DataError("remove_outliers: threshold " + std::to_string(threshold) +
                        " would empty the '" +
                        (kept_pos == 0 ? train.positive_class_name : train.negative_class_name) +
                        "' class");
    }

    return {detail::take_rows(train, report.kept_indices), std::move(report)};
}

struct SmoteConfig {
    int k_neighbors = 5;
    double target_ratio = 1.0; // minority target as a fraction of the majority count
    std::uint64_t seed = 0;
};

// SMOTE: each synthetic minority row is x_i + delta * (x_nn - x_i) for a
// seeded-random minority row, one of its k nearest minority neighbours and
// delta ~ U[0,1). Originals are retained untouched; synthetic rows append at
// the end.
inline LabeledDataset smote(const LabeledDataset& train, const SmoteConfig& cfg) {
    if (cfg.k_neighbors < 1) {
        throw ConfigError("smote: k_neighbors must be >= 1");
    }
    if (!(cfg.target_ratio > 0.0)) {
        throw ConfigError("smote: target_ratio must be positive");
    }
    const std::size_t n_pos = train.count(1);
    const std::size_t n_neg = train.n() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw DataError("smote: both classes must be present");
    }
    if (n_pos == n_neg) {
        return train;
    }
    const int minority_label = n_pos < n_neg ? 1 : 0;
    const std::size_t n_minority = std::min(n_pos, n_neg);
    const std::size_t n_majority = std::max(n_pos, n_neg);

    const std::size_t target =
        static_cast<std::size_t>(std::floor(cfg.target_ratio * static_cast<double>(n_majority) + 0.5));
    if (target <= n_minority) {
        return train;
    }
    const std::size_t n_new = target - n_minority;

    if (n_minority < 2) {
        throw DataError("smote: minority class needs at least 2 rows");
    }
    const std::size_t k_eff =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.k_neighbors), n_minority - 1);

    std::vector<std::size_t> minority_rows;
    for (std::size_t i = 0; i < train.n(); ++i) {
        if (train.y[i] == minority_label) {
            minority_rows.push_back(i);
        }
    }

    // k nearest minority neighbours per minority row, ties broken by index.
    std::vector<std::vector<std::size_t>> neighbors(minority_rows.size());
    for (std::size_t a = 0; a < minority_rows.size(); ++a) {
        std::vector<std::pair<double, std::size_t>> dists;
        dists.reserve(minority_rows.size() - 1);
        for (std::size_t b = 0; b < minority_rows.size(); ++b) {
            if (b != a) {
                dists.emplace_back(
                    squared_distance(train.X.row(minority_rows[a]), train.X.row(minority_rows[b])),
                    b);
            }
        }
        std::sort(dists.begin(), dists.end());
        neighbors[a].reserve(k_eff);
        for (std::size_t t = 0; t < k_eff; ++t) {
            neighbors[a].push_back(dists[t].second);
        }
    }

    LabeledDataset out = train;
    Rng rng(derive_seed(cfg.seed, stream::kSmote));
    std::vector<double> synthetic(train.p());
    for (std::size_t t = 0; t < n_new; ++t) {
        const std::size_t a = rng.uniform_index(minority_rows.size());
        const std::size_t b = neighbors[a][rng.uniform_index(k_eff)];
        const double delta = rng.uniform();
        auto xa = train.X.row(minority_rows[a]);
        auto xb = train.X.row(minority_rows[b]);
        for (std::size_t j = 0; j < train.p(); ++j) {
            synthetic[j] = xa[j] + delta * (xb[j] - xa[j]);
        }
        out.X.push_row(synthetic);
        out.y.push_back(minority_label);
    }
    return out;
}

struct PreprocessParams {
    int lof_k = 20;
    double lof_threshold = 1.5;
    int smote_k = 5;
    double smote_target_ratio = 1.0;
    std::uint64_t seed = 0;
};

struct ClassCounts {
    std::size_t positive = 0;
    std::size_t negative = 0;
};

inline ClassCounts class_counts(const LabeledDataset& ds) {
    ClassCounts c;
    c.positive = ds.count(1);
    c.negative = ds.n() - c.positive;
    return c;
}

struct PreprocessResult {
    LabeledDataset clean;
    ScalerParams scaler;
    LofReport lof;
    ClassCounts raw_counts;
    ClassCounts post_lof_counts;
    ClassCounts post_smote_counts;
};

// Normalize, drop LOF outliers, then SMOTE-balance, in that order. The fitted
// scaler is returned so callers can transform held-out data with training
// statistics only.
inline PreprocessResult preprocess_pipeline(const LabeledDataset& train,
                                            const PreprocessParams& params) {
    PreprocessResult result;
    result.raw_counts = class_counts(train);
    result.scaler = fit_minmax(train);
    LabeledDataset normalized = transform_minmax(result.scaler, train);
    auto [kept, report] = remove_outliers(normalized, params.lof_k, params.lof_threshold);
    result.lof = std::move(report);
    result.post_lof_counts = class_counts(kept);
    SmoteConfig smote_cfg;
    smote_cfg.k_neighbors = params.smote_k;
    smote_cfg.target_ratio = params.smote_target_ratio;
    smote_cfg.seed = params.seed;
    result.clean = smote(kept, smote_cfg);
    result.post_smote_counts = class_counts(result.clean);
    return result;
}

} // namespace tremor
