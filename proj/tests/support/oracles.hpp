#pragma once

// Independent oracles, written straight from the definitions rather than
// sharing any code path with the production implementations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tremor/matrix.hpp"

namespace testsupport {

// Literal LOF definition. Every quantity is recomputed from scratch per
// query, including the tie-inclusive neighbourhoods.
inline std::vector<double> lof_scores_oracle(const tremor::Matrix& X, int k) {
    const std::size_t n = X.rows();

    auto distance = [&](std::size_t a, std::size_t b) {
        double sum = 0.0;
        for (std::size_t j = 0; j < X.cols(); ++j) {
            const double d = X.at(a, j) - X.at(b, j);
            sum += d * d;
        }
        return std::sqrt(sum);
    };

    auto k_distance = [&](std::size_t a) {
        std::vector<double> ds;
        for (std::size_t b = 0; b < n; ++b) {
            if (b != a) {
                ds.push_back(distance(a, b));
            }
        }
        std::sort(ds.begin(), ds.end());
        return ds[static_cast<std::size_t>(k) - 1];
    };

    auto neighbourhood = [&](std::size_t a) {
        const double kd = k_distance(a);
        std::vector<std::size_t> ns;
        for (std::size_t b = 0; b < n; ++b) {
            if (b != a && distance(a, b) <= kd) {
                ns.push_back(b);
            }
        }
        return ns;
    };

    auto lrd = [&](std::size_t a) {
        double reach_sum = 0.0;
        const auto ns = neighbourhood(a);
        for (std::size_t b : ns) {
            reach_sum += std::max(k_distance(b), distance(a, b));
        }
        return static_cast<double>(ns.size()) / std::max(reach_sum, 1e-12);
    };

    std::vector<double> scores(n);
    for (std::size_t a = 0; a < n; ++a) {
        const auto ns = neighbourhood(a);
        double ratio_sum = 0.0;
        for (std::size_t b : ns) {
            ratio_sum += lrd(b) / lrd(a);
        }
        scores[a] = ratio_sum / static_cast<double>(ns.size());
    }
    return scores;
}

// Eq.-style AUC: the literal double sum over (negative, positive) pairs with
// a strict inequality indicator.
inline double auc_double_sum(std::span<const int> y, std::span<const double> f,
                             bool half_ties = false) {
    double pairs = 0.0;
    double n0 = 0.0;
    double n1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 0) {
            n0 += 1.0;
        } else {
            n1 += 1.0;
        }
    }
    for (std::size_t t0 = 0; t0 < y.size(); ++t0) {
        if (y[t0] != 0) {
            continue;
        }
        for (std::size_t t1 = 0; t1 < y.size(); ++t1) {
            if (y[t1] != 1) {
                continue;
            }
            if (f[t0] < f[t1]) {
                pairs += 1.0;
            } else if (half_ties && f[t0] == f[t1]) {
                pairs += 0.5;
            }
        }
    }
    return pairs / (n0 * n1);
}

struct ConfusionTally {
    long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline ConfusionTally confusion_tally(std::span<const int> y_true, std::span<const int> y_pred) {
    ConfusionTally t;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1 && y_pred[i] == 1) t.tp++;
        if (y_true[i] == 0 && y_pred[i] == 1) t.fp++;
        if (y_true[i] == 0 && y_pred[i] == 0) t.tn++;
        if (y_true[i] == 1 && y_pred[i] == 0) t.fn++;
    }
    return t;
}

} // namespace testsupport
