#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "tremor/models/common.hpp"
#include "tremor/random.hpp"

namespace tremor {

// RBF-kernel SVM decision function over the retained support vectors:
// score(x) = sum_i dual_coef_i * exp(-gamma * ||sv_i - x||^2) + bias.
class SvmModel final : public ModelImpl {
public:
    Matrix support_vectors;
    std::vector<double> dual_coef; // alpha_i * y_i
    double bias = 0.0;
    double gamma = 1.0;

    double score_row(std::span<const double> row) const override {
        double sum = bias;
        for (std::size_t i = 0; i < support_vectors.rows(); ++i) {
            sum += dual_coef[i] * std::exp(-gamma * squared_distance(support_vectors.row(i), row));
        }
        return sum;
    }

    ScoreKind score_kind() const override { return ScoreKind::Margin; }

    nlohmann::json state_json() const override {
        nlohmann::json sv = nlohmann::json::array();
        for (std::size_t i = 0; i < support_vectors.rows(); ++i) {
            auto r = support_vectors.row(i);
            sv.push_back(std::vector<double>(r.begin(), r.end()));
        }
        return {{"support_vectors", sv},
                {"dual_coef", dual_coef},
                {"bias", bias},
                {"gamma", gamma}};
    }

    static std::shared_ptr<SvmModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<SvmModel>();
        for (const auto& row : j.at("support_vectors")) {
            const auto values = row.get<std::vector<double>>();
            m->support_vectors.push_row(values);
        }
        m->dual_coef = j.at("dual_coef").get<std::vector<double>>();
        m->bias = j.at("bias").get<double>();
        m->gamma = j.at("gamma").get<double>();
        return m;
    }
};

namespace detail {

// Platt's sequential minimal optimization for the soft-margin dual.
class SmoSolver {
public:
    SmoSolver(const Matrix& X, const std::vector<int>& labels, double C, double tol,
              std::uint64_t seed)
        : C_(C), tol_(tol), rng_(derive_seed(seed, stream::kFit)) {
        n_ = X.rows();
        y_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            y_[i] = labels[i] == 1 ? 1.0 : -1.0;
        }

        // "Heuristic" gamma: 1 / (p * variance of all training cells).
        double mean = 0.0;
        double mean_sq = 0.0;
        const double cells = static_cast<double>(X.data().size());
        for (double v : X.data()) {
            mean += v;
            mean_sq += v * v;
        }
        mean /= cells;
        const double var = mean_sq / cells - mean * mean;
        gamma_ = var > 1e-30 ? 1.0 / (static_cast<double>(X.cols()) * var)
                             : 1.0 / static_cast<double>(X.cols());

        kernel_ = Matrix(n_, n_);
        for (std::size_t i = 0; i < n_; ++i) {
            kernel_.at(i, i) = 1.0;
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double k = std::exp(-gamma_ * squared_distance(X.row(i), X.row(j)));
                kernel_.at(i, j) = k;
                kernel_.at(j, i) = k;
            }
        }

        alpha_.assign(n_, 0.0);
        errors_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            errors_[i] = -y_[i]; // u = 0 initially
        }
    }

    // Runs alternating full/non-bound sweeps until a full sweep changes
    // nothing. Throws FitError when the pass budget is exhausted.
    void solve(std::size_t max_passes) {
        if (max_passes == 0) {
            max_passes = 10 * n_;
        }
        std::size_t passes = 0;
        bool examine_all = true;
        std::size_t num_changed = 1;
        while (num_changed > 0 || examine_all) {
            if (++passes > max_passes) {
                throw FitError("svm: SMO did not converge within " + std::to_string(max_passes) +
                               " passes");
            }
            num_changed = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (examine_all || is_non_bound(i)) {
                    num_changed += examine(i);
                }
            }
            if (examine_all) {
                examine_all = false;
            } else if (num_changed == 0) {
                examine_all = true;
            }
        }
    }

    double gamma() const { return gamma_; }
    double bias() const { return -b_; }
    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& y() const { return y_; }

private:
    bool is_non_bound(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < C_; }

    std::size_t examine(std::size_t i2) {
        const double e2 = errors_[i2];
        const double r2 = e2 * y_[i2];
        const bool violates =
            (r2 < -tol_ && alpha_[i2] < C_) || (r2 > tol_ && alpha_[i2] > 0.0);
        if (!violates) {
            return 0;
        }

        // Second-choice heuristic: the non-bound partner with the largest
        // |E1 - E2|, ties to the lowest index.
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (i != i2 && is_non_bound(i)) {
                const double gap = std::abs(errors_[i] - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = i;
                }
            }
        }
        if (best < n_ && take_step(best, i2)) {
            return 1;
        }

        const std::size_t start1 = rng_.uniform_index(n_);
        for (std::size_t t = 0; t < n_; ++t) {
            const std::size_t i1 = (start1 + t) % n_;
            if (i1 != i2 && is_non_bound(i1) && take_step(i1, i2)) {
                return 1;
            }
        }
        const std::size_t start2 = rng_.uniform_index(n_);
        for (std::size_t t = 0; t < n_; ++t) {
            const std::size_t i1 = (start2 + t) % n_;
            if (i1 != i2 && take_step(i1, i2)) {
                return 1;
            }
        }
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) {
            return false;
        }
        const double a1_old = alpha_[i1];
        const double a2_old = alpha_[i2];
        const double y1 = y_[i1];
        const double y2 = y_[i2];
        const double e1 = errors_[i1];
        const double e2 = errors_[i2];
        const double s = y1 * y2;

        double lo, hi;
        if (s < 0.0) {
            lo = std::max(0.0, a2_old - a1_old);
            hi = std::min(C_, C_ + a2_old - a1_old);
        } else {
            lo = std::max(0.0, a1_old + a2_old - C_);
            hi = std::min(C_, a1_old + a2_old);
        }
        if (lo >= hi) {
            return false;
        }

        const double k11 = kernel_.at(i1, i1);
        const double k12 = kernel_.at(i1, i2);
        const double k22 = kernel_.at(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2;
        if (eta > 0.0) {
            a2 = a2_old + y2 * (e1 - e2) / eta;
            a2 = std::clamp(a2, lo, hi);
        } else {
            // Flat direction: evaluate the dual objective at both clip ends.
            const double f1 = y1 * (e1 + b_) - a1_old * k11 - s * a2_old * k12;
            const double f2 = y2 * (e2 + b_) - s * a1_old * k12 - a2_old * k22;
            const double l1 = a1_old + s * (a2_old - lo);
            const double h1 = a1_old + s * (a2_old - hi);
            const double lo_obj = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 +
                                  s * lo * l1 * k12;
            const double hi_obj = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 +
                                  s * hi * h1 * k12;
            if (lo_obj < hi_obj - kEps) {
                a2 = lo;
            } else if (lo_obj > hi_obj + kEps) {
                a2 = hi;
            } else {
                a2 = a2_old;
            }
        }
        if (std::abs(a2 - a2_old) < kEps * (a2 + a2_old + kEps)) {
            return false;
        }
        const double a1 = a1_old + s * (a2_old - a2);

        const double d1 = y1 * (a1 - a1_old);
        const double d2 = y2 * (a2 - a2_old);
        const double b1 = e1 + d1 * k11 + d2 * k12 + b_;
        const double b2 = e2 + d1 * k12 + d2 * k22 + b_;
        double b_new;
        if (a1 > 0.0 && a1 < C_) {
            b_new = b1;
        } else if (a2 > 0.0 && a2 < C_) {
            b_new = b2;
        } else {
            b_new = 0.5 * (b1 + b2);
        }
        const double db = b_new - b_;
        b_ = b_new;
        alpha_[i1] = a1;
        alpha_[i2] = a2;
        for (std::size_t i = 0; i < n_; ++i) {
            errors_[i] += d1 * kernel_.at(i1, i) + d2 * kernel_.at(i2, i) - db;
        }
        return true;
    }

    static constexpr double kEps = 1e-12;

    double C_;
    double tol_;
    Rng rng_;
    std::size_t n_ = 0;
    double gamma_ = 1.0;
    double b_ = 0.0; // u(x) = sum alpha y K - b
    std::vector<double> y_;
    std::vector<double> alpha_;
    std::vector<double> errors_;
    Matrix kernel_;
};

} // namespace detail

inline TrainedModel fit_svm(const LabeledDataset& train, double C, double tol, std::uint64_t seed,
                            std::size_t max_passes = 0) {
    detail::check_trainable(train, "svm");
    if (!(C > 0.0)) {
        throw ConfigError("svm: C must be positive");
    }
    if (!(tol > 0.0)) {
        throw ConfigError("svm: tol must be positive");
    }

    detail::SmoSolver solver(train.X, train.y, C, tol, seed);
    solver.solve(max_passes);

    auto model = std::make_shared<SvmModel>();
    model->gamma = solver.gamma();
    model->bias = solver.bias();
    for (std::size_t i = 0; i < train.n(); ++i) {
        if (solver.alpha()[i] > 0.0) {
            model->support_vectors.push_row(train.X.row(i));
            model->dual_coef.push_back(solver.alpha()[i] * solver.y()[i]);
        }
    }

    TrainedModel out;
    out.feature_count = train.p();
    out.impl = std::move(model);
    return out;
}

} // namespace tremor
