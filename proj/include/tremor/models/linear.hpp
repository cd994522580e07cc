#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include <json.hpp>

#include "tremor/models/common.hpp"

namespace tremor {

class LinearModel final : public ModelImpl {
public:
    std::vector<double> weights;
    double intercept = 0.0;

    double score_row(std::span<const double> row) const override {
        double z = intercept;
        for (std::size_t j = 0; j < weights.size(); ++j) {
            z += weights[j] * row[j];
        }
        return z;
    }

    ScoreKind score_kind() const override { return ScoreKind::Margin; }

    nlohmann::json state_json() const override {
        return {{"weights", weights}, {"intercept", intercept}};
    }

    static std::shared_ptr<LinearModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<LinearModel>();
        m->weights = j.at("weights").get<std::vector<double>>();
        m->intercept = j.at("intercept").get<double>();
        return m;
    }
};

namespace detail {

// Regularized logistic objective over theta = (w, b):
//   sum_i log(1 + exp(-s_i * (w.x_i + b))) + ||w||^2 / (2C),
// with s_i in {-1,+1}. The intercept is not penalized.
struct LogisticObjective {
    const Matrix& X;
    const std::vector<int>& y;
    double C;

    std::size_t dim() const { return X.cols() + 1; }

    double value(const std::vector<double>& theta) const {
        const std::size_t p = X.cols();
        double loss = 0.0;
        for (std::size_t i = 0; i < X.rows(); ++i) {
            const double s = y[i] == 1 ? 1.0 : -1.0;
            double z = theta[p];
            auto row = X.row(i);
            for (std::size_t j = 0; j < p; ++j) {
                z += theta[j] * row[j];
            }
            loss += softplus(-s * z);
        }
        double penalty = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            penalty += theta[j] * theta[j];
        }
        return loss + penalty / (2.0 * C);
    }

    void gradient(const std::vector<double>& theta, std::vector<double>& grad) const {
        const std::size_t p = X.cols();
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < X.rows(); ++i) {
            const double s = y[i] == 1 ? 1.0 : -1.0;
            double z = theta[p];
            auto row = X.row(i);
            for (std::size_t j = 0; j < p; ++j) {
                z += theta[j] * row[j];
            }
            const double coeff = -s * sigmoid(-s * z);
            for (std::size_t j = 0; j < p; ++j) {
                grad[j] += coeff * row[j];
            }
            grad[p] += coeff;
        }
        for (std::size_t j = 0; j < p; ++j) {
            grad[j] += theta[j] / C;
        }
    }
};

struct LbfgsOutcome {
    bool converged = false;
    double grad_norm = 0.0;
    int iterations = 0;
};

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// Limited-memory BFGS (m = 10) with Armijo backtracking. Minimizes obj in
// place; returns the convergence record rather than throwing, since a
// non-converged logistic fit is still usable.
template <typename Objective>
LbfgsOutcome lbfgs_minimize(const Objective& obj, std::vector<double>& theta, double tol,
                            int max_iter) {
    constexpr std::size_t kMemory = 10;
    constexpr double kArmijo = 1e-4;

    const std::size_t d = theta.size();
    std::deque<std::vector<double>> s_hist;
    std::deque<std::vector<double>> y_hist;
    std::deque<double> rho_hist;

    std::vector<double> grad(d);
    std::vector<double> direction(d);
    std::vector<double> theta_new(d);
    std::vector<double> grad_new(d);
    std::vector<double> alpha(kMemory);

    double f = obj.value(theta);
    obj.gradient(theta, grad);

    LbfgsOutcome outcome;
    for (int iter = 0; iter < max_iter; ++iter) {
        outcome.grad_norm = inf_norm(grad);
        outcome.iterations = iter;
        if (outcome.grad_norm < tol) {
            outcome.converged = true;
            return outcome;
        }

        // Two-loop recursion.
        direction = grad;
        const std::size_t m = s_hist.size();
        for (std::size_t k = m; k-- > 0;) {
            alpha[k] = rho_hist[k] * dot(s_hist[k], direction);
            for (std::size_t j = 0; j < d; ++j) {
                direction[j] -= alpha[k] * y_hist[k][j];
            }
        }
        if (m > 0) {
            const double scale =
                dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& v : direction) {
                v *= scale;
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double beta = rho_hist[k] * dot(y_hist[k], direction);
            for (std::size_t j = 0; j < d; ++j) {
                direction[j] += s_hist[k][j] * (alpha[k] - beta);
            }
        }
        for (double& v : direction) {
            v = -v;
        }

        double gd = dot(grad, direction);
        if (gd >= 0.0) {
            // Not a descent direction; restart from steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t j = 0; j < d; ++j) {
                direction[j] = -grad[j];
            }
            gd = dot(grad, direction);
        }

        double step = 1.0;
        double f_new = f;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t j = 0; j < d; ++j) {
                theta_new[j] = theta[j] + step * direction[j];
            }
            f_new = obj.value(theta_new);
            if (f_new <= f + kArmijo * step * gd) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            return outcome; // stuck; caller reports the residual gradient
        }

        obj.gradient(theta_new, grad_new);

        std::vector<double> s_vec(d);
        std::vector<double> y_vec(d);
        for (std::size_t j = 0; j < d; ++j) {
            s_vec[j] = theta_new[j] - theta[j];
            y_vec[j] = grad_new[j] - grad[j];
        }
        const double sy = dot(s_vec, y_vec);
        if (sy > 1e-10) {
            if (s_hist.size() == kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
        }

        theta.swap(theta_new);
        grad.swap(grad_new);
        f = f_new;
    }
    outcome.grad_norm = inf_norm(grad);
    outcome.iterations = max_iter;
    return outcome;
}

} // namespace detail

inline TrainedModel fit_logistic_regression(const LabeledDataset& train, double C, double tol,
                                            int max_iter) {
    detail::check_trainable(train, "lr");
    if (!(C > 0.0)) {
        throw ConfigError("lr: C must be positive");
    }
    if (max_iter < 1) {
        throw ConfigError("lr: max_iter must be >= 1");
    }

    detail::LogisticObjective obj{train.X, train.y, C};
    std::vector<double> theta(obj.dim(), 0.0);
    const detail::LbfgsOutcome outcome = detail::lbfgs_minimize(obj, theta, tol, max_iter);

    auto model = std::make_shared<LinearModel>();
    model->weights.assign(theta.begin(), theta.end() - 1);
    model->intercept = theta.back();

    TrainedModel out;
    out.feature_count = train.p();
    out.impl = std::move(model);
    out.converged = outcome.converged;
    out.final_grad_norm = outcome.grad_norm;
    return out;
}

} // namespace tremor
