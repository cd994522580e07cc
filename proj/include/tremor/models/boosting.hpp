#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "tremor/models/common.hpp"
#include "tremor/tree.hpp"

namespace tremor {

// Stage-wise gradient boosting on logistic loss. F starts at the training
// log-odds; every stage fits a depth-limited regression tree to the negative
// gradient with Friedman-MSE splits and takes one Newton step per leaf.
class GradientBoostingModel final : public ModelImpl {
public:
    double f0 = 0.0;
    double learning_rate = 0.01;
    std::vector<Tree> trees;

    double score_row(std::span<const double> row) const override {
        double f = f0;
        for (const auto& t : trees) {
            f += learning_rate * t.value_at(row);
        }
        return f;
    }

    ScoreKind score_kind() const override { return ScoreKind::Margin; }

    nlohmann::json state_json() const override {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : trees) {
            arr.push_back(to_json(t));
        }
        return {{"f0", f0}, {"learning_rate", learning_rate}, {"trees", arr}};
    }

    static std::shared_ptr<GradientBoostingModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<GradientBoostingModel>();
        m->f0 = j.at("f0").get<double>();
        m->learning_rate = j.at("learning_rate").get<double>();
        for (const auto& t : j.at("trees")) {
            m->trees.push_back(tree_from_json(t));
        }
        return m;
    }
};

inline TrainedModel fit_gradient_boosting(const LabeledDataset& train, double learning_rate,
                                          int n_stages, int max_depth = 3) {
    detail::check_trainable(train, "gboost");
    if (!(learning_rate > 0.0)) {
        throw ConfigError("gboost: learning_rate must be positive");
    }
    if (n_stages < 0) {
        throw ConfigError("gboost: n_stages must be >= 0");
    }
    if (max_depth < 1) {
        throw ConfigError("gboost: max_depth must be >= 1");
    }

    const std::size_t n = train.n();
    const double n_pos = static_cast<double>(train.count(1));
    const double n_neg = static_cast<double>(n) - n_pos;

    auto model = std::make_shared<GradientBoostingModel>();
    model->f0 = std::log(n_pos / n_neg);
    model->learning_rate = learning_rate;

    std::vector<double> margin(n, model->f0);
    std::vector<double> residual(n);
    std::vector<double> hessian(n);
    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    TrainedModel out;
    out.training_loss.reserve(static_cast<std::size_t>(n_stages) + 1);
    out.training_loss.push_back(detail::mean_logistic_loss(train.y, margin));

    TreeOptions opt;
    opt.max_depth = max_depth;
    for (int stage = 0; stage < n_stages; ++stage) {
        for (std::size_t i = 0; i < n; ++i) {
            const detail::ProbPair pr = detail::sigmoid_pair(margin[i]);
            residual[i] = train.y[i] == 1 ? pr.q : -pr.p;
            hessian[i] = pr.p * pr.q;
        }
        Tree tree =
            build_tree(train.X, FriedmanMseCriterion(residual, hessian), all_rows, opt);
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += learning_rate * tree.value_at(train.X.row(i));
        }
        model->trees.push_back(std::move(tree));
        out.training_loss.push_back(detail::mean_logistic_loss(train.y, margin));
    }

    out.feature_count = train.p();
    out.impl = std::move(model);
    return out;
}

// SAMME.R over depth-1 probability-calibrated stumps: the vote of a stump is
// half the log-odds of its leaf probability, and sample weights shrink by
// exp(-lr * s_i * vote_i) each round.
class AdaBoostModel final : public ModelImpl {
public:
    std::vector<Tree> stumps; // leaves hold probabilities

    static double half_log_odds(double p) {
        p = std::clamp(p, 1e-10, 1.0 - 1e-10);
        return 0.5 * std::log(p / (1.0 - p));
    }

    double score_row(std::span<const double> row) const override {
        double sum = 0.0;
        for (const auto& s : stumps) {
            sum += half_log_odds(s.value_at(row));
        }
        return sum;
    }

    ScoreKind score_kind() const override { return ScoreKind::Margin; }

    nlohmann::json state_json() const override {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : stumps) {
            arr.push_back(to_json(s));
        }
        return {{"stumps", arr}};
    }

    static std::shared_ptr<AdaBoostModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<AdaBoostModel>();
        for (const auto& s : j.at("stumps")) {
            m->stumps.push_back(tree_from_json(s));
        }
        return m;
    }
};

inline TrainedModel fit_adaboost(const LabeledDataset& train, double learning_rate,
                                 int n_estimators) {
    detail::check_trainable(train, "adaboost");
    if (!(learning_rate > 0.0)) {
        throw ConfigError("adaboost: learning_rate must be positive");
    }
    if (n_estimators < 1) {
        throw ConfigError("adaboost: n_estimators must be >= 1");
    }

    const std::size_t n = train.n();
    std::vector<double> weights(n, 1.0 / static_cast<double>(n));
    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    auto model = std::make_shared<AdaBoostModel>();
    TreeOptions opt;
    opt.max_depth = 1;

    for (int round = 0; round < n_estimators; ++round) {
        Tree stump = build_tree(train.X, GiniCriterion(train.y, &weights), all_rows, opt);

        // A stump that cannot beat chance on the current weights ends boosting.
        double weighted_error = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int hard = stump.value_at(train.X.row(i)) > 0.5 ? 1 : 0;
            if (hard != train.y[i]) {
                weighted_error += weights[i];
            }
        }
        if (weighted_error >= 0.5 - 1e-12) {
            break;
        }

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = train.y[i] == 1 ? 1.0 : -1.0;
            const double vote = AdaBoostModel::half_log_odds(stump.value_at(train.X.row(i)));
            weights[i] *= std::exp(-learning_rate * s * vote);
            total += weights[i];
        }
        if (!(total > 0.0) || !std::isfinite(total)) {
            break;
        }
        for (double& w : weights) {
            w /= total;
        }
        model->stumps.push_back(std::move(stump));
    }

    TrainedModel out;
    out.feature_count = train.p();
    out.impl = std::move(model);
    return out;
}

// Second-order boosting on logistic loss from a zero base margin. Splits
// maximize the regularized gain and leaves take weight -G/(H+lambda).
class XgBoostModel final : public ModelImpl {
public:
    double base_score = 0.0;
    double eta = 0.3;
    std::vector<Tree> trees;

    double score_row(std::span<const double> row) const override {
        double f = base_score;
        for (const auto& t : trees) {
            f += eta * t.value_at(row);
        }
        return f;
    }

    ScoreKind score_kind() const override { return ScoreKind::Margin; }

    nlohmann::json state_json() const override {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : trees) {
            arr.push_back(to_json(t));
        }
        return {{"base_score", base_score}, {"eta", eta}, {"trees", arr}};
    }

    static std::shared_ptr<XgBoostModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<XgBoostModel>();
        m->base_score = j.at("base_score").get<double>();
        m->eta = j.at("eta").get<double>();
        for (const auto& t : j.at("trees")) {
            m->trees.push_back(tree_from_json(t));
        }
        return m;
    }
};

inline TrainedModel fit_xgboost_style(const LabeledDataset& train, double eta, int n_rounds,
                                      double lambda, int max_depth = 6) {
    detail::check_trainable(train, "xgboost");
    if (!(eta > 0.0)) {
        throw ConfigError("xgboost: eta must be positive");
    }
    if (n_rounds < 0) {
        throw ConfigError("xgboost: n_rounds must be >= 0");
    }
    if (!(lambda >= 0.0)) {
        throw ConfigError("xgboost: lambda must be >= 0");
    }
    if (max_depth < 1) {
        throw ConfigError("xgboost: max_depth must be >= 1");
    }

    const std::size_t n = train.n();
    auto model = std::make_shared<XgBoostModel>();
    model->eta = eta;

    std::vector<double> margin(n, model->base_score);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    std::vector<int> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    TrainedModel out;
    out.training_loss.reserve(static_cast<std::size_t>(n_rounds) + 1);
    out.training_loss.push_back(detail::mean_logistic_loss(train.y, margin));

    TreeOptions opt;
    opt.max_depth = max_depth;
    for (int round = 0; round < n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const detail::ProbPair pr = detail::sigmoid_pair(margin[i]);
            grad[i] = train.y[i] == 1 ? -pr.q : pr.p;
            hess[i] = pr.p * pr.q;
        }
        Tree tree = build_tree(train.X, XgbCriterion(grad, hess, lambda), all_rows, opt);
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += eta * tree.value_at(train.X.row(i));
        }
        model->trees.push_back(std::move(tree));
        out.training_loss.push_back(detail::mean_logistic_loss(train.y, margin));
    }

    out.feature_count = train.p();
    out.impl = std::move(model);
    return out;
}

} // namespace tremor
