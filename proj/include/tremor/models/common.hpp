#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tremor/dataset.hpp"
#include "tremor/errors.hpp"
#include "tremor/matrix.hpp"

namespace tremor {

enum class Algorithm { Svm, Dt, Rf, Knn, Lr, GBoost, AdaBoost, XgBoost };

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::Svm,    Algorithm::Dt,       Algorithm::Rf,     Algorithm::Knn,
    Algorithm::Lr,     Algorithm::GBoost,   Algorithm::AdaBoost, Algorithm::XgBoost,
};

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Svm: return "svm";
        case Algorithm::Dt: return "dt";
        case Algorithm::Rf: return "rf";
        case Algorithm::Knn: return "knn";
        case Algorithm::Lr: return "lr";
        case Algorithm::GBoost: return "gboost";
        case Algorithm::AdaBoost: return "adaboost";
        case Algorithm::XgBoost: return "xgboost";
    }
    return "?";
}

inline const char* algorithm_display_name(Algorithm a) {
    switch (a) {
        case Algorithm::Svm: return "SVM";
        case Algorithm::Dt: return "DT";
        case Algorithm::Rf: return "RF";
        case Algorithm::Knn: return "KNN";
        case Algorithm::Lr: return "LR";
        case Algorithm::GBoost: return "GBoost";
        case Algorithm::AdaBoost: return "AdaBoost";
        case Algorithm::XgBoost: return "XGBoost";
    }
    return "?";
}

inline Algorithm algorithm_from_name(const std::string& s) {
    for (Algorithm a : kAllAlgorithms) {
        if (s == algorithm_name(a)) {
            return a;
        }
    }
    throw ConfigError("unknown algorithm: '" + s + "'");
}

// Stock defaults: SVM C=1 RBF tol=1e-3; DT gini best-split; RF 1000 gini
// trees; LR C=1 lbfgs tol=1e-4; GBoost lr=0.01 Friedman-MSE 1000 stages;
// AdaBoost lr=1.0 SAMME.R; XGBoost 1000 rounds lr=0.3. Unstated knobs carry
// the customary defaults.
inline nlohmann::json default_params(Algorithm a) {
    switch (a) {
        case Algorithm::Svm:
            return {{"C", 1.0}, {"tol", 1e-3}, {"max_passes", 0}}; // 0 = 10*n budget
        case Algorithm::Dt:
            return {{"criterion", "gini"}, {"max_depth", 0}}; // 0 = unbounded
        case Algorithm::Rf:
            return {{"n_trees", 1000}, {"bootstrap", true}, {"max_features", 0}}; // 0 = ceil(sqrt(p))
        case Algorithm::Knn:
            return {{"k", 5}};
        case Algorithm::Lr:
            return {{"C", 1.0}, {"tol", 1e-4}, {"max_iter", 1000}};
        case Algorithm::GBoost:
            return {{"learning_rate", 0.01}, {"n_stages", 1000}, {"max_depth", 3}};
        case Algorithm::AdaBoost:
            return {{"learning_rate", 1.0}, {"n_estimators", 50}};
        case Algorithm::XgBoost:
            return {{"eta", 0.3}, {"n_rounds", 1000}, {"lambda", 1.0}, {"max_depth", 6}};
    }
    return {};
}

// Overlays user params onto the defaults; unknown keys and wrong types are
// configuration errors.
inline nlohmann::json merge_params(Algorithm a, const nlohmann::json& params) {
    nlohmann::json merged = default_params(a);
    if (params.is_null()) {
        return merged;
    }
    if (!params.is_object()) {
        throw ConfigError(std::string(algorithm_name(a)) + ": hyperparameters must be an object");
    }
    for (const auto& [key, value] : params.items()) {
        auto it = merged.find(key);
        if (it == merged.end()) {
            throw ConfigError(std::string(algorithm_name(a)) + ": unknown hyperparameter '" + key +
                              "'");
        }
        if (it->is_string() != value.is_string() || it->is_boolean() != value.is_boolean() ||
            (it->is_number() && !value.is_number())) {
            throw ConfigError(std::string(algorithm_name(a)) + ": hyperparameter '" + key +
                              "' has the wrong type");
        }
        *it = value;
    }
    return merged;
}

struct ModelSpec {
    Algorithm algorithm = Algorithm::Dt;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 0;

    static ModelSpec with_defaults(Algorithm a, std::uint64_t seed = 0) {
        return {a, default_params(a), seed};
    }
};

inline nlohmann::json to_json(const ModelSpec& s) {
    return {{"algorithm", algorithm_name(s.algorithm)}, {"params", s.params}, {"seed", s.seed}};
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
    ModelSpec s;
    s.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    s.params = j.value("params", nlohmann::json::object());
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
}

enum class ScoreKind {
    Margin,      // neutral threshold 0, predict 1 when score >= 0
    Probability, // neutral threshold 0.5, exact ties go to class 0
};

// Immutable fitted state. score_row is the only virtual hot path; batch
// helpers live on TrainedModel.
class ModelImpl {
public:
    virtual ~ModelImpl() = default;
    virtual double score_row(std::span<const double> row) const = 0;
    virtual ScoreKind score_kind() const = 0;
    virtual nlohmann::json state_json() const = 0;
};

struct TrainedModel {
    ModelSpec spec;
    std::size_t feature_count = 0;
    std::shared_ptr<const ModelImpl> impl;

    // Fit diagnostics; informational, not serialized.
    std::vector<double> training_loss; // per-stage, boosting models only
    bool converged = true;
    double final_grad_norm = 0.0;

    double threshold() const { return impl->score_kind() == ScoreKind::Margin ? 0.0 : 0.5; }
};

inline void check_feature_count(const TrainedModel& model, const Matrix& X) {
    if (X.cols() != model.feature_count) {
        throw DataError(std::string("predict: matrix has ") + std::to_string(X.cols()) +
                        " columns, model expects " + std::to_string(model.feature_count));
    }
}

inline std::vector<double> decision_score(const TrainedModel& model, const Matrix& X) {
    check_feature_count(model, X);
    std::vector<double> scores(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        scores[i] = model.impl->score_row(X.row(i));
    }
    return scores;
}

inline int predict_from_score(const TrainedModel& model, double score) {
    if (model.impl->score_kind() == ScoreKind::Margin) {
        return score >= 0.0 ? 1 : 0;
    }
    return score > 0.5 ? 1 : 0; // vote ties resolve to class 0
}

inline std::vector<int> predict(const TrainedModel& model, const Matrix& X) {
    check_feature_count(model, X);
    std::vector<int> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        out[i] = predict_from_score(model, model.impl->score_row(X.row(i)));
    }
    return out;
}

namespace detail {

inline void check_trainable(const LabeledDataset& train, const char* who) {
    if (train.n() == 0) {
        throw FitError(std::string(who) + ": empty training set");
    }
    const std::size_t n_pos = train.count(1);
    if (n_pos == 0 || n_pos == train.n()) {
        throw FitError(std::string(who) + ": training set has a single class");
    }
    for (double v : train.X.data()) {
        if (!std::isfinite(v)) {
            throw FitError(std::string(who) + ": non-finite feature value");
        }
    }
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// (p, 1-p) computed so that sigmoid_pair(-z) swaps the fields bit-exactly;
// boosting gradients built from these negate exactly under a label flip.
struct ProbPair {
    double p;
    double q;
};

inline ProbPair sigmoid_pair(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return {1.0 / (1.0 + e), e / (1.0 + e)};
    }
    const double e = std::exp(z);
    return {e / (1.0 + e), 1.0 / (1.0 + e)};
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double clamp_probability(double p) {
    return std::min(1.0 - 1e-15, std::max(1e-15, p));
}

inline double mean_logistic_loss(const std::vector<int>& y, const std::vector<double>& margin) {
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sign = y[i] == 1 ? 1.0 : -1.0;
        loss += softplus(-sign * margin[i]);
    }
    return loss / static_cast<double>(y.size());
}

} // namespace detail

} // namespace tremor
