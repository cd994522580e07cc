#pragma once

#include <string>

#include <json.hpp>

#include "tremor/models/boosting.hpp"
#include "tremor/models/common.hpp"
#include "tremor/models/knn.hpp"
#include "tremor/models/linear.hpp"
#include "tremor/models/svm.hpp"
#include "tremor/models/tree_models.hpp"

namespace tremor {

// Fits the requested classifier with the spec's hyperparameters overlaid on
// the stock defaults. Deterministic in (spec, seed, data).
inline TrainedModel fit(const ModelSpec& spec, const LabeledDataset& train) {
    const nlohmann::json params = merge_params(spec.algorithm, spec.params);
    TrainedModel model;
    switch (spec.algorithm) {
        case Algorithm::Svm:
            model = fit_svm(train, params.at("C").get<double>(), params.at("tol").get<double>(),
                            spec.seed, params.at("max_passes").get<std::size_t>());
            break;
        case Algorithm::Dt:
            model = fit_decision_tree(train, params.at("criterion").get<std::string>(),
                                      params.at("max_depth").get<int>());
            break;
        case Algorithm::Rf:
            model = fit_random_forest(train, params.at("n_trees").get<int>(), spec.seed,
                                      params.at("bootstrap").get<bool>(),
                                      params.at("max_features").get<int>());
            break;
        case Algorithm::Knn:
            model = fit_knn(train, params.at("k").get<int>());
            break;
        case Algorithm::Lr:
            model = fit_logistic_regression(train, params.at("C").get<double>(),
                                            params.at("tol").get<double>(),
                                            params.at("max_iter").get<int>());
            break;
        case Algorithm::GBoost:
            model = fit_gradient_boosting(train, params.at("learning_rate").get<double>(),
                                          params.at("n_stages").get<int>(),
                                          params.at("max_depth").get<int>());
            break;
        case Algorithm::AdaBoost:
            model = fit_adaboost(train, params.at("learning_rate").get<double>(),
                                 params.at("n_estimators").get<int>());
            break;
        case Algorithm::XgBoost:
            model = fit_xgboost_style(train, params.at("eta").get<double>(),
                                      params.at("n_rounds").get<int>(),
                                      params.at("lambda").get<double>(),
                                      params.at("max_depth").get<int>());
            break;
    }
    model.spec = spec;
    model.spec.params = params;
    return model;
}

inline constexpr int kModelFormatVersion = 1;

// Versioned document carrying the spec and the full fitted state; reloading
// reproduces predictions bit-exactly.
inline nlohmann::json save_model(const TrainedModel& model) {
    return {{"format_version", kModelFormatVersion},
            {"algorithm", algorithm_name(model.spec.algorithm)},
            {"params", model.spec.params},
            {"seed", model.spec.seed},
            {"feature_count", model.feature_count},
            {"state", model.impl->state_json()}};
}

inline TrainedModel load_model(const nlohmann::json& j) {
    if (j.value("format_version", -1) != kModelFormatVersion) {
        throw ConfigError("model document has unsupported format_version");
    }
    TrainedModel model;
    model.spec.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    model.spec.params = j.at("params");
    model.spec.seed = j.at("seed").get<std::uint64_t>();
    model.feature_count = j.at("feature_count").get<std::size_t>();
    const nlohmann::json& state = j.at("state");
    switch (model.spec.algorithm) {
        case Algorithm::Svm: model.impl = SvmModel::from_json(state); break;
        case Algorithm::Dt: model.impl = DecisionTreeModel::from_json(state); break;
        case Algorithm::Rf: model.impl = RandomForestModel::from_json(state); break;
        case Algorithm::Knn: model.impl = KnnModel::from_json(state); break;
        case Algorithm::Lr: model.impl = LinearModel::from_json(state); break;
        case Algorithm::GBoost: model.impl = GradientBoostingModel::from_json(state); break;
        case Algorithm::AdaBoost: model.impl = AdaBoostModel::from_json(state); break;
        case Algorithm::XgBoost: model.impl = XgBoostModel::from_json(state); break;
    }
    return model;
}

} // namespace tremor
