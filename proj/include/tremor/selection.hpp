#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tremor/dataset.hpp"
#include "tremor/errors.hpp"
#include "tremor/metrics.hpp"
#include "tremor/models.hpp"
#include "tremor/parallel.hpp"
#include "tremor/preprocess.hpp"
#include "tremor/random.hpp"

namespace tremor {

// Repeated stratified k-fold assignment: per repeat, rows are shuffled within
// class by a repeat-derived stream and dealt round-robin into folds, so each
// fold's class counts differ from the global ratio by less than one sample.
struct FoldPlan {
    int n_folds = 0;
    int n_repeats = 0;
    std::uint64_t seed = 0;
    // assignments[repeat][fold] = row indices held out by that fold
    std::vector<std::vector<std::vector<std::size_t>>> assignments;
};

inline FoldPlan stratified_kfold_plan(const std::vector<int>& y, int n_folds, int n_repeats,
                                      std::uint64_t seed) {
    if (n_folds < 2) {
        throw ConfigError("stratified_kfold_plan: n_folds must be >= 2");
    }
    if (n_repeats < 1) {
        throw ConfigError("stratified_kfold_plan: n_repeats must be >= 1");
    }
    check_binary(y, "y");
    std::vector<std::size_t> pos_rows;
    std::vector<std::size_t> neg_rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] == 1 ? pos_rows : neg_rows).push_back(i);
    }
    if (pos_rows.size() < static_cast<std::size_t>(n_folds) ||
        neg_rows.size() < static_cast<std::size_t>(n_folds)) {
        throw DataError("stratified_kfold_plan: a class has fewer rows than folds (" +
                        std::to_string(pos_rows.size()) + "/" + std::to_string(neg_rows.size()) +
                        " vs " + std::to_string(n_folds) + " folds)");
    }

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.n_repeats = n_repeats;
    plan.seed = seed;
    plan.assignments.resize(static_cast<std::size_t>(n_repeats));
    for (int r = 0; r < n_repeats; ++r) {
        Rng rng(derive_seed(seed, stream::kFoldPlan, static_cast<std::uint64_t>(r)));
        auto pos = pos_rows;
        auto neg = neg_rows;
        rng.shuffle(pos);
        rng.shuffle(neg);
        auto& folds = plan.assignments[static_cast<std::size_t>(r)];
        folds.assign(static_cast<std::size_t>(n_folds), {});
        for (std::size_t i = 0; i < pos.size(); ++i) {
            folds[i % static_cast<std::size_t>(n_folds)].push_back(pos[i]);
        }
        for (std::size_t i = 0; i < neg.size(); ++i) {
            folds[i % static_cast<std::size_t>(n_folds)].push_back(neg[i]);
        }
        for (auto& fold : folds) {
            std::sort(fold.begin(), fold.end());
        }
    }
    return plan;
}

inline nlohmann::json to_json(const FoldPlan& plan) {
    return {{"n_folds", plan.n_folds},
            {"n_repeats", plan.n_repeats},
            {"seed", plan.seed},
            {"assignments", plan.assignments}};
}

enum class PreprocessMode { Paper, Strict };

inline const char* preprocess_mode_name(PreprocessMode m) {
    return m == PreprocessMode::Paper ? "paper" : "strict";
}

inline PreprocessMode preprocess_mode_from_name(const std::string& s) {
    if (s == "paper") return PreprocessMode::Paper;
    if (s == "strict") return PreprocessMode::Strict;
    throw ConfigError("preprocess_mode must be \"paper\" or \"strict\", got '" + s + "'");
}

struct CvOptions {
    PreprocessMode mode = PreprocessMode::Paper;
    PreprocessParams prep; // used by strict mode only
};

struct CvEvaluation {
    int repeat = 0;
    int fold = 0;
    bool ok = false;
    double accuracy = 0.0;
    double log_loss = 0.0;
    std::string error;
    // Strict-mode audit trail.
    ScalerParams fold_scaler;
    bool heldout_rows_original = true;
};

struct CVResult {
    ModelSpec spec;
    std::vector<double> accuracies; // successful evaluations in (repeat, fold) order
    double mean_accuracy = 0.0;
    double validation_loss = 0.0;
    int n_failures = 0;
    bool complete = true;
    std::vector<CvEvaluation> evaluations;
};

inline nlohmann::json to_json(const CVResult& r) {
    nlohmann::json evals = nlohmann::json::array();
    for (const auto& e : r.evaluations) {
        nlohmann::json je = {{"repeat", e.repeat},
                             {"fold", e.fold},
                             {"ok", e.ok},
                             {"accuracy", e.accuracy},
                             {"log_loss", e.log_loss}};
        if (!e.ok) {
            je["error"] = e.error;
        }
        evals.push_back(std::move(je));
    }
    return {{"spec", to_json(r.spec)},
            {"accuracies", r.accuracies},
            {"mean_accuracy", r.mean_accuracy},
            {"validation_loss", r.validation_loss},
            {"n_failures", r.n_failures},
            {"complete", r.complete},
            {"evaluations", std::move(evals)}};
}

namespace detail {

inline double heldout_log_loss(const TrainedModel& model, const Matrix& X,
                               const std::vector<int>& y) {
    const std::vector<double> scores = decision_score(model, X);
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        // Clamped on both kinds: saturated margins would otherwise give an
        // infinite penalty for one confidently wrong row.
        const double p = clamp_probability(model.impl->score_kind() == ScoreKind::Margin
                                               ? sigmoid(scores[i])
                                               : scores[i]);
        loss += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(y.size());
}

inline double prediction_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        correct += y_true[i] == y_pred[i] ? 1u : 0u;
    }
    return static_cast<double>(correct) / static_cast<double>(y_true.size());
}

} // namespace detail

// One fit-and-score per (repeat, fold). In paper mode the dataset is expected
// to be preprocessed already (one global pass before folding); strict mode
// re-fits the scaler, LOF and SMOTE inside each fold's training portion and
// transforms the held-out rows with that fold's scaler only.
inline CVResult cross_validate(const ModelSpec& spec, const LabeledDataset& ds,
                               const FoldPlan& plan, const CvOptions& options = {}) {
    CVResult result;
    result.spec = spec;
    const std::size_t n_evals =
        static_cast<std::size_t>(plan.n_repeats) * static_cast<std::size_t>(plan.n_folds);
    result.evaluations.resize(n_evals);

    parallel_for(n_evals, [&](std::size_t e) {
        const int r = static_cast<int>(e) / plan.n_folds;
        const int f = static_cast<int>(e) % plan.n_folds;
        CvEvaluation& eval = result.evaluations[e];
        eval.repeat = r;
        eval.fold = f;

        const auto& heldout_idx = plan.assignments[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)];
        std::vector<std::size_t> train_idx;
        train_idx.reserve(ds.n() - heldout_idx.size());
        for (int g = 0; g < plan.n_folds; ++g) {
            if (g == f) {
                continue;
            }
            const auto& fold = plan.assignments[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)];
            train_idx.insert(train_idx.end(), fold.begin(), fold.end());
        }
        std::sort(train_idx.begin(), train_idx.end());

        try {
            LabeledDataset train_ds = detail::take_rows(ds, train_idx);
            LabeledDataset heldout_ds = detail::take_rows(ds, heldout_idx);

            ModelSpec fold_spec = spec;
            fold_spec.seed = derive_seed(spec.seed, stream::kFit, static_cast<std::uint64_t>(r),
                                         static_cast<std::uint64_t>(f));

            if (options.mode == PreprocessMode::Strict) {
                PreprocessParams prep = options.prep;
                prep.seed = derive_seed(options.prep.seed, stream::kSmote,
                                        static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(f));
                PreprocessResult pp = preprocess_pipeline(train_ds, prep);
                train_ds = std::move(pp.clean);
                // Audit: held-out rows must still be the original dataset rows,
                // untouched by LOF removal or SMOTE synthesis.
                for (std::size_t t = 0; t < heldout_idx.size(); ++t) {
                    auto original = ds.X.row(heldout_idx[t]);
                    auto kept = heldout_ds.X.row(t);
                    if (!std::equal(original.begin(), original.end(), kept.begin()) ||
                        heldout_ds.y[t] != ds.y[heldout_idx[t]]) {
                        eval.heldout_rows_original = false;
                    }
                }
                heldout_ds = transform_minmax(pp.scaler, heldout_ds);
                eval.fold_scaler = std::move(pp.scaler);
            }

            const TrainedModel model = fit(fold_spec, train_ds);
            const std::vector<int> pred = predict(model, heldout_ds.X);
            eval.accuracy = detail::prediction_accuracy(heldout_ds.y, pred);
            eval.log_loss = detail::heldout_log_loss(model, heldout_ds.X, heldout_ds.y);
            eval.ok = true;
        } catch (const std::exception& ex) {
            eval.ok = false;
            eval.error = ex.what();
        }
    });

    double acc_sum = 0.0;
    double loss_sum = 0.0;
    for (const auto& eval : result.evaluations) {
        if (eval.ok) {
            result.accuracies.push_back(eval.accuracy);
            acc_sum += eval.accuracy;
            loss_sum += eval.log_loss;
        } else {
            result.n_failures++;
        }
    }
    result.complete = result.n_failures == 0;
    if (!result.accuracies.empty()) {
        result.mean_accuracy = acc_sum / static_cast<double>(result.accuracies.size());
        result.validation_loss = loss_sum / static_cast<double>(result.accuracies.size());
    }
    return result;
}

// Specs whose mean CV accuracy reaches the threshold, best first; ties keep
// their input order.
inline std::vector<ModelSpec> select_models(const std::vector<CVResult>& results,
                                            double threshold) {
    if (results.empty()) {
        throw ConfigError("select_models: no results to select from");
    }
    std::vector<std::size_t> order(results.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return results[a].mean_accuracy > results[b].mean_accuracy;
    });
    std::vector<ModelSpec> selected;
    for (std::size_t i : order) {
        if (results[i].mean_accuracy >= threshold) {
            selected.push_back(results[i].spec);
        }
    }
    if (selected.empty()) {
        throw ConfigError("select_models: no model reached mean accuracy " +
                          std::to_string(threshold) + "; lower the threshold");
    }
    return selected;
}

// Candidate values per hyperparameter, in a fixed axis order; the cell
// enumeration varies the last axis fastest.
struct ParamGrid {
    std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;

    std::size_t cell_count() const {
        std::size_t total = 1;
        for (const auto& [_, values] : axes) {
            total *= values.size();
        }
        return total;
    }

    nlohmann::json cell_params(std::size_t index) const {
        nlohmann::json params = nlohmann::json::object();
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& [key, values] = axes[a];
            params[key] = values[index % values.size()];
            index /= values.size();
        }
        return params;
    }
};

// Default grids bracket each stock default with one step down and one up.
inline ParamGrid default_grid(Algorithm a) {
    switch (a) {
        case Algorithm::Svm:
            return {{{"C", {0.1, 1.0, 10.0}}}};
        case Algorithm::Dt:
            return {{{"max_depth", {3, 6, 0}}}}; // 0 = unbounded
        case Algorithm::Rf:
            return {{{"n_trees", {100, 500, 1000}}}};
        case Algorithm::Knn:
            return {{{"k", {3, 5, 7}}}};
        case Algorithm::Lr:
            return {{{"C", {0.1, 1.0, 10.0}}}};
        case Algorithm::GBoost:
            return {{{"learning_rate", {0.001, 0.01, 0.1}}}};
        case Algorithm::AdaBoost:
            return {{{"n_estimators", {25, 50, 100}}}};
        case Algorithm::XgBoost:
            return {{{"eta", {0.1, 0.3, 0.5}}}};
    }
    return {};
}

inline ParamGrid param_grid_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("grid: expected an object of {param: [values...]}");
    }
    ParamGrid grid;
    for (const auto& [key, values] : j.items()) {
        if (!values.is_array() || values.empty()) {
            throw ConfigError("grid: axis '" + key + "' must be a non-empty array");
        }
        grid.axes.emplace_back(key, std::vector<nlohmann::json>(values.begin(), values.end()));
    }
    return grid;
}

struct GridCell {
    nlohmann::json params;
    CVResult result;
};

struct GridSearchResult {
    ModelSpec best_spec;
    std::size_t best_index = 0;
    std::vector<GridCell> cells;
};

namespace detail {

// "Simpler first" tie-break: fewer boosting stages / trees, then smaller C,
// then smaller depth (0 = unbounded counts as infinite).
inline bool simpler_params(Algorithm a, const nlohmann::json& lhs, const nlohmann::json& rhs) {
    const nlohmann::json ml = merge_params(a, lhs);
    const nlohmann::json mr = merge_params(a, rhs);
    for (const char* key : {"n_stages", "n_rounds", "n_estimators", "n_trees"}) {
        if (ml.contains(key)) {
            const double l = ml.at(key).get<double>();
            const double r = mr.at(key).get<double>();
            if (l != r) {
                return l < r;
            }
        }
    }
    if (ml.contains("C")) {
        const double l = ml.at("C").get<double>();
        const double r = mr.at("C").get<double>();
        if (l != r) {
            return l < r;
        }
    }
    if (ml.contains("max_depth")) {
        double l = ml.at("max_depth").get<double>();
        double r = mr.at("max_depth").get<double>();
        if (l == 0.0) l = std::numeric_limits<double>::infinity();
        if (r == 0.0) r = std::numeric_limits<double>::infinity();
        if (l != r) {
            return l < r;
        }
    }
    return false;
}

} // namespace detail

// Exhaustive grid evaluation on one shared fold plan (5x5 by default). The
// winning cell has the highest mean accuracy, with ties resolved simpler-first
// and then by enumeration order.
inline GridSearchResult grid_search(const ModelSpec& spec, const ParamGrid& grid,
                                    const LabeledDataset& ds, std::uint64_t seed,
                                    const CvOptions& options = {}, int n_folds = 5,
                                    int n_repeats = 5) {
    const std::size_t n_cells = grid.cell_count();
    const FoldPlan plan =
        stratified_kfold_plan(ds.y, n_folds, n_repeats, derive_seed(seed, stream::kFoldPlan));

    GridSearchResult out;
    out.cells.reserve(n_cells);
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < n_cells; ++c) {
        GridCell cell;
        cell.params = spec.params.is_object() ? spec.params : nlohmann::json::object();
        const nlohmann::json cell_values = grid.cell_params(c);
        for (const auto& [key, value] : cell_values.items()) {
            cell.params[key] = value;
        }
        ModelSpec cell_spec;
        cell_spec.algorithm = spec.algorithm;
        cell_spec.params = cell.params;
        cell_spec.seed = derive_seed(seed, stream::kGridCell, c);
        cell.result = cross_validate(cell_spec, ds, plan, options);
        out.cells.push_back(std::move(cell));

        const CVResult& r = out.cells.back().result;
        if (r.accuracies.empty()) {
            continue; // every fold failed for this cell
        }
        if (!best) {
            best = c;
            continue;
        }
        const CVResult& b = out.cells[*best].result;
        if (r.mean_accuracy > b.mean_accuracy ||
            (r.mean_accuracy == b.mean_accuracy &&
             detail::simpler_params(spec.algorithm, out.cells[c].params, out.cells[*best].params))) {
            best = c;
        }
    }
    if (!best) {
        throw FitError(std::string("grid_search: every cell failed to fit for ") +
                       algorithm_name(spec.algorithm));
    }
    out.best_index = *best;
    out.best_spec.algorithm = spec.algorithm;
    out.best_spec.params = out.cells[*best].params;
    out.best_spec.seed = spec.seed;
    return out;
}

} // namespace tremor
