#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "tremor/models/common.hpp"
#include "tremor/parallel.hpp"
#include "tremor/random.hpp"
#include "tremor/tree.hpp"

namespace tremor {

// CART classifier; leaves hold the positive-class fraction.
class DecisionTreeModel final : public ModelImpl {
public:
    Tree tree;

    double score_row(std::span<const double> row) const override { return tree.value_at(row); }

    ScoreKind score_kind() const override { return ScoreKind::Probability; }

    nlohmann::json state_json() const override { return {{"tree", to_json(tree)}}; }

    static std::shared_ptr<DecisionTreeModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<DecisionTreeModel>();
        m->tree = tree_from_json(j.at("tree"));
        return m;
    }
};

inline TrainedModel fit_decision_tree(const LabeledDataset& train, const std::string& criterion,
                                      int max_depth = 0) {
    detail::check_trainable(train, "dt");
    if (criterion != "gini") {
        throw ConfigError("dt: unsupported criterion '" + criterion + "' (only \"gini\")");
    }
    if (max_depth < 0) {
        throw ConfigError("dt: max_depth must be >= 0");
    }

    std::vector<int> rows(train.n());
    std::iota(rows.begin(), rows.end(), 0);
    TreeOptions opt;
    opt.max_depth = max_depth;

    auto model = std::make_shared<DecisionTreeModel>();
    model->tree = build_tree(train.X, GiniCriterion(train.y), std::move(rows), opt);

    TrainedModel out;
    out.feature_count = train.p();
    out.impl = std::move(model);
    return out;
}

// Bagged CART trees with per-node feature subsampling. Each tree casts a hard
// vote; the score is the positive-vote fraction.
class RandomForestModel final : public ModelImpl {
public:
    std::vector<Tree> trees;

    double score_row(std::span<const double> row) const override {
        std::size_t votes = 0;
        for (const auto& t : trees) {
            votes += t.value_at(row) > 0.5 ? 1u : 0u;
        }
        return static_cast<double>(votes) / static_cast<double>(trees.size());
    }

    ScoreKind score_kind() const override { return ScoreKind::Probability; }

    nlohmann::json state_json() const override {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& t : trees) {
            arr.push_back(to_json(t));
        }
        return {{"trees", arr}};
    }

    static std::shared_ptr<RandomForestModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<RandomForestModel>();
        for (const auto& t : j.at("trees")) {
            m->trees.push_back(tree_from_json(t));
        }
        return m;
    }
};

inline TrainedModel fit_random_forest(const LabeledDataset& train, int n_trees,
                                      std::uint64_t seed, bool bootstrap = true,
                                      int max_features = 0) {
    detail::check_trainable(train, "rf");
    if (n_trees < 1) {
        throw ConfigError("rf: n_trees must be >= 1");
    }
    if (max_features < 0 || static_cast<std::size_t>(max_features) > train.p()) {
        throw ConfigError("rf: max_features out of range");
    }
    const int mtry =
        max_features > 0
            ? max_features
            : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(train.p()))));

    auto model = std::make_shared<RandomForestModel>();
    model->trees.resize(static_cast<std::size_t>(n_trees));
    const std::size_t n = train.n();

    // Tree t draws everything from its own (seed, t) stream, so the forest is
    // identical for any thread count.
    parallel_for(static_cast<std::size_t>(n_trees), [&](std::size_t t) {
        Rng rng(derive_seed(seed, stream::kTree, t));
        std::vector<int> rows(n);
        if (bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                rows[i] = static_cast<int>(rng.uniform_index(n));
            }
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        TreeOptions opt;
        opt.max_features = static_cast<std::size_t>(mtry) < train.p() ? mtry : 0;
        opt.rng = &rng;
        model->trees[t] = build_tree(train.X, GiniCriterion(train.y), std::move(rows), opt);
    });

    TrainedModel out;
    out.feature_count = train.p();
    out.impl = std::move(model);
    return out;
}

} // namespace tremor
