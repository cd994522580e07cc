#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tremor/models.hpp"

#include "support/synth.hpp"

using namespace tremor;

namespace {

LabeledDataset one_dim(std::vector<double> xs, std::vector<int> ys) {
    LabeledDataset ds;
    ds.negative_class_name = "NEG";
    ds.feature_names = {"x"};
    ds.X = Matrix(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        ds.X.at(i, 0) = xs[i];
    }
    ds.y = std::move(ys);
    return ds;
}

double training_accuracy(const TrainedModel& model, const LabeledDataset& ds) {
    const std::vector<int> pred = predict(model, ds.X);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        correct += pred[i] == ds.y[i] ? 1u : 0u;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.n());
}

} // namespace

TEST_CASE("gboost with zero stages predicts the majority class everywhere") {
    const auto ds = one_dim({0, 1, 2, 3, 4, 5, 6}, {1, 1, 0, 0, 0, 0, 0});
    const TrainedModel model = fit_gradient_boosting(ds, 0.01, 0);
    for (int pred : predict(model, ds.X)) {
        REQUIRE(pred == 0);
    }
    // The prior is the training log-odds.
    const double f0 = decision_score(model, ds.X)[0];
    CHECK(f0 == Catch::Approx(std::log(2.0 / 5.0)).margin(1e-12));
}

TEST_CASE("gboost training loss is non-increasing stage by stage") {
    const auto ds = testsupport::random_dataset(60, 4, 9, 0.4);
    const TrainedModel model = fit_gradient_boosting(ds, 0.01, 200, 3);
    REQUIRE(model.training_loss.size() == 201);
    for (std::size_t s = 1; s < model.training_loss.size(); ++s) {
        REQUIRE(model.training_loss[s] <= model.training_loss[s - 1] + 1e-12);
    }
}

TEST_CASE("gboost separates blobs and rejects bad knobs") {
    const auto ds = testsupport::make_blobs(50, 2, 6.0, 21);
    const TrainedModel model = fit_gradient_boosting(ds, 0.1, 100, 3);
    CHECK(training_accuracy(model, ds) >= 0.99);

    CHECK_THROWS_AS(fit_gradient_boosting(ds, 0.0, 10), ConfigError);
    CHECK_THROWS_AS(fit_gradient_boosting(ds, 0.1, -1), ConfigError);
    CHECK_THROWS_AS(fit_gradient_boosting(ds, 0.1, 10, 0), ConfigError);
}

TEST_CASE("adaboost converges on threshold-separable 1-D data within 5 rounds") {
    const auto ds = one_dim({0, 1, 2, 3, 4, 5}, {0, 0, 0, 1, 1, 1});
    const TrainedModel model = fit_adaboost(ds, 1.0, 5);
    CHECK(training_accuracy(model, ds) == 1.0);
}

TEST_CASE("adaboost with one round equals the lone calibrated stump") {
    const auto ds = testsupport::make_blobs(20, 2, 3.0, 77);
    const TrainedModel boosted = fit_adaboost(ds, 1.0, 1);

    // The first stump is fit on uniform weights, so it matches a depth-1
    // Gini tree; the score is half the log-odds of its leaf probability.
    ModelSpec stump_spec = ModelSpec::with_defaults(Algorithm::Dt);
    stump_spec.params["max_depth"] = 1;
    const TrainedModel stump = fit(stump_spec, ds);

    const auto probe = testsupport::random_dataset(30, 2, 5, 0.5);
    const std::vector<double> boosted_scores = decision_score(boosted, probe.X);
    const std::vector<double> stump_probs = decision_score(stump, probe.X);
    for (std::size_t i = 0; i < probe.n(); ++i) {
        const double expected = AdaBoostModel::half_log_odds(stump_probs[i]);
        REQUIRE(boosted_scores[i] == Catch::Approx(expected).margin(1e-12));
    }
}

TEST_CASE("adaboost stops early when stumps cannot beat chance") {
    // XOR-style data defeats any single axis-aligned stump.
    LabeledDataset ds;
    ds.negative_class_name = "NEG";
    ds.feature_names = {"a", "b"};
    ds.X = Matrix(8, 2);
    const double pts[8][2] = {{0, 0}, {1, 1}, {0.1, 0.1}, {0.9, 0.9},
                              {0, 1}, {1, 0}, {0.1, 0.9}, {0.9, 0.1}};
    for (std::size_t i = 0; i < 8; ++i) {
        ds.X.at(i, 0) = pts[i][0];
        ds.X.at(i, 1) = pts[i][1];
        ds.y.push_back(i < 4 ? 1 : 0);
    }
    const TrainedModel model = fit_adaboost(ds, 1.0, 50);
    const auto* impl = dynamic_cast<const AdaBoostModel*>(model.impl.get());
    REQUIRE(impl != nullptr);
    CHECK(impl->stumps.size() < 50);
}

TEST_CASE("xgboost single round on 4 points matches the hand-computed gain formula") {
    // x = {0,1,2,3}, y = {0,0,1,1}, F0 = 0 so p = 1/2, g = {1/2,1/2,-1/2,-1/2},
    // h = 1/4 each. Candidate gains with lambda = 1:
    //   split 0.5 or 2.5: 0.5*(0.25/1.25 + 0.25/1.75) ~ 0.1714
    //   split 1.5:        0.5*(1/1.5 + 1/1.5)         ~ 0.6667  <- best
    // Leaf weights -G/(H+lambda) = -/+ (1/1.5).
    const auto ds = one_dim({0, 1, 2, 3}, {0, 0, 1, 1});
    const TrainedModel model = fit_xgboost_style(ds, 0.3, 1, 1.0, 6);
    const auto* impl = dynamic_cast<const XgBoostModel*>(model.impl.get());
    REQUIRE(impl != nullptr);
    REQUIRE(impl->trees.size() == 1);
    const Tree& tree = impl->trees[0];
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 0);
    CHECK(tree.nodes[0].threshold == 1.5);

    const std::vector<double> scores = decision_score(model, ds.X);
    const double leaf = 1.0 / 1.5;
    CHECK(scores[0] == Catch::Approx(0.3 * -leaf).margin(1e-15));
    CHECK(scores[3] == Catch::Approx(0.3 * leaf).margin(1e-15));
}

TEST_CASE("xgboost leaf weights vanish as lambda grows") {
    const auto ds = testsupport::make_blobs(25, 2, 4.0, 13);
    const TrainedModel model = fit_xgboost_style(ds, 0.3, 3, 1e12, 6);
    for (double s : decision_score(model, ds.X)) {
        REQUIRE(std::abs(s) < 1e-6); // prediction collapses to the base score
    }
}

TEST_CASE("xgboost training loss is non-increasing and blobs separate") {
    const auto ds = testsupport::random_dataset(60, 3, 29, 0.5);
    const TrainedModel model = fit_xgboost_style(ds, 0.3, 200, 1.0, 6);
    REQUIRE(model.training_loss.size() == 201);
    for (std::size_t s = 1; s < model.training_loss.size(); ++s) {
        REQUIRE(model.training_loss[s] <= model.training_loss[s - 1] + 1e-12);
    }

    const auto blobs = testsupport::make_blobs(50, 2, 6.0, 31);
    CHECK(training_accuracy(fit_xgboost_style(blobs, 0.3, 50, 1.0, 6), blobs) >= 0.99);

    CHECK_THROWS_AS(fit_xgboost_style(blobs, 0.3, -1, 1.0, 6), ConfigError);
    CHECK_THROWS_AS(fit_xgboost_style(blobs, 0.3, 10, -0.5, 6), ConfigError);
}

TEST_CASE("xgboost with zero rounds scores the base margin everywhere") {
    const auto ds = one_dim({0, 1, 2, 3}, {1, 1, 0, 0});
    const TrainedModel model = fit_xgboost_style(ds, 0.3, 0, 1.0, 6);
    for (double s : decision_score(model, ds.X)) {
        REQUIRE(s == 0.0);
    }
}
