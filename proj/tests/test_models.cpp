#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "tremor/models.hpp"
#include "tremor/preprocess.hpp"

#include "support/synth.hpp"

using namespace tremor;

namespace {

double training_accuracy(const TrainedModel& model, const LabeledDataset& ds) {
    const std::vector<int> pred = predict(model, ds.X);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        correct += pred[i] == ds.y[i] ? 1u : 0u;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.n());
}

LabeledDataset flipped(const LabeledDataset& ds) {
    LabeledDataset out = ds;
    for (int& label : out.y) {
        label = 1 - label;
    }
    return out;
}

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

// Stock defaults with trimmed ensemble sizes, so the invariant matrix
// over all eight algorithms stays fast.
ModelSpec small_spec(Algorithm a, std::uint64_t seed) {
    ModelSpec spec = ModelSpec::with_defaults(a, seed);
    switch (a) {
        case Algorithm::Rf: spec.params["n_trees"] = 51; break;
        case Algorithm::GBoost:
            spec.params["n_stages"] = 60;
            spec.params["learning_rate"] = 0.1;
            break;
        case Algorithm::XgBoost: spec.params["n_rounds"] = 40; break;
        case Algorithm::AdaBoost: spec.params["n_estimators"] = 15; break;
        default: break;
    }
    return spec;
}

} // namespace

TEST_CASE("fit dispatches every algorithm and stamps the feature count") {
    const auto ds = testsupport::make_blobs(30, 3, 6.0, 5);
    for (Algorithm a : kAllAlgorithms) {
        const TrainedModel model = fit(small_spec(a, 11), ds);
        CHECK(model.feature_count == ds.p());
        CHECK(predict(model, ds.X).size() == ds.n());
    }
}

TEST_CASE("fit rejects degenerate inputs") {
    auto single = testsupport::make_blobs(10, 2, 4.0, 1);
    single.y.assign(single.n(), 1);
    CHECK_THROWS_AS(fit(ModelSpec::with_defaults(Algorithm::Dt), single), FitError);

    auto nonfinite = testsupport::make_blobs(10, 2, 4.0, 2);
    nonfinite.X.at(3, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit(ModelSpec::with_defaults(Algorithm::Knn), nonfinite), FitError);

    ModelSpec bad = ModelSpec::with_defaults(Algorithm::Svm);
    bad.params["gamma"] = 2.0;
    CHECK_THROWS_AS(fit(bad, testsupport::make_blobs(10, 2, 4.0, 3)), ConfigError);
}

TEST_CASE("same spec and seed give identical predictions") {
    const auto ds = testsupport::make_blobs(25, 4, 3.0, 7);
    const auto probe = testsupport::random_dataset(40, 4, 8, 0.5);
    for (Algorithm a : kAllAlgorithms) {
        const TrainedModel m1 = fit(small_spec(a, 123), ds);
        const TrainedModel m2 = fit(small_spec(a, 123), ds);
        CHECK(decision_score(m1, probe.X) == decision_score(m2, probe.X));
    }
}

TEST_CASE("all eight default specs fit the PDRBD-shaped training data") {
    const FeatureTable enc = encode_categoricals(testsupport::synthetic_table(42));
    auto [pdrbd, pdhc] = derive_subsets(enc);
    const SplitPair split = stratified_split(pdrbd, 0.25, 42);
    PreprocessParams prep;
    prep.seed = 42;
    const PreprocessResult pp = preprocess_pipeline(split.train, prep);

    for (Algorithm a : kAllAlgorithms) {
        // Stock defaults, including the 1000-tree forest and the
        // 1000-stage boosters.
        const TrainedModel model = fit(ModelSpec::with_defaults(a, 1), pp.clean);
        CHECK(model.feature_count == 64);
        CHECK(training_accuracy(model, pp.clean) > 0.9);
    }
}

TEST_CASE("predict validates the column count and handles empty input") {
    const auto ds = testsupport::make_blobs(15, 3, 5.0, 9);
    const TrainedModel model = fit(ModelSpec::with_defaults(Algorithm::Dt), ds);
    CHECK_THROWS_AS(predict(model, Matrix(2, 4)), DataError);
    CHECK(predict(model, Matrix(0, 3)).empty());
    CHECK(decision_score(model, Matrix(0, 3)).empty());
}

TEST_CASE("unpruned decision tree memorizes consistent training data") {
    const auto ds = testsupport::random_dataset(60, 4, 77, 0.5);
    const TrainedModel model = fit(ModelSpec::with_defaults(Algorithm::Dt), ds);
    CHECK(predict(model, ds.X) == ds.y);
}

TEST_CASE("decision tree splits 1-D data at the gini-optimal midpoint") {
    const auto ds = one_dim({1, 2, 3, 4}, {0, 0, 1, 1});
    const TrainedModel model = fit(ModelSpec::with_defaults(Algorithm::Dt), ds);
    const auto* impl = dynamic_cast<const DecisionTreeModel*>(model.impl.get());
    REQUIRE(impl != nullptr);
    // 2.5 is the only candidate that zeroes the Gini impurity.
    REQUIRE(impl->tree.nodes.size() == 3);
    CHECK(impl->tree.nodes[0].feature == 0);
    CHECK(impl->tree.nodes[0].threshold == 2.5);

    Matrix probe(2, 1);
    probe.at(0, 0) = 2.4;
    probe.at(1, 0) = 2.6;
    CHECK(predict(model, probe) == std::vector<int>{0, 1});
}

TEST_CASE("tree builder collapses pure labels to a single leaf") {
    LabeledDataset pure = one_dim({1, 2, 3, 4}, {1, 1, 1, 1});
    std::vector<int> rows = {0, 1, 2, 3};
    const Tree tree = build_tree(pure.X, GiniCriterion(pure.y), rows, TreeOptions{});
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
    CHECK(tree.nodes[0].value == 1.0);
}

TEST_CASE("decision tree respects max_depth") {
    const auto ds = testsupport::random_dataset(80, 3, 5, 0.5);
    ModelSpec spec = ModelSpec::with_defaults(Algorithm::Dt);
    spec.params["max_depth"] = 1;
    const TrainedModel model = fit(spec, ds);
    const auto* impl = dynamic_cast<const DecisionTreeModel*>(model.impl.get());
    REQUIRE(impl != nullptr);
    CHECK(impl->tree.nodes.size() <= 3);
}

TEST_CASE("random forest with one unbagged full-feature tree equals the decision tree") {
    const auto ds = testsupport::random_dataset(50, 4, 19, 0.5);
    ModelSpec rf = ModelSpec::with_defaults(Algorithm::Rf, 4);
    rf.params["n_trees"] = 1;
    rf.params["bootstrap"] = false;
    rf.params["max_features"] = static_cast<int>(ds.p());
    const TrainedModel forest = fit(rf, ds);
    const TrainedModel tree = fit(ModelSpec::with_defaults(Algorithm::Dt), ds);

    const auto probe = testsupport::random_dataset(60, 4, 21, 0.5);
    CHECK(predict(forest, probe.X) == predict(tree, probe.X));
}

TEST_CASE("random forest is invariant to the worker thread count") {
    const auto ds = testsupport::make_blobs(30, 4, 4.0, 3);
    ModelSpec spec = small_spec(Algorithm::Rf, 99);

    setenv("TREMOR_BENCH_THREADS", "1", 1);
    const TrainedModel serial = fit(spec, ds);
    setenv("TREMOR_BENCH_THREADS", "3", 1);
    const TrainedModel threaded = fit(spec, ds);
    unsetenv("TREMOR_BENCH_THREADS");

    CHECK(save_model(serial).dump() == save_model(threaded).dump());
}

TEST_CASE("knn nearest-neighbour behaviour and tie rules") {
    const auto ds = testsupport::random_dataset(40, 3, 33, 0.5);
    ModelSpec k1 = ModelSpec::with_defaults(Algorithm::Knn);
    k1.params["k"] = 1;
    CHECK(training_accuracy(fit(k1, ds), ds) == 1.0); // self is the nearest row

    ModelSpec kn = ModelSpec::with_defaults(Algorithm::Knn);
    kn.params["k"] = static_cast<int>(ds.n());
    const TrainedModel majority = fit(kn, ds);
    const int majority_label = ds.count(1) > ds.n() - ds.count(1) ? 1 : 0;
    for (int pred : predict(majority, ds.X)) {
        REQUIRE(pred == majority_label);
    }

    // Query equidistant from one 0-row and one 1-row with k=1: the tied
    // neighbourhood includes both and the vote tie resolves to class 0.
    LabeledDataset pair = one_dim({0.0, 2.0}, {0, 1});
    const TrainedModel knn = fit(k1, pair);
    Matrix query(1, 1);
    query.at(0, 0) = 1.0;
    CHECK(decision_score(knn, query)[0] == 0.5);
    CHECK(predict(knn, query)[0] == 0);

    ModelSpec too_big = ModelSpec::with_defaults(Algorithm::Knn);
    too_big.params["k"] = static_cast<int>(ds.n()) + 1;
    CHECK_THROWS_AS(fit(too_big, ds), ConfigError);
}

TEST_CASE("logistic regression finds a zero intercept on symmetric data") {
    Rng rng(55);
    const std::size_t half = 40;
    LabeledDataset ds;
    ds.negative_class_name = "NEG";
    ds.feature_names = {"a", "b"};
    ds.X = Matrix(2 * half, 2);
    for (std::size_t i = 0; i < half; ++i) {
        const double x0 = rng.normal() + 1.0;
        const double x1 = rng.normal() - 0.5;
        ds.X.at(i, 0) = x0;
        ds.X.at(i, 1) = x1;
        ds.y.push_back(1);
        ds.X.at(half + i, 0) = -x0;
        ds.X.at(half + i, 1) = -x1;
        ds.y.push_back(0);
    }

    ModelSpec spec = ModelSpec::with_defaults(Algorithm::Lr);
    spec.params["tol"] = 1e-10;
    spec.params["max_iter"] = 5000;
    const TrainedModel model = fit(spec, ds);
    const auto* impl = dynamic_cast<const LinearModel*>(model.impl.get());
    REQUIRE(impl != nullptr);
    CHECK(std::abs(impl->intercept) < 1e-6);
    CHECK(model.converged);
}

TEST_CASE("logistic objective gradient matches central finite differences") {
    Rng rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10 + rng.uniform_index(30);
        const std::size_t p = 1 + rng.uniform_index(4);
        const auto ds = testsupport::random_dataset(n, p, rng.next_u64(), 0.5);
        const double C = 0.5 + 2.0 * rng.uniform();
        detail::LogisticObjective obj{ds.X, ds.y, C};

        std::vector<double> theta(p + 1);
        for (double& t : theta) {
            t = rng.normal() * 0.5;
        }
        std::vector<double> grad(p + 1);
        obj.gradient(theta, grad);

        const double h = 1e-6;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            std::vector<double> lo = theta;
            std::vector<double> hi = theta;
            lo[j] -= h;
            hi[j] += h;
            const double numeric = (obj.value(hi) - obj.value(lo)) / (2.0 * h);
            const double scale = std::max({1.0, std::abs(grad[j]), std::abs(numeric)});
            REQUIRE(std::abs(grad[j] - numeric) / scale < 1e-5);
        }
    }
}

TEST_CASE("lr with zero weights scores zero everywhere") {
    auto impl = LinearModel::from_json({{"weights", {0.0, 0.0}}, {"intercept", 0.0}});
    TrainedModel model;
    model.spec = ModelSpec::with_defaults(Algorithm::Lr);
    model.feature_count = 2;
    model.impl = impl;
    const auto probe = testsupport::random_dataset(20, 2, 3, 0.5);
    for (double s : decision_score(model, probe.X)) {
        REQUIRE(s == 0.0);
    }
}

TEST_CASE("svm separates wide-margin blobs and enforces its pass budget") {
    const auto ds = testsupport::make_blobs(25, 2, 6.0, 31);
    const TrainedModel model = fit(ModelSpec::with_defaults(Algorithm::Svm, 1), ds);
    CHECK(training_accuracy(model, ds) == 1.0);

    ModelSpec starved = ModelSpec::with_defaults(Algorithm::Svm, 1);
    starved.params["max_passes"] = 1;
    CHECK_THROWS_AS(fit(starved, testsupport::make_blobs(40, 2, 0.4, 32)), FitError);
}

TEST_CASE("svm with vanishing C predicts the majority class") {
    auto ds = testsupport::make_blobs(12, 2, 3.0, 41);
    LabeledDataset tilted = ds;
    for (std::size_t i = 0; i < 8; ++i) {
        tilted.X.push_row(ds.X.row(i));
        tilted.y.push_back(0);
    }
    ModelSpec spec = ModelSpec::with_defaults(Algorithm::Svm, 2);
    spec.params["C"] = 1e-9;
    const TrainedModel model = fit(spec, tilted);
    for (int pred : predict(model, tilted.X)) {
        REQUIRE(pred == 0);
    }
}

TEST_CASE("every algorithm separates margin-6-sigma blobs") {
    const auto ds = testsupport::make_blobs(100, 2, 6.0, 1234);
    for (Algorithm a : kAllAlgorithms) {
        const TrainedModel model = fit(ModelSpec::with_defaults(a, 5), ds);
        INFO(algorithm_name(a));
        CHECK(training_accuracy(model, ds) >= 0.99);
    }
}

TEST_CASE("scores order separated blobs and stay threshold-consistent") {
    const auto ds = testsupport::make_blobs(40, 2, 6.0, 99);
    const auto probe = testsupport::random_dataset(100, 2, 17, 0.5);
    for (Algorithm a : kAllAlgorithms) {
        const TrainedModel model = fit(small_spec(a, 3), ds);
        INFO(algorithm_name(a));

        // Positive-class training scores all exceed negative-class scores.
        const std::vector<double> train_scores = decision_score(model, ds.X);
        double max_neg = -1e300;
        double min_pos = 1e300;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (ds.y[i] == 1) {
                min_pos = std::min(min_pos, train_scores[i]);
            } else {
                max_neg = std::max(max_neg, train_scores[i]);
            }
        }
        CHECK(max_neg < min_pos);

        // predict == 1 exactly when the score clears the neutral threshold.
        const std::vector<double> scores = decision_score(model, probe.X);
        const std::vector<int> preds = predict(model, probe.X);
        const double threshold = model.threshold();
        const bool margin = model.impl->score_kind() == ScoreKind::Margin;
        for (std::size_t i = 0; i < probe.n(); ++i) {
            const bool above = margin ? scores[i] >= threshold : scores[i] > threshold;
            REQUIRE(preds[i] == (above ? 1 : 0));
        }
    }
}

TEST_CASE("label flip symmetry") {
    const auto ds = testsupport::make_blobs(30, 3, 6.0, 777);
    const auto flipped_ds = flipped(ds);
    const auto probe = testsupport::make_blobs(10, 3, 6.0, 778);

    for (Algorithm a : kAllAlgorithms) {
        INFO(algorithm_name(a));
        const TrainedModel m = fit(small_spec(a, 42), ds);
        const TrainedModel mf = fit(small_spec(a, 42), flipped_ds);

        const std::vector<int> p = predict(m, probe.X);
        const std::vector<int> pf = predict(mf, probe.X);
        for (std::size_t i = 0; i < p.size(); ++i) {
            REQUIRE(p[i] == 1 - pf[i]);
        }

        if (m.impl->score_kind() == ScoreKind::Margin) {
            const std::vector<double> s = decision_score(m, probe.X);
            const std::vector<double> sf = decision_score(mf, probe.X);
            for (std::size_t i = 0; i < s.size(); ++i) {
                REQUIRE(s[i] == Catch::Approx(-sf[i]).margin(1e-9));
            }
        }
    }
}

TEST_CASE("model json round-trip reproduces predictions bit-exactly") {
    const auto ds = testsupport::make_blobs(25, 3, 4.0, 31415);
    const auto probe = testsupport::random_dataset(50, 3, 27, 0.5);
    for (Algorithm a : kAllAlgorithms) {
        INFO(algorithm_name(a));
        const TrainedModel model = fit(small_spec(a, 7), ds);
        const nlohmann::json doc = save_model(model);
        const TrainedModel reloaded = load_model(nlohmann::json::parse(doc.dump()));
        CHECK(reloaded.feature_count == model.feature_count);
        CHECK(decision_score(reloaded, probe.X) == decision_score(model, probe.X));
        CHECK(predict(reloaded, probe.X) == predict(model, probe.X));
    }

    nlohmann::json bad = save_model(fit(small_spec(Algorithm::Dt, 1), ds));
    bad["format_version"] = 99;
    CHECK_THROWS_AS(load_model(bad), ConfigError);
}
