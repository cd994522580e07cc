#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tremor/models/common.hpp"

namespace tremor {

// k-nearest-neighbours over the stored training set. The score is the
// positive fraction among the k nearest rows, with every row tied at the
// k-th distance included.
class KnnModel final : public ModelImpl {
public:
    Matrix train_X;
    std::vector<int> train_y;
    int k = 5;

    double score_row(std::span<const double> row) const override {
        const std::size_t n = train_X.rows();
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            dist.emplace_back(squared_distance(train_X.row(i), row), i);
        }
        std::sort(dist.begin(), dist.end());
        const double k_dist = dist[static_cast<std::size_t>(k) - 1].first;
        std::size_t included = 0;
        std::size_t positives = 0;
        for (const auto& [d, idx] : dist) {
            if (d > k_dist) {
                break;
            }
            ++included;
            positives += train_y[idx] == 1 ? 1u : 0u;
        }
        return static_cast<double>(positives) / static_cast<double>(included);
    }

    ScoreKind score_kind() const override { return ScoreKind::Probability; }

    nlohmann::json state_json() const override {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < train_X.rows(); ++i) {
            auto r = train_X.row(i);
            rows.push_back(std::vector<double>(r.begin(), r.end()));
        }
        return {{"train_X", rows}, {"train_y", train_y}, {"k", k}};
    }

    static std::shared_ptr<KnnModel> from_json(const nlohmann::json& j) {
        auto m = std::make_shared<KnnModel>();
        for (const auto& row : j.at("train_X")) {
            m->train_X.push_row(row.get<std::vector<double>>());
        }
        m->train_y = j.at("train_y").get<std::vector<int>>();
        m->k = j.at("k").get<int>();
        return m;
    }
};

inline TrainedModel fit_knn(const LabeledDataset& train, int k) {
    detail::check_trainable(train, "knn");
    if (k < 1) {
        throw ConfigError("knn: k must be >= 1");
    }
    if (static_cast<std::size_t>(k) > train.n()) {
        throw ConfigError("knn: k = " + std::to_string(k) + " exceeds the training size " +
                          std::to_string(train.n()));
    }
    auto model = std::make_shared<KnnModel>();
    model->train_X = train.X;
    model->train_y = train.y;
    model->k = k;

    TrainedModel out;
    out.feature_count = train.p();
    out.impl = std::move(model);
    return out;
}

} // namespace tremor
