#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "tremor/matrix.hpp"
#include "tremor/random.hpp"

namespace tremor {

// Binary tree over numeric features. feature == -1 marks a leaf; interior
// nodes route x[feature] <= threshold to the left child.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double value_at(std::span<const double> row) const {
        int idx = 0;
        while (nodes[idx].feature >= 0) {
            const TreeNode& n = nodes[idx];
            idx = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes[idx].value;
    }
};

inline nlohmann::json to_json(const Tree& t) {
    nlohmann::json j;
    auto& feature = j["feature"] = nlohmann::json::array();
    auto& threshold = j["threshold"] = nlohmann::json::array();
    auto& left = j["left"] = nlohmann::json::array();
    auto& right = j["right"] = nlohmann::json::array();
    auto& value = j["value"] = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
    }
    return j;
}

inline Tree tree_from_json(const nlohmann::json& j) {
    Tree t;
    const auto& feature = j.at("feature");
    const auto& threshold = j.at("threshold");
    const auto& left = j.at("left");
    const auto& right = j.at("right");
    const auto& value = j.at("value");
    t.nodes.resize(feature.size());
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        t.nodes[i].feature = feature[i].get<int>();
        t.nodes[i].threshold = threshold[i].get<double>();
        t.nodes[i].left = left[i].get<int>();
        t.nodes[i].right = right[i].get<int>();
        t.nodes[i].value = value[i].get<double>();
    }
    return t;
}

struct TreeOptions {
    int max_depth = 0;    // 0 = unbounded
    int max_features = 0; // 0 = all features; otherwise sampled per node
    Rng* rng = nullptr;   // required when max_features > 0
};

// Gini impurity decrease over (optionally weighted) binary labels.
// Leaf payload is the positive-class weight fraction.
class GiniCriterion {
public:
    GiniCriterion(const std::vector<int>& labels, const std::vector<double>* weights = nullptr)
        : labels_(&labels), weights_(weights) {}

    void begin_node(const std::vector<int>& rows) {
        total_w_ = total_w1_ = 0.0;
        for (int r : rows) {
            const double w = weight(r);
            total_w_ += w;
            total_w1_ += (*labels_)[static_cast<std::size_t>(r)] == 1 ? w : 0.0;
        }
    }

    bool node_is_pure() const { return total_w1_ <= 0.0 || total_w1_ >= total_w_; }

    void begin_feature() { left_w_ = left_w1_ = 0.0; }

    void move_left(int r) {
        const double w = weight(r);
        left_w_ += w;
        left_w1_ += (*labels_)[static_cast<std::size_t>(r)] == 1 ? w : 0.0;
    }

    double split_gain() const {
        const double right_w = total_w_ - left_w_;
        const double right_w1 = total_w1_ - left_w1_;
        if (left_w_ <= 0.0 || right_w <= 0.0) {
            return 0.0;
        }
        return impurity(total_w_, total_w1_) -
               (left_w_ / total_w_) * impurity(left_w_, left_w1_) -
               (right_w / total_w_) * impurity(right_w, right_w1);
    }

    double leaf_value(const std::vector<int>& rows) const {
        double w = 0.0;
        double w1 = 0.0;
        for (int r : rows) {
            const double wr = weight(r);
            w += wr;
            w1 += (*labels_)[static_cast<std::size_t>(r)] == 1 ? wr : 0.0;
        }
        return w > 0.0 ? w1 / w : 0.5;
    }

private:
    double weight(int r) const {
        return weights_ ? (*weights_)[static_cast<std::size_t>(r)] : 1.0;
    }

    static double impurity(double w, double w1) {
        const double p1 = w1 / w;
        const double p0 = 1.0 - p1;
        return 1.0 - p1 * p1 - p0 * p0;
    }

    const std::vector<int>* labels_;
    const std::vector<double>* weights_;
    double total_w_ = 0.0, total_w1_ = 0.0;
    double left_w_ = 0.0, left_w1_ = 0.0;
};

// Squared-error split on gradient targets scored by Friedman's improvement,
// (nl*nr/(nl+nr)) * (meanL - meanR)^2. Leaf payload is one Newton step,
// sum(residual) / sum(hessian).
class FriedmanMseCriterion {
public:
    FriedmanMseCriterion(const std::vector<double>& residual, const std::vector<double>& hessian)
        : residual_(&residual), hessian_(&hessian) {}

    void begin_node(const std::vector<int>& rows) {
        total_n_ = static_cast<double>(rows.size());
        total_sum_ = 0.0;
        double lo = (*residual_)[static_cast<std::size_t>(rows.front())];
        double hi = lo;
        for (int r : rows) {
            const double v = (*residual_)[static_cast<std::size_t>(r)];
            total_sum_ += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        pure_ = lo == hi;
    }

    bool node_is_pure() const { return pure_; }

    void begin_feature() {
        left_n_ = 0.0;
        left_sum_ = 0.0;
    }

    void move_left(int r) {
        left_n_ += 1.0;
        left_sum_ += (*residual_)[static_cast<std::size_t>(r)];
    }

    double split_gain() const {
        const double right_n = total_n_ - left_n_;
        if (left_n_ <= 0.0 || right_n <= 0.0) {
            return 0.0;
        }
        const double diff = left_sum_ / left_n_ - (total_sum_ - left_sum_) / right_n;
        return left_n_ * right_n / total_n_ * diff * diff;
    }

    double leaf_value(const std::vector<int>& rows) const {
        double num = 0.0;
        double den = 0.0;
        for (int r : rows) {
            num += (*residual_)[static_cast<std::size_t>(r)];
            den += (*hessian_)[static_cast<std::size_t>(r)];
        }
        return num / std::max(den, 1e-12);
    }

private:
    const std::vector<double>* residual_;
    const std::vector<double>* hessian_;
    double total_n_ = 0.0, total_sum_ = 0.0;
    double left_n_ = 0.0, left_sum_ = 0.0;
    bool pure_ = false;
};

// Second-order gain with L2 regularisation lambda:
// 0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)). Leaf weight is -G/(H+l).
class XgbCriterion {
public:
    XgbCriterion(const std::vector<double>& grad, const std::vector<double>& hess, double lambda)
        : grad_(&grad), hess_(&hess), lambda_(lambda) {}

    void begin_node(const std::vector<int>& rows) {
        total_g_ = total_h_ = 0.0;
        for (int r : rows) {
            total_g_ += (*grad_)[static_cast<std::size_t>(r)];
            total_h_ += (*hess_)[static_cast<std::size_t>(r)];
        }
    }

    bool node_is_pure() const { return false; }

    void begin_feature() { left_g_ = left_h_ = 0.0; }

    void move_left(int r) {
        left_g_ += (*grad_)[static_cast<std::size_t>(r)];
        left_h_ += (*hess_)[static_cast<std::size_t>(r)];
    }

    double split_gain() const {
        const double right_g = total_g_ - left_g_;
        const double right_h = total_h_ - left_h_;
        return 0.5 * (left_g_ * left_g_ / (left_h_ + lambda_) +
                      right_g * right_g / (right_h + lambda_) -
                      total_g_ * total_g_ / (total_h_ + lambda_));
    }

    double leaf_value(const std::vector<int>& rows) const {
        double g = 0.0;
        double h = 0.0;
        for (int r : rows) {
            g += (*grad_)[static_cast<std::size_t>(r)];
            h += (*hess_)[static_cast<std::size_t>(r)];
        }
        return -g / (h + lambda_);
    }

private:
    const std::vector<double>* grad_;
    const std::vector<double>* hess_;
    double lambda_;
    double total_g_ = 0.0, total_h_ = 0.0;
    double left_g_ = 0.0, left_h_ = 0.0;
};

namespace detail {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Candidate thresholds are midpoints between consecutive distinct sorted
// values. The first strictly-best candidate wins, which resolves ties toward
// the lowest feature index, then the lowest threshold.
template <typename Criterion>
SplitChoice best_split(const Matrix& X, Criterion& crit, const std::vector<int>& rows,
                       const std::vector<int>& features, std::vector<int>& scratch) {
    SplitChoice best;
    scratch = rows;
    for (int f : features) {
        std::sort(scratch.begin(), scratch.end(), [&](int a, int b) {
            const double va = X.at(static_cast<std::size_t>(a), static_cast<std::size_t>(f));
            const double vb = X.at(static_cast<std::size_t>(b), static_cast<std::size_t>(f));
            return va != vb ? va < vb : a < b;
        });
        crit.begin_feature();
        for (std::size_t i = 0; i + 1 < scratch.size(); ++i) {
            crit.move_left(scratch[i]);
            const double a = X.at(static_cast<std::size_t>(scratch[i]), static_cast<std::size_t>(f));
            const double b =
                X.at(static_cast<std::size_t>(scratch[i + 1]), static_cast<std::size_t>(f));
            if (a == b) {
                continue;
            }
            const double gain = crit.split_gain();
            if (gain > best.gain) {
                double mid = a + (b - a) / 2.0;
                if (mid >= b) {
                    mid = a; // keep both sides non-empty after rounding
                }
                best = {f, mid, gain};
            }
        }
    }
    return best;
}

template <typename Criterion>
int build_node(Tree& tree, const Matrix& X, Criterion& crit, std::vector<int>& rows, int depth,
               const TreeOptions& opt, std::vector<int>& scratch) {
    const int node_idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    crit.begin_node(rows);
    const bool depth_capped = opt.max_depth > 0 && depth >= opt.max_depth;
    SplitChoice split;
    if (rows.size() >= 2 && !depth_capped && !crit.node_is_pure()) {
        std::vector<int> features;
        const int p = static_cast<int>(X.cols());
        if (opt.max_features > 0 && opt.max_features < p) {
            std::vector<int> all(static_cast<std::size_t>(p));
            std::iota(all.begin(), all.end(), 0);
            for (int i = 0; i < opt.max_features; ++i) {
                const std::size_t j =
                    static_cast<std::size_t>(i) +
                    opt.rng->uniform_index(static_cast<std::size_t>(p - i));
                std::swap(all[static_cast<std::size_t>(i)], all[j]);
            }
            features.assign(all.begin(), all.begin() + opt.max_features);
            std::sort(features.begin(), features.end());
        } else {
            features.resize(static_cast<std::size_t>(p));
            std::iota(features.begin(), features.end(), 0);
        }
        split = best_split(X, crit, rows, features, scratch);
    }

    if (split.feature < 0 || split.gain <= 0.0) {
        tree.nodes[static_cast<std::size_t>(node_idx)].value = crit.leaf_value(rows);
        return node_idx;
    }

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (int r : rows) {
        const double v = X.at(static_cast<std::size_t>(r), static_cast<std::size_t>(split.feature));
        (v <= split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(node_idx)].feature = split.feature;
    tree.nodes[static_cast<std::size_t>(node_idx)].threshold = split.threshold;
    const int left_idx = build_node(tree, X, crit, left_rows, depth + 1, opt, scratch);
    tree.nodes[static_cast<std::size_t>(node_idx)].left = left_idx;
    const int right_idx = build_node(tree, X, crit, right_rows, depth + 1, opt, scratch);
    tree.nodes[static_cast<std::size_t>(node_idx)].right = right_idx;
    return node_idx;
}

} // namespace detail

template <typename Criterion>
Tree build_tree(const Matrix& X, Criterion crit, std::vector<int> rows, const TreeOptions& opt) {
    Tree tree;
    std::vector<int> scratch;
    detail::build_node(tree, X, crit, rows, 0, opt, scratch);
    return tree;
}

} // namespace tremor
