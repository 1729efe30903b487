#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rllim/matrix.hpp"
#include "rllim/random.hpp"

#include <json.hpp>

namespace rllim {

enum class SplitCriterion { variance, gini };

struct CartConfig {
    int max_depth = 0;              // 0 = unlimited
    double min_leaf_weight = 1.0;   // minimum weighted mass per leaf
    SplitCriterion criterion = SplitCriterion::variance;
    std::size_t feature_subsample = 0;       // candidate features per split, 0 = all
    std::vector<std::size_t> allowed_features;  // split candidates, empty = all
};

struct CartNode {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;   // weighted mean target (probability for gini)
    double weight = 0.0;  // weighted mass reaching the node
    double gain = 0.0;    // impurity decrease of the split, weighted
    std::int32_t left = -1;
    std::int32_t right = -1;
};

// Weighted CART. Splits maximize weighted impurity reduction; equal-gain
// ties resolve to the lowest feature index, then the lowest threshold, so
// fits are reproducible. A row with weight zero never influences the tree.
class CartTree {
public:
    CartTree() = default;

    static CartTree fit(const Matrix& x, std::span<const double> y, std::span<const double> w,
                        const CartConfig& config, RandomSource* feature_rng = nullptr);

    double predict(std::span<const double> x) const;
    std::int32_t leaf_index(std::span<const double> x) const;

    int depth() const;
    const std::vector<CartNode>& nodes() const { return nodes_; }
    bool empty() const { return nodes_.empty(); }

    // per-feature weighted impurity decrease, unnormalized
    void accumulate_importance(std::span<double> importance) const;

    nlohmann::json to_json() const;
    static CartTree from_json(const nlohmann::json& j);

private:
    std::vector<CartNode> nodes_;
};

}  // namespace rllim
