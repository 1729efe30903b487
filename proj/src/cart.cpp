#include "rllim/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rllim {

namespace {

struct BuildCtx {
    const Matrix& x;
    std::span<const double> y;
    std::span<const double> w;
    const CartConfig& cfg;
    RandomSource* rng;
    std::vector<CartNode>* nodes;
    // scratch reused across nodes
    std::vector<std::size_t> sorted;
};

// Weighted impurity mass of a node: variance -> sum w (y - mean)^2,
// gini -> W * 2 p (1-p). Both expressed so that parent - children is the
// split gain in comparable units.
double impurity_mass(double sw, double swy, double swyy, SplitCriterion crit) {
    if (sw <= 0.0) return 0.0;
    const double mean = swy / sw;
    if (crit == SplitCriterion::variance) return swyy - swy * mean;
    // binary gini with y in {0,1}: p = mean
    return 2.0 * sw * mean * (1.0 - mean);
}

std::int32_t build_node(BuildCtx& ctx, std::vector<std::size_t>& members, int depth) {
    double sw = 0.0;
    double swy = 0.0;
    double swyy = 0.0;
    for (std::size_t i : members) {
        sw += ctx.w[i];
        swy += ctx.w[i] * ctx.y[i];
        swyy += ctx.w[i] * ctx.y[i] * ctx.y[i];
    }

    const std::int32_t id = static_cast<std::int32_t>(ctx.nodes->size());
    ctx.nodes->push_back({});
    {
        auto& node = (*ctx.nodes)[id];
        node.value = sw > 0.0 ? swy / sw : 0.0;
        node.weight = sw;
    }

    const bool depth_capped = ctx.cfg.max_depth > 0 && depth >= ctx.cfg.max_depth;
    if (depth_capped || sw < 2.0 * ctx.cfg.min_leaf_weight || members.size() < 2) return id;

    const double parent_imp = impurity_mass(sw, swy, swyy, ctx.cfg.criterion);
    if (parent_imp <= 1e-12) return id;

    // candidate features, ascending so ties resolve to the lowest index
    const std::size_t d = ctx.x.cols();
    std::vector<std::size_t> feats;
    if (!ctx.cfg.allowed_features.empty()) {
        feats = ctx.cfg.allowed_features;
        std::sort(feats.begin(), feats.end());
    } else {
        feats.resize(d);
        std::iota(feats.begin(), feats.end(), 0);
    }
    if (ctx.cfg.feature_subsample > 0 && ctx.cfg.feature_subsample < feats.size() &&
        ctx.rng != nullptr) {
        const auto pick = ctx.rng->sample_without_replacement(feats.size(), ctx.cfg.feature_subsample);
        std::vector<std::size_t> chosen;
        chosen.reserve(pick.size());
        for (std::size_t p : pick) chosen.push_back(feats[p]);
        std::sort(chosen.begin(), chosen.end());
        feats = std::move(chosen);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 1e-12;  // require strictly positive gain

    auto& order = ctx.sorted;
    for (std::size_t f : feats) {
        order = members;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return ctx.x(a, f) < ctx.x(b, f);
        });
        double lw = 0.0;
        double lwy = 0.0;
        double lwyy = 0.0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const std::size_t i = order[k];
            lw += ctx.w[i];
            lwy += ctx.w[i] * ctx.y[i];
            lwyy += ctx.w[i] * ctx.y[i] * ctx.y[i];
            const double v = ctx.x(i, f);
            const double nv = ctx.x(order[k + 1], f);
            if (nv <= v) continue;  // no boundary between equal values
            const double rw = sw - lw;
            if (lw < ctx.cfg.min_leaf_weight || rw < ctx.cfg.min_leaf_weight) continue;
            const double gain = parent_imp -
                                impurity_mass(lw, lwy, lwyy, ctx.cfg.criterion) -
                                impurity_mass(rw, swy - lwy, swyy - lwyy, ctx.cfg.criterion);
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_threshold = 0.5 * (v + nv);
            }
        }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    left.reserve(members.size());
    right.reserve(members.size());
    for (std::size_t i : members) {
        (ctx.x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
            .push_back(i);
    }
    if (left.empty() || right.empty()) return id;  // numeric ties collapsed a side

    members.clear();
    members.shrink_to_fit();

    const std::int32_t l = build_node(ctx, left, depth + 1);
    const std::int32_t r = build_node(ctx, right, depth + 1);
    auto& node = (*ctx.nodes)[id];
    node.leaf = false;
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.gain = best_gain;
    node.left = l;
    node.right = r;
    return id;
}

}  // namespace

CartTree CartTree::fit(const Matrix& x, std::span<const double> y, std::span<const double> w,
                       const CartConfig& config, RandomSource* feature_rng) {
    if (x.rows() != y.size() || x.rows() != w.size() || x.rows() == 0)
        throw std::invalid_argument("cart: shape mismatch");
    double sw = 0.0;
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("cart: bad weight");
        sw += v;
    }
    if (sw <= 0.0) throw std::invalid_argument("degenerate weights");

    std::vector<std::size_t> members;
    members.reserve(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (w[i] > 0.0) members.push_back(i);

    CartTree tree;
    BuildCtx ctx{x, y, w, config, feature_rng, &tree.nodes_, {}};
    build_node(ctx, members, 0);
    return tree;
}

std::int32_t CartTree::leaf_index(std::span<const double> x) const {
    std::int32_t id = 0;
    while (!nodes_[id].leaf) {
        const auto& n = nodes_[id];
        id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return id;
}

double CartTree::predict(std::span<const double> x) const { return nodes_[leaf_index(x)].value; }

int CartTree::depth() const {
    if (nodes_.empty()) return 0;
    // iterative DFS with explicit depths
    int max_depth = 0;
    std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        max_depth = std::max(max_depth, d);
        if (!nodes_[id].leaf) {
            stack.push_back({nodes_[id].left, d + 1});
            stack.push_back({nodes_[id].right, d + 1});
        }
    }
    return max_depth;
}

void CartTree::accumulate_importance(std::span<double> importance) const {
    for (const auto& n : nodes_) {
        if (!n.leaf) importance[static_cast<std::size_t>(n.feature)] += n.gain;
    }
}

nlohmann::json CartTree::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& n : nodes_) {
        j.push_back({{"leaf", n.leaf},
                     {"feature", n.feature},
                     {"threshold", n.threshold},
                     {"value", n.value},
                     {"weight", n.weight},
                     {"gain", n.gain},
                     {"left", n.left},
                     {"right", n.right}});
    }
    return j;
}

CartTree CartTree::from_json(const nlohmann::json& j) {
    CartTree t;
    for (const auto& jn : j) {
        CartNode n;
        n.leaf = jn.at("leaf").get<bool>();
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.value = jn.at("value").get<double>();
        n.weight = jn.at("weight").get<double>();
        n.gain = jn.at("gain").get<double>();
        n.left = jn.at("left").get<std::int32_t>();
        n.right = jn.at("right").get<std::int32_t>();
        t.nodes_.push_back(n);
    }
    return t;
}

}  // namespace rllim
