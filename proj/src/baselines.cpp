#include "rllim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rllim/threading.hpp"

namespace rllim {

namespace {

std::vector<std::size_t> top_weight_ids(std::span<const double> w, std::size_t k) {
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    k = std::min(k, w.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (w[a] != w[b]) return w[a] > w[b];
        return a < b;
    });
    order.resize(k);
    return order;
}

}  // namespace

// ---- LIME --------------------------------------------------------------------

Explanation lime_explain(std::span<const double> x_t, const BlackBoxModel& model,
                         const MinMaxScaler& train_stats, const LimeConfig& config,
                         std::size_t id) {
    const std::size_t d = x_t.size();
    if (train_stats.dim() != d) throw std::invalid_argument("invalid input: scaler dim mismatch");
    if (config.n_perturbations < d + 2)
        throw std::invalid_argument("invalid input: perturbation count must be >= d + 2");
    const double sigma = config.sigma > 0.0 ? config.sigma : 0.75 * std::sqrt(static_cast<double>(d));

    std::vector<double> center(d);
    train_stats.transform_row(x_t, center);

    RandomSource rng = RandomSource(config.seed).child("lime_perturb", id);
    const std::size_t n = config.n_perturbations;
    AuxiliaryDataset samples;
    samples.features = Matrix(n, d);
    samples.targets.resize(n);
    std::vector<double> kernel(n);
    std::vector<double> raw(d);
    const bool to_logit = model.task() == TaskKind::classification;
    for (std::size_t r = 0; r < n; ++r) {
        auto row = samples.features.row(r);
        double dist2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double delta = config.perturb_scale * rng.normal();
            row[c] = center[c] + delta;
            dist2 += delta * delta;
        }
        kernel[r] = std::exp(-dist2 / (sigma * sigma));
        train_stats.inverse_row(row, raw);
        const double p = model.predict(raw);
        samples.targets[r] = to_logit ? logit_clamped(p) : p;
    }

    Explanation ex;
    ex.id = id;
    ex.method = "lime";
    ex.local = fit_local(config.local_kind, samples, kernel, config.alpha);
    ex.local_pred = ex.local.predict(center);
    const double bb = model.predict(x_t);
    ex.blackbox_pred = to_logit ? logit_clamped(bb) : bb;
    return ex;
}

// ---- SILO --------------------------------------------------------------------

SiloExplainer::SiloExplainer(ForestModel forest, const AuxiliaryDataset& aux)
    : forest_(std::move(forest)), aux_(&aux) {
    const auto& trees = forest_.trees();
    row_leaf_.resize(trees.size());
    leaf_count_.resize(trees.size());
    for (std::size_t t = 0; t < trees.size(); ++t) {
        row_leaf_[t].resize(aux.size());
        for (std::size_t i = 0; i < aux.size(); ++i) {
            const std::int32_t leaf = trees[t].leaf_index(aux.features.row(i));
            row_leaf_[t][i] = leaf;
            ++leaf_count_[t][leaf];
        }
    }
}

SiloExplainer SiloExplainer::train(const AuxiliaryDataset& aux, const SiloConfig& config) {
    ForestConfig fc;
    fc.n_trees = config.n_trees;
    fc.min_leaf_weight = config.min_leaf;
    fc.seed = config.seed;
    fc.threads = config.threads;
    return SiloExplainer(train_regression_forest(aux.features, aux.targets, fc), aux);
}

std::vector<double> SiloExplainer::weights(std::span<const double> x_t) const {
    const auto& trees = forest_.trees();
    std::vector<double> w(aux_->size(), 0.0);
    const double tree_share = 1.0 / static_cast<double>(trees.size());
    for (std::size_t t = 0; t < trees.size(); ++t) {
        const std::int32_t leaf = trees[t].leaf_index(x_t);
        const auto it = leaf_count_[t].find(leaf);
        if (it == leaf_count_[t].end() || it->second == 0) continue;
        const double share = tree_share / static_cast<double>(it->second);
        const auto& rl = row_leaf_[t];
        for (std::size_t i = 0; i < rl.size(); ++i)
            if (rl[i] == leaf) w[i] += share;
    }
    return w;
}

Explanation SiloExplainer::explain(std::span<const double> x_t, double blackbox_target,
                                   LocalKind kind, double alpha, std::size_t id) const {
    Explanation ex;
    ex.id = id;
    ex.method = "silo";
    ex.weights = weights(x_t);
    ex.local = fit_local(kind, *aux_, ex.weights, alpha);
    ex.local_pred = ex.local.predict(x_t);
    ex.blackbox_pred = blackbox_target;
    ex.top_ids = top_weight_ids(ex.weights, 10);
    return ex;
}

// ---- MAPLE -------------------------------------------------------------------

MapleExplainer::MapleExplainer(const SiloExplainer& silo, const AuxiliaryDataset& aux_probe,
                               LocalKind kind, double alpha, const MapleConfig& config, int threads)
    : silo_(&silo), kind_(kind), alpha_(alpha) {
    const std::size_t d = silo.aux().dim();

    feature_order_.resize(d);
    std::iota(feature_order_.begin(), feature_order_.end(), 0);
    const auto& imp = silo.forest().importance();
    std::stable_sort(feature_order_.begin(), feature_order_.end(), [&](std::size_t a, std::size_t b) {
        if (imp[a] != imp[b]) return imp[a] > imp[b];
        return a < b;
    });

    std::vector<std::size_t> grid = config.k_grid;
    if (grid.empty()) {
        for (std::size_t k = 1; k <= std::min(d, config.k_max); ++k) grid.push_back(k);
    }

    // pick k once: mean fidelity error of top-k restricted fits on the probe set
    const std::size_t m = aux_probe.size();
    std::vector<std::vector<double>> probe_w(m);
    parallel_for(m, resolve_threads(threads), [&](std::size_t p) {
        probe_w[p] = silo.weights(aux_probe.features.row(p));
    });

    std::vector<double> err(grid.size(), 0.0);
    parallel_for(grid.size(), resolve_threads(threads), [&](std::size_t gi) {
        double acc = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            const LocalModel fit = fit_restricted(probe_w[p], grid[gi]);
            acc += std::abs(fit.predict(aux_probe.features.row(p)) - aux_probe.targets[p]);
        }
        err[gi] = acc / static_cast<double>(m);
    });

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < grid.size(); ++gi)
        if (err[gi] < err[best]) best = gi;
    chosen_k_ = grid[best];
}

LocalModel MapleExplainer::fit_restricted(std::span<const double> weights, std::size_t k) const {
    const AuxiliaryDataset& aux = silo_->aux();
    const std::size_t d = aux.dim();
    k = std::min(k, d);
    std::vector<std::size_t> selected(feature_order_.begin(), feature_order_.begin() + k);
    std::sort(selected.begin(), selected.end());

    if (kind_ == LocalKind::shallow_tree) {
        CartConfig cfg;
        cfg.max_depth = kShallowTreeDepth;
        cfg.min_leaf_weight = 1.0;
        cfg.criterion = SplitCriterion::variance;
        if (k < d) cfg.allowed_features = selected;
        LocalModel m;
        m.kind = LocalKind::shallow_tree;
        m.tree = CartTree::fit(aux.features, aux.targets, weights, cfg);
        m.weight_sum = 0.0;
        for (double w : weights) m.weight_sum += w;
        m.selected_count = std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; });
        return m;
    }

    // ridge on the nonzero-weight rows restricted to the selected columns,
    // scattered back to a full-width coefficient vector
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] > 0.0) nz.push_back(i);
    if (nz.empty()) throw std::invalid_argument("degenerate weights");

    Matrix sub(nz.size(), k);
    std::vector<double> y(nz.size());
    std::vector<double> w(nz.size());
    for (std::size_t r = 0; r < nz.size(); ++r) {
        const auto src = aux.features.row(nz[r]);
        for (std::size_t c = 0; c < k; ++c) sub(r, c) = src[selected[c]];
        y[r] = aux.targets[nz[r]];
        w[r] = weights[nz[r]];
    }
    const RidgeFit fit = weighted_ridge_fit(sub, y, w, alpha_);

    LocalModel m;
    m.kind = LocalKind::ridge;
    m.ridge.coef.assign(d, 0.0);
    for (std::size_t c = 0; c < k; ++c) m.ridge.coef[selected[c]] = fit.coef[c];
    m.ridge.intercept = fit.intercept;
    m.ridge.alpha = fit.alpha;
    m.weight_sum = 0.0;
    for (double v : weights) m.weight_sum += v;
    m.selected_count = nz.size();
    return m;
}

Explanation MapleExplainer::explain(std::span<const double> x_t, double blackbox_target,
                                    std::size_t id) const {
    Explanation ex;
    ex.id = id;
    ex.method = "maple";
    ex.weights = silo_->weights(x_t);
    ex.local = fit_restricted(ex.weights, chosen_k_);
    ex.local_pred = ex.local.predict(x_t);
    ex.blackbox_pred = blackbox_target;
    ex.top_ids = top_weight_ids(ex.weights, 10);
    return ex;
}

}  // namespace rllim
