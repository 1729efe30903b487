#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "rllim/blackbox.hpp"
#include "rllim/interpretable.hpp"
#include "rllim/preprocess.hpp"
#include "rllim/random.hpp"

namespace rllim {

// ---- LIME --------------------------------------------------------------------

struct LimeConfig {
    std::size_t n_perturbations = 5000;
    double sigma = 0.0;           // kernel width in scaled space, 0 -> 0.75 sqrt(d)
    double perturb_scale = 1.0;   // Gaussian std in scaled units
    LocalKind local_kind = LocalKind::ridge;
    double alpha = 1.0;
    std::uint64_t seed = 0;
};

// Perturbs x_t with Gaussians in minmax-scaled space, queries the black
// box on the de-scaled perturbations, kernel-weights the samples by
// exp(-||p - x_t||^2 / sigma^2) and fits the local model on the scaled
// (perturbation, prediction) pairs. Coefficients therefore live in scaled
// units; LIME never sees the training instances beyond the scaler stats.
Explanation lime_explain(std::span<const double> x_t, const BlackBoxModel& model,
                         const MinMaxScaler& train_stats, const LimeConfig& config,
                         std::size_t id = 0);

// ---- SILO --------------------------------------------------------------------

struct SiloConfig {
    std::size_t n_trees = 100;
    double min_leaf = 10.0;
    std::uint64_t seed = 0;
    int threads = 0;
};

// Supervised neighborhoods from a regression forest trained on the
// auxiliary targets: w_i(x_t) = (1/T) sum_t 1[leaf_t(x_t) == leaf_t(x_i)]
// / |members of leaf_t(x_t)|.
class SiloExplainer {
public:
    SiloExplainer(ForestModel forest, const AuxiliaryDataset& aux);

    static SiloExplainer train(const AuxiliaryDataset& aux, const SiloConfig& config);

    std::vector<double> weights(std::span<const double> x_t) const;

    Explanation explain(std::span<const double> x_t, double blackbox_target, LocalKind kind,
                        double alpha, std::size_t id = 0) const;

    const ForestModel& forest() const { return forest_; }
    const AuxiliaryDataset& aux() const { return *aux_; }

private:
    ForestModel forest_;
    const AuxiliaryDataset* aux_;
    // leaf index of every training row per tree, plus member counts
    std::vector<std::vector<std::int32_t>> row_leaf_;
    std::vector<std::unordered_map<std::int32_t, std::size_t>> leaf_count_;
};

// ---- MAPLE -------------------------------------------------------------------

struct MapleConfig {
    std::size_t k_max = 25;  // grid is {1..min(d, k_max)}
    std::vector<std::size_t> k_grid;  // overrides k_max when non-empty
};

// SILO weights plus feature selection: features ranked by forest
// importance; k chosen once per explainer by the mean fidelity error of
// top-k restricted fits over the probe set.
class MapleExplainer {
public:
    MapleExplainer(const SiloExplainer& silo, const AuxiliaryDataset& aux_probe, LocalKind kind,
                   double alpha, const MapleConfig& config, int threads = 0);

    std::size_t chosen_k() const { return chosen_k_; }
    const std::vector<std::size_t>& feature_order() const { return feature_order_; }

    Explanation explain(std::span<const double> x_t, double blackbox_target,
                        std::size_t id = 0) const;

private:
    const SiloExplainer* silo_;
    LocalKind kind_;
    double alpha_;
    std::size_t chosen_k_ = 0;
    std::vector<std::size_t> feature_order_;  // importance-descending

    LocalModel fit_restricted(std::span<const double> weights, std::size_t k) const;
    friend struct MapleTestHook;
};

}  // namespace rllim
