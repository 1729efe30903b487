#pragma once

#include <span>
#include <string>
#include <vector>

#include "rllim/blackbox.hpp"
#include "rllim/cart.hpp"
#include "rllim/ridge.hpp"

#include <json.hpp>

namespace rllim {

enum class LocalKind { ridge, shallow_tree };

std::string to_string(LocalKind k);
LocalKind local_kind_from_string(const std::string& s);

// A fitted low-capacity surrogate: ridge coefficients or a regression
// tree of depth <= 3, plus fit diagnostics.
struct LocalModel {
    LocalKind kind = LocalKind::ridge;
    RidgeFit ridge;
    CartTree tree;
    double weight_sum = 0.0;
    std::size_t selected_count = 0;  // weights > 0

    double predict(std::span<const double> x) const;

    nlohmann::json to_json() const;
    static LocalModel from_json(const nlohmann::json& j);
};

inline constexpr int kShallowTreeDepth = 3;

LocalModel fit_local_ridge(const AuxiliaryDataset& aux, std::span<const double> weights,
                           double alpha);

LocalModel fit_local_tree(const AuxiliaryDataset& aux, std::span<const double> weights,
                          int max_depth = kShallowTreeDepth);

LocalModel fit_local(LocalKind kind, const AuxiliaryDataset& aux, std::span<const double> weights,
                     double alpha);

// Stage 2: the same interpretable family fitted once, with uniform
// weights, on the whole auxiliary training set. Fixed afterwards.
LocalModel fit_global_baseline(const AuxiliaryDataset& aux_train, LocalKind kind, double alpha);

// Per-instance output shared by RL-LIM and every baseline method, so the
// metric suite never branches on the producer.
struct Explanation {
    std::size_t id = 0;
    std::string method;
    std::vector<double> weights;  // over the auxiliary training set; empty for LIME
    LocalModel local;
    double local_pred = 0.0;
    double blackbox_pred = 0.0;  // in target space (logit for classification)
    std::vector<std::size_t> top_ids;

    // ridge coefficient vector (empty for tree surrogates)
    std::span<const double> coefficients() const {
        return local.kind == LocalKind::ridge ? std::span<const double>(local.ridge.coef)
                                              : std::span<const double>();
    }
};

}  // namespace rllim
