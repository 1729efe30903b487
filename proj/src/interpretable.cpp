#include "rllim/interpretable.hpp"

#include <stdexcept>

namespace rllim {

std::string to_string(LocalKind k) {
    return k == LocalKind::ridge ? "ridge" : "shallow_tree";
}

LocalKind local_kind_from_string(const std::string& s) {
    if (s == "ridge") return LocalKind::ridge;
    if (s == "shallow_tree" || s == "tree") return LocalKind::shallow_tree;
    throw std::invalid_argument("unknown local model kind: " + s);
}

double LocalModel::predict(std::span<const double> x) const {
    return kind == LocalKind::ridge ? ridge_predict(ridge, x) : tree.predict(x);
}

nlohmann::json LocalModel::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)},
                     {"weight_sum", weight_sum},
                     {"selected_count", selected_count}};
    if (kind == LocalKind::ridge) {
        j["coef"] = ridge.coef;
        j["intercept"] = ridge.intercept;
        j["alpha"] = ridge.alpha;
    } else {
        j["tree"] = tree.to_json();
    }
    return j;
}

LocalModel LocalModel::from_json(const nlohmann::json& j) {
    LocalModel m;
    m.kind = local_kind_from_string(j.at("kind").get<std::string>());
    m.weight_sum = j.at("weight_sum").get<double>();
    m.selected_count = j.at("selected_count").get<std::size_t>();
    if (m.kind == LocalKind::ridge) {
        m.ridge.coef = j.at("coef").get<std::vector<double>>();
        m.ridge.intercept = j.at("intercept").get<double>();
        m.ridge.alpha = j.at("alpha").get<double>();
    } else {
        m.tree = CartTree::from_json(j.at("tree"));
    }
    return m;
}

namespace {

void check_weights(const AuxiliaryDataset& aux, std::span<const double> weights) {
    if (weights.size() != aux.size()) throw std::invalid_argument("invalid input: weight length");
}

void fill_diagnostics(LocalModel& m, std::span<const double> weights) {
    m.weight_sum = 0.0;
    m.selected_count = 0;
    for (double w : weights) {
        m.weight_sum += w;
        if (w > 0.0) ++m.selected_count;
    }
}

}  // namespace

LocalModel fit_local_ridge(const AuxiliaryDataset& aux, std::span<const double> weights,
                           double alpha) {
    check_weights(aux, weights);
    LocalModel m;
    m.kind = LocalKind::ridge;
    m.ridge = weighted_ridge_fit(aux.features, aux.targets, weights, alpha);
    fill_diagnostics(m, weights);
    return m;
}

LocalModel fit_local_tree(const AuxiliaryDataset& aux, std::span<const double> weights,
                          int max_depth) {
    check_weights(aux, weights);
    CartConfig cfg;
    cfg.max_depth = max_depth;
    cfg.min_leaf_weight = 1.0;
    cfg.criterion = SplitCriterion::variance;
    LocalModel m;
    m.kind = LocalKind::shallow_tree;
    m.tree = CartTree::fit(aux.features, aux.targets, weights, cfg);
    fill_diagnostics(m, weights);
    return m;
}

LocalModel fit_local(LocalKind kind, const AuxiliaryDataset& aux, std::span<const double> weights,
                     double alpha) {
    return kind == LocalKind::ridge ? fit_local_ridge(aux, weights, alpha)
                                    : fit_local_tree(aux, weights);
}

LocalModel fit_global_baseline(const AuxiliaryDataset& aux_train, LocalKind kind, double alpha) {
    if (aux_train.size() == 0) throw std::invalid_argument("invalid input: empty auxiliary set");
    const std::vector<double> uniform(aux_train.size(), 1.0);
    return fit_local(kind, aux_train, uniform, alpha);
}

}  // namespace rllim
