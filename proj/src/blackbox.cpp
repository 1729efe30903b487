#include "rllim/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rllim/threading.hpp"

namespace rllim {

std::vector<double> BlackBoxModel::predict_batch(const Matrix& x) const {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
    return out;
}

// ---- Oracle ------------------------------------------------------------------

double oracle_predict(SynKind kind, std::span<const double> x) {
    if (x.size() != kSynDim) throw std::invalid_argument("invalid input: oracle expects 11 features");
    return syn_label(kind, x);
}

double OracleModel::predict(std::span<const double> x) const { return oracle_predict(kind_, x); }

nlohmann::json OracleModel::to_json() const {
    return {{"format", "rllim-blackbox"}, {"version", 1},   {"kind", "oracle"},
            {"task", "regression"},       {"dim", kSynDim}, {"syn", to_string(kind_)}};
}

// ---- MLP ---------------------------------------------------------------------

double MlpModel::predict(std::span<const double> x) const { return net_.forward_single(x); }

nlohmann::json MlpModel::to_json() const {
    return {{"format", "rllim-blackbox"},
            {"version", 1},
            {"kind", "mlp"},
            {"task", to_string(task_)},
            {"dim", net_.shape().input_dim},
            {"net", net_.to_json()}};
}

std::unique_ptr<BlackBoxModel> train_mlp(const Dataset& train, const MlpConfig& config) {
    if (train.size() == 0) throw std::invalid_argument("train_mlp: empty dataset");
    const std::size_t d = train.dim();
    const std::size_t n = train.size();

    nn::NetShape shape;
    shape.input_dim = d;
    shape.hidden = config.hidden;
    if (shape.hidden.empty()) {
        for (std::size_t div : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{8}})
            shape.hidden.push_back(std::max<std::size_t>(1, d / div));
    }
    shape.output_dim = 1;
    shape.hidden_act = nn::Activation::relu;
    shape.output_act =
        train.task == TaskKind::classification ? nn::Activation::sigmoid : nn::Activation::linear;

    RandomSource root(config.seed);
    RandomSource init_rng = root.child("mlp_init");
    nn::FeedForwardNet net(shape);
    net.init_params(init_rng);

    // trailing 10% of the training split is the early-stopping slice
    const std::size_t n_val = std::min(n > 10 ? n / 10 : std::size_t{0}, n - 1);
    const std::size_t n_fit = n - n_val;

    auto eval_loss = [&](std::size_t lo, std::size_t hi) {
        double loss = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double p = net.forward_single(train.features.row(i));
            const double y = train.labels[i];
            if (train.task == TaskKind::classification) {
                const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
                loss += -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
            } else {
                loss += (p - y) * (p - y);
            }
        }
        return hi > lo ? loss / static_cast<double>(hi - lo) : 0.0;
    };

    nn::Adam opt(net.param_count(), {config.lr});
    std::vector<double> grad(net.param_count());
    std::vector<std::vector<double>> acts;
    std::vector<double> dz;

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = net.params();
    nlohmann::json last_finite = net.to_json();
    std::size_t since_best = 0;

    RandomSource shuffle_rng = root.child("mlp_shuffle");
    std::vector<std::size_t> order(n_fit);
    for (std::size_t i = 0; i < n_fit; ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n_fit; start += config.batch_size) {
            const std::size_t bsz = std::min(config.batch_size, n_fit - start);
            acts.assign(1, {});
            acts[0].resize(bsz * d);
            for (std::size_t r = 0; r < bsz; ++r) {
                const auto row = train.features.row(order[start + r]);
                std::copy(row.begin(), row.end(), acts[0].begin() + r * d);
            }
            net.forward_batch(bsz, acts);
            dz.resize(bsz);
            bool finite = true;
            for (std::size_t r = 0; r < bsz; ++r) {
                const double p = acts.back()[r];
                const double y = train.labels[order[start + r]];
                // both losses reduce to (p - y) at the output pre-activation
                const double g = (train.task == TaskKind::classification)
                                     ? (p - y)
                                     : 2.0 * (p - y);
                dz[r] = g / static_cast<double>(bsz);
                if (!std::isfinite(p)) finite = false;
            }
            if (!finite) throw DivergedError("diverged: non-finite loss during MLP training", last_finite);
            std::fill(grad.begin(), grad.end(), 0.0);
            net.backward_batch(bsz, acts, dz, grad);
            opt.step(net.params(), grad);
        }

        bool params_finite = true;
        for (double v : net.params())
            if (!std::isfinite(v)) params_finite = false;
        const double val = n_val > 0 ? eval_loss(n_fit, n) : eval_loss(0, n_fit);
        if (!params_finite || !std::isfinite(val))
            throw DivergedError("diverged: non-finite loss during MLP training", last_finite);
        last_finite = MlpModel(net, train.task).to_json();

        if (val < best_val - 1e-12) {
            best_val = val;
            best_params = net.params();
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    net.params() = best_params;
    return std::make_unique<MlpModel>(std::move(net), train.task);
}

// ---- Forest ------------------------------------------------------------------

double ForestModel::predict(std::span<const double> x) const {
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(x);
    return acc / static_cast<double>(trees_.size());
}

nlohmann::json ForestModel::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) trees.push_back(t.to_json());
    return {{"format", "rllim-blackbox"},
            {"version", 1},
            {"kind", "forest"},
            {"task", to_string(task_)},
            {"dim", importance_.size()},
            {"importance", importance_},
            {"trees", std::move(trees)}};
}

namespace {

std::vector<double> normalized_importance(const std::vector<CartTree>& trees, std::size_t d) {
    std::vector<double> imp(d, 0.0);
    for (const auto& t : trees) t.accumulate_importance(imp);
    double total = 0.0;
    for (double v : imp) total += v;
    if (total > 0.0)
        for (double& v : imp) v /= total;
    return imp;
}

std::vector<CartTree> fit_bagged_trees(const Matrix& x, std::span<const double> y,
                                       const CartConfig& tree_cfg, std::size_t n_trees,
                                       std::uint64_t seed, int threads) {
    const std::size_t n = x.rows();
    std::vector<CartTree> trees(n_trees);
    RandomSource root(seed);
    parallel_for(n_trees, resolve_threads(threads), [&](std::size_t t) {
        RandomSource tree_rng = root.child("tree", t);
        const auto idx = tree_rng.sample_with_replacement(n, n);
        // bootstrap as per-row multiplicity weights
        std::vector<double> w(n, 0.0);
        for (std::size_t i : idx) w[i] += 1.0;
        trees[t] = CartTree::fit(x, y, w, tree_cfg, &tree_rng);
    });
    return trees;
}

}  // namespace

std::unique_ptr<BlackBoxModel> train_forest(const Dataset& train, const ForestConfig& config) {
    if (train.size() == 0) throw std::invalid_argument("train_forest: empty dataset");
    const std::size_t d = train.dim();

    CartConfig tree_cfg;
    tree_cfg.max_depth = config.max_depth;
    tree_cfg.min_leaf_weight = config.min_leaf_weight;
    tree_cfg.criterion = train.task == TaskKind::classification ? SplitCriterion::gini
                                                                : SplitCriterion::variance;
    if (config.feature_subsample > 0) {
        tree_cfg.feature_subsample = config.feature_subsample;
    } else if (train.task == TaskKind::classification) {
        tree_cfg.feature_subsample = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(d)));
    } else {
        tree_cfg.feature_subsample = std::max<std::size_t>(1, d / 3);
    }

    auto trees = fit_bagged_trees(train.features, train.labels, tree_cfg, config.n_trees,
                                  config.seed, config.threads);
    auto importance = normalized_importance(trees, d);
    return std::make_unique<ForestModel>(std::move(trees), train.task, std::move(importance));
}

ForestModel train_regression_forest(const Matrix& x, std::span<const double> y,
                                    const ForestConfig& config) {
    CartConfig tree_cfg;
    tree_cfg.max_depth = config.max_depth;
    tree_cfg.min_leaf_weight = config.min_leaf_weight;
    tree_cfg.criterion = SplitCriterion::variance;
    tree_cfg.feature_subsample =
        config.feature_subsample > 0 ? config.feature_subsample : std::max<std::size_t>(1, x.cols() / 3);
    auto trees = fit_bagged_trees(x, y, tree_cfg, config.n_trees, config.seed, config.threads);
    auto importance = normalized_importance(trees, x.cols());
    return ForestModel(std::move(trees), TaskKind::regression, std::move(importance));
}

// ---- Auxiliary ---------------------------------------------------------------

double logit_clamped(double p) {
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    return std::log(pc / (1.0 - pc));
}

AuxiliaryDataset build_auxiliary(const BlackBoxModel& model, const Matrix& features, AuxRole role) {
    AuxiliaryDataset aux;
    aux.features = features;
    aux.role = role;
    aux.targets.resize(features.rows());
    const bool to_logit = model.task() == TaskKind::classification;
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const double p = model.predict(features.row(r));
        aux.targets[r] = to_logit ? logit_clamped(p) : p;
    }
    return aux;
}

// ---- Serialization -------------------------------------------------------------

std::unique_ptr<BlackBoxModel> BlackBoxModel::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "rllim-blackbox")
        throw std::invalid_argument("not a black-box model file");
    const std::string kind = j.at("kind").get<std::string>();
    const TaskKind task = task_kind_from_string(j.at("task").get<std::string>());
    if (kind == "oracle") return std::make_unique<OracleModel>(syn_kind_from_string(j.at("syn")));
    if (kind == "mlp")
        return std::make_unique<MlpModel>(nn::FeedForwardNet::from_json(j.at("net")), task);
    if (kind == "forest") {
        std::vector<CartTree> trees;
        for (const auto& jt : j.at("trees")) trees.push_back(CartTree::from_json(jt));
        auto importance = j.at("importance").get<std::vector<double>>();
        return std::make_unique<ForestModel>(std::move(trees), task, std::move(importance));
    }
    throw std::invalid_argument("unknown black-box kind: " + kind);
}

void save_blackbox(const BlackBoxModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << model.to_json().dump(2) << '\n';
}

std::unique_ptr<BlackBoxModel> load_blackbox(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open black-box model file " + path);
    nlohmann::json j;
    in >> j;
    return BlackBoxModel::from_json(j);
}

}  // namespace rllim
