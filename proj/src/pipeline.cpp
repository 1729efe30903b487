#include "rllim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rllim/threading.hpp"

namespace rllim {

namespace {

std::shared_ptr<const BlackBoxModel> train_stage0(const Dataset& train,
                                                  const PipelineConfig& config) {
    if (config.blackbox_kind == "oracle") {
        if (!train.syn)
            throw std::invalid_argument("pipeline: oracle black box needs a synthetic dataset");
        if (config.scale_features)
            throw std::invalid_argument("pipeline: oracle black box requires scale_features=false");
        return std::make_shared<OracleModel>(*train.syn);
    }
    if (config.blackbox_kind == "mlp") {
        MlpConfig mc = config.mlp;
        if (mc.seed == 0) mc.seed = RandomSource(config.seed).child("mlp_train").seed();
        return std::shared_ptr<const BlackBoxModel>(train_mlp(train, mc));
    }
    if (config.blackbox_kind == "forest") {
        ForestConfig fc = config.forest;
        if (fc.seed == 0) fc.seed = RandomSource(config.seed).child("forest_train").seed();
        if (fc.threads == 0) fc.threads = config.threads;
        return std::shared_ptr<const BlackBoxModel>(train_forest(train, fc));
    }
    throw std::invalid_argument("pipeline: unknown black-box kind '" + config.blackbox_kind + "'");
}

}  // namespace

PipelineResult run_pipeline(const Dataset& train, const std::optional<Dataset>& probe,
                            const PipelineConfig& config,
                            std::shared_ptr<const BlackBoxModel> pre_trained) {
    if (train.size() == 0) throw std::invalid_argument("pipeline: empty training set");

    Dataset train_part = train;
    Dataset probe_part;
    if (probe.has_value()) {
        probe_part = *probe;
    } else {
        if (!(config.probe_fraction > 0.0) || config.probe_fraction >= 1.0)
            throw std::invalid_argument(
                "pipeline: no probe set given and probe_fraction is not in (0, 1)");
        std::vector<std::size_t> order(train.size());
        std::iota(order.begin(), order.end(), 0);
        RandomSource rng = RandomSource(config.seed).child("probe_split");
        rng.shuffle(order);
        const auto n_probe = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(config.probe_fraction *
                                                     static_cast<double>(train.size()))));
        if (n_probe >= train.size())
            throw std::invalid_argument("pipeline: probe fraction leaves no training data");
        const std::vector<std::size_t> probe_idx(order.begin(), order.begin() + n_probe);
        const std::vector<std::size_t> train_idx(order.begin() + n_probe, order.end());
        probe_part = train.take(probe_idx);
        train_part = train.take(train_idx);
    }

    PipelineResult result;

    // Stage 0 (skipped when a pre-trained model is supplied)
    result.blackbox = pre_trained ? std::move(pre_trained) : train_stage0(train_part, config);

    // Stage 1: auxiliary datasets, in model space
    Matrix train_x = train_part.features;
    Matrix probe_x = probe_part.features;
    if (config.scale_features) {
        result.scaler = MinMaxScaler::fit(train_part.features);
        train_x = result.scaler->transform(train_part.features);
        probe_x = result.scaler->transform(probe_part.features);
    }
    result.aux_train = build_auxiliary(*result.blackbox, train_x, AuxRole::train);
    result.aux_probe = build_auxiliary(*result.blackbox, probe_x, AuxRole::probe);

    // Stage 2: frozen interpretable baseline
    result.baseline = fit_global_baseline(result.aux_train, config.local_kind, config.local_alpha);

    // Stage 3
    TrainConfig tc = config.trainer;
    tc.seed = tc.seed != 0 ? tc.seed : RandomSource(config.seed).child("stage3").seed();
    if (tc.threads == 0) tc.threads = config.threads;
    tc.local_alpha = config.local_alpha;
    TrainResult trained =
        train_estimator(result.aux_train, result.aux_probe, result.baseline, config.local_kind, tc);
    result.estimator = std::move(trained.estimator);
    result.curve = std::move(trained.curve);
    return result;
}

Explanation explain_instance(std::span<const double> x_t, const WeightEstimator& estimator,
                             const AuxiliaryDataset& aux_train, const BlackBoxModel& model,
                             LocalKind local_kind, double alpha, std::size_t top_k,
                             std::size_t id) {
    Explanation ex;
    ex.id = id;
    ex.method = "rllim";
    ex.weights = estimator.estimate_all(x_t, aux_train);

    std::vector<std::size_t> order(ex.weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ex.weights[a] != ex.weights[b]) return ex.weights[a] > ex.weights[b];
        return a < b;
    });

    if (top_k > 0 && top_k < ex.weights.size()) {
        std::vector<double> truncated(ex.weights.size(), 0.0);
        for (std::size_t r = 0; r < top_k; ++r) truncated[order[r]] = ex.weights[order[r]];
        ex.weights = std::move(truncated);
    }

    ex.local = fit_local(local_kind, aux_train, ex.weights, alpha);
    ex.local_pred = ex.local.predict(x_t);
    const double bb = model.predict(x_t);
    ex.blackbox_pred = model.task() == TaskKind::classification ? logit_clamped(bb) : bb;
    order.resize(std::min<std::size_t>(10, order.size()));
    ex.top_ids = std::move(order);
    return ex;
}

ValidationStats validate_estimator(const WeightEstimator& estimator,
                                   const AuxiliaryDataset& aux_train,
                                   const AuxiliaryDataset& aux_probe, LocalKind local_kind,
                                   double alpha, int threads) {
    const std::size_t m = aux_probe.size();
    std::vector<double> abs_err(m, 0.0);
    std::vector<double> mean_w(m, 0.0);
    parallel_for(m, resolve_threads(threads), [&](std::size_t p) {
        const auto row = aux_probe.features.row(p);
        const std::vector<double> w = estimator.estimate_all(row, aux_train);
        const LocalModel local = fit_local(local_kind, aux_train, w, alpha);
        abs_err[p] = std::abs(local.predict(row) - aux_probe.targets[p]);
        double acc = 0.0;
        for (double v : w) acc += v;
        mean_w[p] = acc / static_cast<double>(w.size());
    });
    ValidationStats stats;
    for (std::size_t p = 0; p < m; ++p) {
        stats.lmae += abs_err[p];
        stats.mean_selection_prob += mean_w[p];
    }
    stats.lmae /= static_cast<double>(m);
    stats.mean_selection_prob /= static_cast<double>(m);
    return stats;
}

LambdaSweepResult sweep_lambda(std::span<const double> grid, const AuxiliaryDataset& aux_train,
                               const AuxiliaryDataset& aux_probe, const LocalModel& baseline,
                               LocalKind local_kind, const TrainConfig& base_config,
                               double local_alpha) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty lambda grid");
    LambdaSweepResult result;
    result.rows.resize(grid.size());
    result.curves.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        TrainConfig tc = base_config;  // identical streams across the grid
        tc.lambda = grid[g];
        TrainResult trained = train_estimator(aux_train, aux_probe, baseline, local_kind, tc);
        const ValidationStats stats = validate_estimator(trained.estimator, aux_train, aux_probe,
                                                         local_kind, local_alpha, tc.threads);
        result.rows[g] = {grid[g], stats.lmae, stats.mean_selection_prob, false};
        result.curves[g] = std::move(trained.curve);
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (result.rows[g].validation_lmae < result.rows[best].validation_lmae) best = g;
    result.rows[best].chosen = true;
    result.chosen_lambda = result.rows[best].lambda;
    return result;
}

}  // namespace rllim
