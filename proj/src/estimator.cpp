#include "rllim/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rllim/kernels.hpp"
#include "rllim/threading.hpp"

namespace rllim {

WeightEstimator::WeightEstimator(std::size_t feature_dim, std::vector<std::size_t> hidden,
                                 RandomSource init_rng)
    : d_(feature_dim) {
    if (feature_dim == 0) throw std::invalid_argument("invalid input: zero feature dim");
    if (hidden.empty()) throw std::invalid_argument("invalid input: estimator needs hidden layers");
    nn::NetShape shape;
    shape.input_dim = 2 * feature_dim + 1;
    shape.hidden = std::move(hidden);
    shape.output_dim = 1;
    shape.hidden_act = nn::Activation::tanh_act;
    shape.output_act = nn::Activation::sigmoid;
    net_ = nn::FeedForwardNet(shape);
    net_.init_params(init_rng);
}

WeightEstimator::BatchContext WeightEstimator::make_batch_context(
    const AuxiliaryDataset& aux, std::span<const std::size_t> rows) const {
    if (aux.dim() != d_) throw std::invalid_argument("invalid input: feature dim mismatch");
    BatchContext ctx;
    ctx.aux = &aux;
    ctx.rows.assign(rows.begin(), rows.end());
    const std::size_t h1 = net_.layer_out(0);
    const std::size_t in = net_.layer_in(0);
    const double* w1 = net_.weights(0);
    ctx.partial_z1.resize(rows.size() * h1);
    std::vector<double> feat(d_ + 1);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto x = aux.features.row(rows[r]);
        std::copy(x.begin(), x.end(), feat.begin());
        feat[d_] = aux.targets[rows[r]];
        double* dst = ctx.partial_z1.data() + r * h1;
        for (std::size_t u = 0; u < h1; ++u)
            dst[u] = kernels::dot(w1 + u * in + d_, feat.data(), d_ + 1);
    }
    return ctx;
}

void WeightEstimator::forward(std::span<const double> probe_x, const BatchContext& ctx,
                              Workspace& ws) const {
    if (probe_x.size() != d_) throw std::invalid_argument("invalid input: probe dim mismatch");
    const std::size_t batch = ctx.rows.size();
    const std::size_t layers = net_.num_layers();
    ws.acts.resize(layers);

    // layer 0: probe half + precomputed row half
    const std::size_t h1 = net_.layer_out(0);
    const std::size_t in0 = net_.layer_in(0);
    const double* w1 = net_.weights(0);
    const double* b1 = net_.bias(0);
    std::vector<double> probe_part(h1);
    for (std::size_t u = 0; u < h1; ++u)
        probe_part[u] = b1[u] + kernels::dot(w1 + u * in0, probe_x.data(), d_);
    auto& a0 = ws.acts[0];
    a0.resize(batch * h1);
    for (std::size_t r = 0; r < batch; ++r) {
        const double* part = ctx.partial_z1.data() + r * h1;
        double* dst = a0.data() + r * h1;
        for (std::size_t u = 0; u < h1; ++u) dst[u] = probe_part[u] + part[u];
    }
    kernels::tanh_vec(a0.data(), a0.data(), batch * h1);

    for (std::size_t l = 1; l < layers; ++l) {
        const std::size_t in = net_.layer_in(l);
        const std::size_t out = net_.layer_out(l);
        const double* w = net_.weights(l);
        const double* b = net_.bias(l);
        const auto& src = ws.acts[l - 1];
        auto& dst = ws.acts[l];
        dst.resize(batch * out);
        for (std::size_t r = 0; r < batch; ++r) {
            const double* xr = src.data() + r * in;
            double* zr = dst.data() + r * out;
            for (std::size_t u = 0; u < out; ++u) zr[u] = b[u] + kernels::dot(w + u * in, xr, in);
        }
        nn::apply_activation(net_.layer_act(l), dst.data(), dst.data(), batch * out);
    }

    ws.w.resize(batch);
    const auto& out = ws.acts[layers - 1];
    for (std::size_t r = 0; r < batch; ++r)
        ws.w[r] = std::clamp(out[r], kWeightClamp, 1.0 - kWeightClamp);
}

void WeightEstimator::backward(std::span<const double> probe_x, const BatchContext& ctx,
                               const Workspace& ws, std::span<const double> dz,
                               std::span<double> grad) const {
    const std::size_t batch = ctx.rows.size();
    const std::size_t layers = net_.num_layers();

    // output layer (width 1)
    {
        const std::size_t l = layers - 1;
        const std::size_t in = net_.layer_in(l);
        double* dw = grad.data() + net_.weight_offset(l);
        double* db = grad.data() + net_.bias_offset(l);
        const auto& a_prev = ws.acts[l - 1];
        for (std::size_t r = 0; r < batch; ++r) {
            const double g = dz[r];
            if (g == 0.0) continue;
            kernels::axpy(in, g, a_prev.data() + r * in, dw);
            db[0] += g;
        }
    }

    // push through hidden layers
    std::vector<double> da(batch * net_.layer_in(layers - 1));
    {
        const std::size_t l = layers - 1;
        const std::size_t in = net_.layer_in(l);
        const double* w = net_.weights(l);
        std::fill(da.begin(), da.end(), 0.0);
        for (std::size_t r = 0; r < batch; ++r) {
            if (dz[r] != 0.0) kernels::axpy(in, dz[r], w, da.data() + r * in);
        }
    }

    std::vector<double> da_prev;
    for (std::size_t li = layers - 1; li > 0; --li) {
        const std::size_t l = li - 1;
        const std::size_t in = net_.layer_in(l);
        const std::size_t out = net_.layer_out(l);
        // da currently holds d(loss)/d(activation of layer l); convert to
        // pre-activation grads in place (tanh hidden layers)
        kernels::tanh_backward_vec(ws.acts[l].data(), da.data(), batch * out);

        double* dw = grad.data() + net_.weight_offset(l);
        double* db = grad.data() + net_.bias_offset(l);
        const double* w = net_.weights(l);

        if (l > 0) {
            const auto& a_prev = ws.acts[l - 1];
            da_prev.assign(batch * in, 0.0);
            for (std::size_t r = 0; r < batch; ++r) {
                const double* dzr = da.data() + r * out;
                const double* ar = a_prev.data() + r * in;
                double* dpr = da_prev.data() + r * in;
                for (std::size_t u = 0; u < out; ++u) {
                    const double g = dzr[u];
                    if (g == 0.0) continue;
                    kernels::axpy(in, g, ar, dw + u * in);
                    db[u] += g;
                    kernels::axpy(in, g, w + u * in, dpr);
                }
            }
            da = std::move(da_prev);
        } else {
            // first layer: left half sees the shared probe vector, right
            // half the per-row training features
            std::vector<double> col_sum(out, 0.0);
            std::vector<double> feat(d_ + 1);
            for (std::size_t r = 0; r < batch; ++r) {
                const double* dzr = da.data() + r * out;
                const auto x = ctx.aux->features.row(ctx.rows[r]);
                std::copy(x.begin(), x.end(), feat.begin());
                feat[d_] = ctx.aux->targets[ctx.rows[r]];
                for (std::size_t u = 0; u < out; ++u) {
                    const double g = dzr[u];
                    if (g == 0.0) continue;
                    col_sum[u] += g;
                    kernels::axpy(d_ + 1, g, feat.data(), dw + u * in + d_);
                }
            }
            for (std::size_t u = 0; u < out; ++u) {
                if (col_sum[u] == 0.0) continue;
                kernels::axpy(d_, col_sum[u], probe_x.data(), dw + u * in);
                db[u] += col_sum[u];
            }
        }
    }
}

std::vector<double> WeightEstimator::estimate(std::span<const double> probe_x,
                                              const AuxiliaryDataset& aux,
                                              std::span<const std::size_t> rows) const {
    const BatchContext ctx = make_batch_context(aux, rows);
    Workspace ws;
    forward(probe_x, ctx, ws);
    return std::move(ws.w);
}

std::vector<double> WeightEstimator::estimate_all(std::span<const double> probe_x,
                                                  const AuxiliaryDataset& aux) const {
    std::vector<std::size_t> rows(aux.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return estimate(probe_x, aux, rows);
}

nlohmann::json WeightEstimator::to_json() const {
    return {{"format", "rllim-estimator"},
            {"version", 1},
            {"feature_dim", d_},
            {"net", net_.to_json()}};
}

WeightEstimator WeightEstimator::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "rllim-estimator")
        throw std::invalid_argument("not an estimator checkpoint");
    WeightEstimator est;
    est.d_ = j.at("feature_dim").get<std::size_t>();
    est.net_ = nn::FeedForwardNet::from_json(j.at("net"));
    if (est.net_.shape().input_dim != 2 * est.d_ + 1)
        throw std::invalid_argument("estimator checkpoint shape mismatch");
    return est;
}

SelectionSample sample_selection(std::span<const double> w, RandomSource& rng) {
    SelectionSample s;
    s.c.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        s.c[i] = rng.bernoulli(w[i]) ? 1 : 0;
        s.selected += s.c[i];
    }
    s.log_prob = selection_log_prob(w, s.c);
    s.l1 = w.empty() ? 0.0 : static_cast<double>(s.selected) / static_cast<double>(w.size());
    return s;
}

double selection_log_prob(std::span<const double> w, std::span<const std::uint8_t> c) {
    if (w.size() != c.size()) throw std::invalid_argument("invalid input: length mismatch");
    double lp = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        lp += c[i] ? std::log(w[i]) : std::log1p(-w[i]);
    return lp;
}

void log_rho_gradient(const WeightEstimator& est, std::span<const double> probe_x,
                      const AuxiliaryDataset& aux, std::span<const std::size_t> rows,
                      std::span<const std::uint8_t> c, std::span<double> grad) {
    const auto ctx = est.make_batch_context(aux, rows);
    WeightEstimator::Workspace ws;
    est.forward(probe_x, ctx, ws);
    std::vector<double> dz(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        dz[r] = static_cast<double>(c[r]) - ws.w[r];  // d log rho / d z
    est.backward(probe_x, ctx, ws, dz, grad);
}

namespace {

double fidelity_loss(FidelityLoss kind, double target, double pred) {
    const double e = target - pred;
    return kind == FidelityLoss::absolute ? std::abs(e) : e * e;
}

}  // namespace

IterationLog reinforce_step(WeightEstimator& est, nn::Adam& opt,
                            const AuxiliaryDataset& aux_train, const AuxiliaryDataset& aux_probe,
                            std::span<const std::size_t> probe_idx,
                            std::span<const std::size_t> train_idx,
                            std::span<const double> baseline_probe_loss, LocalKind local_kind,
                            const TrainConfig& config, const RandomSource& iter_rng) {
    const std::size_t batch = train_idx.size();
    const std::size_t probes = probe_idx.size();
    if (batch == 0 || probes == 0) throw std::invalid_argument("invalid input: empty batch");
    if (baseline_probe_loss.size() != probes)
        throw std::invalid_argument("invalid input: baseline loss length");

    const auto ctx = est.make_batch_context(aux_train, train_idx);

    // shared sub-dataset for the local fits
    AuxiliaryDataset sub;
    sub.features = aux_train.features.take_rows(train_idx);
    sub.targets.reserve(batch);
    for (std::size_t i : train_idx) sub.targets.push_back(aux_train.targets[i]);
    sub.role = aux_train.role;

    const std::size_t n_params = est.net().param_count();
    std::vector<std::vector<double>> probe_grads(probes);
    std::vector<double> rewards(probes, 0.0);
    std::vector<double> mean_w(probes, 0.0);

    parallel_for(probes, resolve_threads(config.threads), [&](std::size_t j) {
        const auto probe_row = aux_probe.features.row(probe_idx[j]);
        WeightEstimator::Workspace ws;
        est.forward(probe_row, ctx, ws);

        RandomSource sel_rng = iter_rng.child("selection", j);
        const SelectionSample sel = sample_selection(ws.w, sel_rng);

        std::vector<double> fit_w(batch);
        if (sel.selected >= 2) {
            for (std::size_t r = 0; r < batch; ++r) fit_w[r] = sel.c[r];
        } else {
            // degenerate draw: fall back to the continuous weights so the
            // fidelity term stays defined; the penalty keeps the sampled l1
            fit_w.assign(ws.w.begin(), ws.w.end());
        }
        const LocalModel local = fit_local(local_kind, sub, fit_w, config.local_alpha);
        const double pred = local.predict(probe_row);
        const double loss = fidelity_loss(config.fidelity, aux_probe.targets[probe_idx[j]], pred);
        const double advantage = loss - baseline_probe_loss[j] + config.lambda * sel.l1;

        std::vector<double> dz(batch);
        for (std::size_t r = 0; r < batch; ++r)
            dz[r] = advantage * (static_cast<double>(sel.c[r]) - ws.w[r]);

        probe_grads[j].assign(n_params, 0.0);
        est.backward(probe_row, ctx, ws, dz, probe_grads[j]);

        rewards[j] = baseline_probe_loss[j] - loss;
        mean_w[j] = kernels::sum(ws.w.data(), batch) / static_cast<double>(batch);
    });

    // reduce in fixed probe order, then one synchronized optimizer step
    std::vector<double> grad(n_params, 0.0);
    const double scale = 1.0 / static_cast<double>(probes);
    for (std::size_t j = 0; j < probes; ++j)
        kernels::axpy(n_params, scale, probe_grads[j].data(), grad.data());
    for (double g : grad)
        if (!std::isfinite(g)) throw std::runtime_error("diverged: non-finite REINFORCE gradient");
    opt.step(est.net().params(), grad);

    IterationLog log;
    log.mean_reward = kernels::sum(rewards.data(), probes) / static_cast<double>(probes);
    log.mean_selection_prob = kernels::sum(mean_w.data(), probes) / static_cast<double>(probes);
    return log;
}

TrainResult train_estimator(const AuxiliaryDataset& aux_train, const AuxiliaryDataset& aux_probe,
                            const LocalModel& baseline, LocalKind local_kind,
                            const TrainConfig& config) {
    if (aux_train.size() == 0 || aux_probe.size() == 0)
        throw std::invalid_argument("invalid input: empty auxiliary set");
    if (config.lambda < 0.0) throw std::invalid_argument("invalid input: lambda must be >= 0");

    RandomSource root(config.seed);
    RandomSource init_rng = root.child("estimator_init");
    WeightEstimator est(aux_train.dim(), config.hidden, init_rng);
    nn::Adam opt(est.net().param_count(), {config.lr});

    // the baseline is frozen, so its per-probe losses are too
    std::vector<double> base_loss(aux_probe.size());
    for (std::size_t p = 0; p < aux_probe.size(); ++p) {
        const double pred = baseline.predict(aux_probe.features.row(p));
        base_loss[p] = fidelity_loss(config.fidelity, aux_probe.targets[p], pred);
    }

    const std::size_t n = aux_train.size();
    const std::size_t m = aux_probe.size();
    const std::size_t probe_batch = std::min(config.probe_batch, m);
    const std::size_t train_batch = std::min(config.train_batch, n);

    TrainResult result{std::move(est), {}};
    result.curve.reserve(config.iterations);
    std::vector<double> batch_base_loss(probe_batch);

    for (std::size_t it = 0; it < config.iterations; ++it) {
        const RandomSource iter_rng = root.child("iteration", it);
        RandomSource probe_rng = iter_rng.child("probe_batch");
        RandomSource train_rng = iter_rng.child("train_batch");
        const auto probe_idx = probe_rng.sample_without_replacement(m, probe_batch);
        const auto train_idx = train_rng.sample_without_replacement(n, train_batch);
        for (std::size_t j = 0; j < probe_batch; ++j) batch_base_loss[j] = base_loss[probe_idx[j]];

        IterationLog log = reinforce_step(result.estimator, opt, aux_train, aux_probe, probe_idx,
                                          train_idx, batch_base_loss, local_kind, config, iter_rng);
        log.iteration = it;
        result.curve.push_back(log);
    }
    return result;
}

}  // namespace rllim
