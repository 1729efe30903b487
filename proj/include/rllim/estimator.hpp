#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rllim/blackbox.hpp"
#include "rllim/interpretable.hpp"
#include "rllim/nn.hpp"
#include "rllim/random.hpp"

#include <json.hpp>

namespace rllim {

inline constexpr double kWeightClamp = 1e-8;

// h_phi: (probe features, training features, training target) -> selection
// probability. tanh hidden layers, sigmoid head, outputs clamped to
// [1e-8, 1 - 1e-8] before any log.
class WeightEstimator {
public:
    WeightEstimator() = default;
    WeightEstimator(std::size_t feature_dim, std::vector<std::size_t> hidden, RandomSource init_rng);

    std::size_t feature_dim() const { return d_; }
    std::size_t input_dim() const { return 2 * d_ + 1; }
    nn::FeedForwardNet& net() { return net_; }
    const nn::FeedForwardNet& net() const { return net_; }

    // First-layer partial sums for a fixed set of training rows; reused
    // across every probe in an iteration.
    struct BatchContext {
        const AuxiliaryDataset* aux = nullptr;
        std::vector<std::size_t> rows;
        std::vector<double> partial_z1;  // rows.size() x h1
    };

    BatchContext make_batch_context(const AuxiliaryDataset& aux,
                                    std::span<const std::size_t> rows) const;

    struct Workspace {
        std::vector<std::vector<double>> acts;  // acts[l]: B x width of layer l+1
        std::vector<double> w;                  // clamped selection probabilities
    };

    void forward(std::span<const double> probe_x, const BatchContext& ctx, Workspace& ws) const;

    // dz holds d(loss)/d(pre-sigmoid output) per batch row; accumulates
    // parameter gradients into grad.
    void backward(std::span<const double> probe_x, const BatchContext& ctx, const Workspace& ws,
                  std::span<const double> dz, std::span<double> grad) const;

    std::vector<double> estimate(std::span<const double> probe_x, const AuxiliaryDataset& aux,
                                 std::span<const std::size_t> rows) const;
    std::vector<double> estimate_all(std::span<const double> probe_x,
                                     const AuxiliaryDataset& aux) const;

    nlohmann::json to_json() const;
    static WeightEstimator from_json(const nlohmann::json& j);

private:
    std::size_t d_ = 0;
    nn::FeedForwardNet net_;
};

struct SelectionSample {
    std::vector<std::uint8_t> c;
    double log_prob = 0.0;
    double l1 = 0.0;  // (1/B) sum c_i
    std::size_t selected = 0;
};

SelectionSample sample_selection(std::span<const double> w, RandomSource& rng);

double selection_log_prob(std::span<const double> w, std::span<const std::uint8_t> c);

// grad of log rho_phi(probe, c) w.r.t. every estimator parameter
void log_rho_gradient(const WeightEstimator& est, std::span<const double> probe_x,
                      const AuxiliaryDataset& aux, std::span<const std::size_t> rows,
                      std::span<const std::uint8_t> c, std::span<double> grad);

enum class FidelityLoss { absolute, squared };

struct TrainConfig {
    double lambda = 0.5;
    double lr = 1e-3;
    std::size_t probe_batch = 32;
    std::size_t train_batch = 1024;  // capped at N each iteration
    std::size_t iterations = 2000;   // N_I
    std::vector<std::size_t> hidden = {100, 100, 100, 100, 100};
    double local_alpha = 1.0;
    FidelityLoss fidelity = FidelityLoss::absolute;
    std::uint64_t seed = 0;
    int threads = 0;
};

struct IterationLog {
    std::size_t iteration = 0;
    double mean_reward = 0.0;          // mean over probes of L_b - L
    double mean_selection_prob = 0.0;  // mean over (probe, instance) pairs
};

struct TrainResult {
    WeightEstimator estimator;
    std::vector<IterationLog> curve;
};

// One REINFORCE update:
//   w_i = h_phi(x_p, x_i, y_i),  c_i ~ Ber(w_i)
//   g*  = local fit on the selected instances (continuous weights when
//         fewer than 2 are selected; the sampled ||c||_1 still pays the
//         penalty)
//   phi <- phi - lr/M * sum_j [L_j - L_b(x_p_j) + lambda ||c_j||_1] grad log rho
// through an Adam step. Per-probe work runs on the thread pool; gradient
// reduction is in fixed probe order, so results do not depend on the
// thread count.
IterationLog reinforce_step(WeightEstimator& est, nn::Adam& opt,
                            const AuxiliaryDataset& aux_train, const AuxiliaryDataset& aux_probe,
                            std::span<const std::size_t> probe_idx,
                            std::span<const std::size_t> train_idx,
                            std::span<const double> baseline_probe_loss, LocalKind local_kind,
                            const TrainConfig& config, const RandomSource& iter_rng);

TrainResult train_estimator(const AuxiliaryDataset& aux_train, const AuxiliaryDataset& aux_probe,
                            const LocalModel& baseline, LocalKind local_kind,
                            const TrainConfig& config);

}  // namespace rllim
