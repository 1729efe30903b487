#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rllim/random.hpp"

#include <json.hpp>

namespace rllim::nn {

enum class Activation { linear, relu, tanh_act, sigmoid };

void apply_activation(Activation act, const double* z, double* a, std::size_t n);
// g *= act'(z), expressed through the activation value a
void activation_backward(Activation act, const double* a, double* g, std::size_t n);

struct NetShape {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden;
    std::size_t output_dim = 1;
    Activation hidden_act = Activation::tanh_act;
    Activation output_act = Activation::linear;
};

// Fully-connected net with one flat parameter block (all layer weights,
// then the layer bias, layer by layer) so the optimizer and checkpoints
// treat parameters uniformly.
class FeedForwardNet {
public:
    FeedForwardNet() = default;
    explicit FeedForwardNet(NetShape shape);

    const NetShape& shape() const { return shape_; }
    std::size_t num_layers() const { return dims_.size() - 1; }
    std::size_t layer_in(std::size_t l) const { return dims_[l]; }
    std::size_t layer_out(std::size_t l) const { return dims_[l + 1]; }
    Activation layer_act(std::size_t l) const {
        return l + 1 == num_layers() ? shape_.output_act : shape_.hidden_act;
    }

    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // row-major out x in
    double* weights(std::size_t l) { return params_.data() + w_off_[l]; }
    const double* weights(std::size_t l) const { return params_.data() + w_off_[l]; }
    double* bias(std::size_t l) { return params_.data() + b_off_[l]; }
    const double* bias(std::size_t l) const { return params_.data() + b_off_[l]; }
    std::size_t weight_offset(std::size_t l) const { return w_off_[l]; }
    std::size_t bias_offset(std::size_t l) const { return b_off_[l]; }

    // symmetric uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases
    void init_params(RandomSource& rng);

    // acts[0] is the input (batch x input_dim, row-major); fills
    // acts[1..L] with post-activation values per layer
    void forward_batch(std::size_t batch, std::vector<std::vector<double>>& acts) const;

    // dz_out holds pre-activation gradients at the output layer
    // (batch x output_dim); accumulates into grad (param_count) and
    // destroys dz_out. scratch vectors sized internally.
    void backward_batch(std::size_t batch, const std::vector<std::vector<double>>& acts,
                        std::vector<double>& dz_out, std::span<double> grad) const;

    double forward_single(std::span<const double> x) const;  // output_dim == 1

    nlohmann::json to_json() const;
    static FeedForwardNet from_json(const nlohmann::json& j);

private:
    NetShape shape_;
    std::vector<std::size_t> dims_;   // input, hidden..., output
    std::vector<std::size_t> w_off_;
    std::vector<std::size_t> b_off_;
    std::vector<double> params_;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam() = default;
    Adam(std::size_t param_count, AdamConfig config)
        : cfg_(config), m_(param_count, 0.0), v_(param_count, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad);
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    long t_ = 0;
};

}  // namespace rllim::nn
