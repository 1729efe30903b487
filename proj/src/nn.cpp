#include "rllim/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "rllim/kernels.hpp"

namespace rllim::nn {

void apply_activation(Activation act, const double* z, double* a, std::size_t n) {
    switch (act) {
        case Activation::linear:
            if (a != z)
                for (std::size_t i = 0; i < n; ++i) a[i] = z[i];
            return;
        case Activation::relu:
            for (std::size_t i = 0; i < n; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
            return;
        case Activation::tanh_act: kernels::tanh_vec(z, a, n); return;
        case Activation::sigmoid: kernels::sigmoid_vec(z, a, n); return;
    }
}

void activation_backward(Activation act, const double* a, double* g, std::size_t n) {
    switch (act) {
        case Activation::linear: return;
        case Activation::relu:
            for (std::size_t i = 0; i < n; ++i)
                if (a[i] <= 0.0) g[i] = 0.0;
            return;
        case Activation::tanh_act: kernels::tanh_backward_vec(a, g, n); return;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < n; ++i) g[i] *= a[i] * (1.0 - a[i]);
            return;
    }
}

FeedForwardNet::FeedForwardNet(NetShape shape) : shape_(std::move(shape)) {
    if (shape_.input_dim == 0 || shape_.output_dim == 0)
        throw std::invalid_argument("nn: zero-width layer");
    dims_.push_back(shape_.input_dim);
    for (std::size_t h : shape_.hidden) {
        if (h == 0) throw std::invalid_argument("nn: zero-width layer");
        dims_.push_back(h);
    }
    dims_.push_back(shape_.output_dim);

    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        w_off_.push_back(off);
        off += dims_[l] * dims_[l + 1];
        b_off_.push_back(off);
        off += dims_[l + 1];
    }
    params_.assign(off, 0.0);
}

void FeedForwardNet::init_params(RandomSource& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer_in(l) + layer_out(l)));
        double* w = weights(l);
        const std::size_t count = layer_in(l) * layer_out(l);
        for (std::size_t i = 0; i < count; ++i) w[i] = rng.uniform(-limit, limit);
        double* b = bias(l);
        for (std::size_t i = 0; i < layer_out(l); ++i) b[i] = 0.0;
    }
}

void FeedForwardNet::forward_batch(std::size_t batch, std::vector<std::vector<double>>& acts) const {
    const std::size_t layers = num_layers();
    acts.resize(layers + 1);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = layer_in(l);
        const std::size_t out = layer_out(l);
        acts[l + 1].resize(batch * out);
        const double* w = weights(l);
        const double* b = bias(l);
        const double* src = acts[l].data();
        double* dst = acts[l + 1].data();
        for (std::size_t r = 0; r < batch; ++r) {
            const double* xr = src + r * in;
            double* zr = dst + r * out;
            for (std::size_t u = 0; u < out; ++u) zr[u] = b[u] + kernels::dot(w + u * in, xr, in);
        }
        apply_activation(layer_act(l), dst, dst, batch * out);
    }
}

void FeedForwardNet::backward_batch(std::size_t batch, const std::vector<std::vector<double>>& acts,
                                    std::vector<double>& dz_out, std::span<double> grad) const {
    std::vector<double> dz = std::move(dz_out);
    std::vector<double> dz_prev;
    for (std::size_t li = num_layers(); li > 0; --li) {
        const std::size_t l = li - 1;
        const std::size_t in = layer_in(l);
        const std::size_t out = layer_out(l);
        double* dw = grad.data() + w_off_[l];
        double* db = grad.data() + b_off_[l];
        const double* a_prev = acts[l].data();
        const double* w = weights(l);

        if (l > 0) {
            dz_prev.assign(batch * in, 0.0);
        }
        for (std::size_t r = 0; r < batch; ++r) {
            const double* dzr = dz.data() + r * out;
            const double* ar = a_prev + r * in;
            double* dpr = l > 0 ? dz_prev.data() + r * in : nullptr;
            for (std::size_t u = 0; u < out; ++u) {
                const double g = dzr[u];
                if (g == 0.0) continue;
                kernels::axpy(in, g, ar, dw + u * in);
                db[u] += g;
                if (dpr != nullptr) kernels::axpy(in, g, w + u * in, dpr);
            }
        }
        if (l > 0) {
            activation_backward(layer_act(l - 1), acts[l].data(), dz_prev.data(), batch * in);
            dz = std::move(dz_prev);
        }
    }
    dz_out.clear();
}

double FeedForwardNet::forward_single(std::span<const double> x) const {
    if (shape_.output_dim != 1) throw std::logic_error("forward_single: output_dim != 1");
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const std::size_t in = layer_in(l);
        const std::size_t out = layer_out(l);
        next.resize(out);
        const double* w = weights(l);
        const double* b = bias(l);
        for (std::size_t u = 0; u < out; ++u) next[u] = b[u] + kernels::dot(w + u * in, cur.data(), in);
        apply_activation(layer_act(l), next.data(), next.data(), out);
        cur = next;
    }
    return cur[0];
}

namespace {
std::string act_name(Activation a) {
    switch (a) {
        case Activation::linear: return "linear";
        case Activation::relu: return "relu";
        case Activation::tanh_act: return "tanh";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}
Activation act_from(const std::string& s) {
    if (s == "linear") return Activation::linear;
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh_act;
    if (s == "sigmoid") return Activation::sigmoid;
    throw std::invalid_argument("unknown activation: " + s);
}
}  // namespace

nlohmann::json FeedForwardNet::to_json() const {
    return {{"input_dim", shape_.input_dim},
            {"hidden", shape_.hidden},
            {"output_dim", shape_.output_dim},
            {"hidden_act", act_name(shape_.hidden_act)},
            {"output_act", act_name(shape_.output_act)},
            {"params", params_}};
}

FeedForwardNet FeedForwardNet::from_json(const nlohmann::json& j) {
    NetShape shape;
    shape.input_dim = j.at("input_dim").get<std::size_t>();
    shape.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    shape.output_dim = j.at("output_dim").get<std::size_t>();
    shape.hidden_act = act_from(j.at("hidden_act").get<std::string>());
    shape.output_act = act_from(j.at("output_act").get<std::string>());
    FeedForwardNet net(shape);
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count()) throw std::invalid_argument("checkpoint parameter count mismatch");
    net.params() = std::move(params);
    return net;
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw std::invalid_argument("adam: size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        const double mh = m_[i] / bc1;
        const double vh = v_[i] / bc2;
        params[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
    }
}

}  // namespace rllim::nn
