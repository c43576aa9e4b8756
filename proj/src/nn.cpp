#include "lwgan/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace lwgan::nn {

std::string_view to_string(Activation act) noexcept {
    switch (act) {
        case Activation::None: return "none";
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Silu: return "silu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
    }
    return "none";
}

Activation activation_from_string(std::string_view name) {
    for (Activation a : {Activation::None, Activation::Relu, Activation::LeakyRelu, Activation::Silu,
                         Activation::Sigmoid, Activation::Tanh}) {
        if (to_string(a) == name) return a;
    }
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void MlpSpec::validate() const {
    if (widths.size() < 2) throw std::invalid_argument("MlpSpec: need at least two widths");
    if (widths.size() != activations.size() + 1)
        throw std::invalid_argument("MlpSpec: widths length must equal activations length + 1");
    for (Index w : widths)
        if (w < 1) throw std::invalid_argument("MlpSpec: widths must be >= 1");
}

MlpSpec make_mlp_spec(std::vector<Index> widths, Activation hidden) {
    MlpSpec spec;
    spec.activations.assign(widths.size() - 1, hidden);
    spec.activations.back() = Activation::None;
    spec.widths = std::move(widths);
    spec.validate();
    return spec;
}

Index MlpParams::scalar_count() const {
    Index n = 0;
    for (const Tensor& t : tensors) n += t.size();
    return n;
}

std::string param_name(std::size_t index) {
    return (index % 2 == 0 ? "w" : "b") + std::to_string(index / 2);
}

MlpParams mlp_init(const MlpSpec& spec, Rng& rng) {
    spec.validate();
    MlpParams params;
    for (std::size_t layer = 0; layer < spec.layers(); ++layer) {
        const Index fan_in = spec.widths[layer];
        const Index fan_out = spec.widths[layer + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        Matrix w(fan_out, fan_in);
        // Row-major fill order so the draw sequence does not depend on Eigen's
        // storage order.
        for (Index r = 0; r < fan_out; ++r)
            for (Index c = 0; c < fan_in; ++c) w(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
        params.tensors.emplace_back(std::move(w));
        params.tensors.emplace_back(Matrix::Zero(1, fan_out));
    }
    return params;
}

std::vector<Tensor> bind(ad::Graph& graph, const MlpParams& params) {
    std::vector<Tensor> bound;
    bound.reserve(params.count());
    for (const Tensor& t : params.tensors) bound.push_back(graph.variable(t));
    return bound;
}

Tensor activate(Activation act, const Tensor& x, double leaky_alpha) {
    switch (act) {
        case Activation::None: return x;
        case Activation::Relu: return ad::relu(x);
        case Activation::LeakyRelu: return ad::leaky_relu(x, leaky_alpha);
        case Activation::Silu: return ad::silu(x);
        case Activation::Sigmoid: return ad::sigmoid(x);
        case Activation::Tanh: return ad::tanh(x);
    }
    return x;
}

Tensor mlp_forward(const MlpSpec& spec, std::span<const Tensor> params, const Tensor& input) {
    if (params.size() != 2 * spec.layers())
        throw std::invalid_argument("mlp_forward: expected " + std::to_string(2 * spec.layers()) +
                                    " parameter tensors, got " + std::to_string(params.size()));
    if (input.cols() != spec.input_width())
        throw ad::ShapeError("mlp_forward: input width " + std::to_string(input.cols()) + " != expected " +
                             std::to_string(spec.input_width()) + " (input " + ad::shape_str(input) + ")");
    Tensor h = input;
    for (std::size_t layer = 0; layer < spec.layers(); ++layer) {
        h = ad::add_bias(ad::matmul(h, params[2 * layer], false, true), params[2 * layer + 1]);
        h = activate(spec.activations[layer], h, spec.leaky_alpha);
    }
    return h;
}

AdamState adam_init(const AdamConfig& config, const MlpParams& params) {
    const MlpParams* groups[] = {&params};
    return adam_init(config, groups);
}

AdamState adam_init(const AdamConfig& config, std::span<const MlpParams* const> groups) {
    AdamState state;
    state.config = config;
    for (const MlpParams* g : groups) {
        for (const Tensor& t : g->tensors) {
            state.first_moment.push_back(Matrix::Zero(t.rows(), t.cols()));
            state.second_moment.push_back(Matrix::Zero(t.rows(), t.cols()));
        }
    }
    return state;
}

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads, bool ascend) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw std::invalid_argument("adam_step: parameter, gradient and state counts differ");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].rows() != params[i]->rows() || grads[i].cols() != params[i]->cols())
            throw ad::ShapeError("adam_step: gradient " + ad::shape_str(grads[i]) + " vs parameter " +
                                 ad::shape_str(*params[i]) + " for " + param_name(i));
        if (!grads[i].values().allFinite())
            throw std::domain_error("adam_step: non-finite gradient for parameter " + param_name(i));
    }

    const AdamConfig& cfg = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    // Descending minimizes the objective; ascending is descent on its negation.
    const double sign = ascend ? -1.0 : 1.0;

    for (std::size_t i = 0; i < grads.size(); ++i) {
        const auto g = (sign * grads[i].values().array()).eval();
        Matrix& m = state.first_moment[i];
        Matrix& v = state.second_moment[i];
        m.array() = cfg.beta1 * m.array() + (1.0 - cfg.beta1) * g;
        v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.square();
        Matrix updated = params[i]->values();
        updated.array() -= cfg.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + cfg.eps);
        *params[i] = Tensor(std::move(updated));
    }
}

void adam_step(AdamState& state, MlpParams& params, std::span<const Tensor> grads, bool ascend) {
    std::vector<Tensor*> ptrs;
    for (Tensor& t : params.tensors) ptrs.push_back(&t);
    adam_step(state, ptrs, grads, ascend);
}

}  // namespace lwgan::nn
