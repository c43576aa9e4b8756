#pragma once

#include "lwgan/autodiff.hpp"
#include "lwgan/rng.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lwgan::nn {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

enum class Activation { None, Relu, LeakyRelu, Silu, Sigmoid, Tanh };

std::string_view to_string(Activation act) noexcept;
/// Throws std::invalid_argument on unknown names.
Activation activation_from_string(std::string_view name);

/// Fully connected network layout. `activations[i]` follows layer i, so the
/// last entry is the output activation (usually None).
struct MlpSpec {
    std::vector<Index> widths;
    std::vector<Activation> activations;
    double leaky_alpha = 0.1;

    [[nodiscard]] Index input_width() const { return widths.front(); }
    [[nodiscard]] Index output_width() const { return widths.back(); }
    [[nodiscard]] std::size_t layers() const { return activations.size(); }

    /// Throws std::invalid_argument when the invariants do not hold.
    void validate() const;

    bool operator==(const MlpSpec&) const = default;
};

/// Hidden layers share one activation; the output layer is linear.
MlpSpec make_mlp_spec(std::vector<Index> widths, Activation hidden);

/// Weights and biases as detached tensors, interleaved w0, b0, w1, b1, ...
/// Weight i has shape (widths[i+1], widths[i]); bias i has shape (1, widths[i+1]).
struct MlpParams {
    std::vector<Tensor> tensors;

    [[nodiscard]] const Tensor& weight(std::size_t layer) const { return tensors[2 * layer]; }
    [[nodiscard]] const Tensor& bias(std::size_t layer) const { return tensors[2 * layer + 1]; }
    [[nodiscard]] std::size_t count() const { return tensors.size(); }
    [[nodiscard]] Index scalar_count() const;
};

std::string param_name(std::size_t index);

/// He-style uniform init: weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)),
/// biases zero.
MlpParams mlp_init(const MlpSpec& spec, Rng& rng);

/// Registers every parameter as a differentiable leaf of `graph`.
std::vector<Tensor> bind(ad::Graph& graph, const MlpParams& params);

/// Forward pass with the given (bound or detached) parameter tensors.
Tensor mlp_forward(const MlpSpec& spec, std::span<const Tensor> params, const Tensor& input);
inline Tensor mlp_forward(const MlpSpec& spec, const MlpParams& params, const Tensor& input) {
    return mlp_forward(spec, params.tensors, input);
}

Tensor activate(Activation act, const Tensor& x, double leaky_alpha);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;

    bool operator==(const AdamConfig&) const = default;
};

/// Adam moments for one parameter group.
struct AdamState {
    AdamConfig config;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
    long step = 0;
};

AdamState adam_init(const AdamConfig& config, const MlpParams& params);
AdamState adam_init(const AdamConfig& config, std::span<const MlpParams* const> groups);

/// One bias-corrected Adam update. With `ascend` the parameters move along
/// the gradient, otherwise against it. Throws std::domain_error naming the
/// parameter when a gradient entry is not finite.
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads, bool ascend);
void adam_step(AdamState& state, MlpParams& params, std::span<const Tensor> grads, bool ascend);

}  // namespace lwgan::nn
