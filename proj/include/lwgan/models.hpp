#pragma once

#include "lwgan/latent.hpp"
#include "lwgan/nn.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace lwgan {

enum class ModelKind { Lwgan, Wgan, Wae };
enum class ToyDataset { SwissRoll, SCurve, Hyperplane };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(std::string_view name);
std::string_view to_string(ToyDataset kind) noexcept;
/// Accepts swiss_roll, s_curve and hyperplane; throws std::invalid_argument.
ToyDataset toy_dataset_from_string(std::string_view name);

struct Network {
    nn::MlpSpec spec;
    nn::MlpParams params;
};

/// Non-owning view of a network's spec plus parameter tensors, which may be
/// graph-bound (training) or detached (evaluation).
struct NetView {
    const nn::MlpSpec& spec;
    std::span<const Tensor> params;
};

inline NetView view(const Network& net) { return {net.spec, net.params.tensors}; }

/// Encoder Q, generator G and critic f. An LWGAN model has all three with
/// rank conditioning; a WGAN model has no encoder, a WAE model no critic.
struct LwganModel {
    ModelKind kind = ModelKind::Lwgan;
    Index p = 0;
    Index d = 0;
    std::optional<Network> encoder;
    Network generator;
    std::optional<Network> critic;

    [[nodiscard]] bool rank_conditioned() const noexcept { return kind == ModelKind::Lwgan; }
    /// Throws std::invalid_argument when widths disagree with (p, d) or with
    /// the component set implied by `kind`.
    void validate() const;
};

/// Toy architectures: encoder 512-256-128-64-32-d (ReLU), generator 64-64-64-p
/// (SiLU), critic 64-64-64-1 (ReLU), linear outputs.
LwganModel make_model(ModelKind kind, Index p, Index d, std::uint64_t seed);

/// Toy model for a named dataset: (p, d) = (2, 5), (3, 5), (5, 10).
LwganModel toy_model(ToyDataset dataset, std::uint64_t seed, ModelKind kind = ModelKind::Lwgan);

Index toy_ambient_dim(ToyDataset dataset) noexcept;
Index toy_latent_dim(ToyDataset dataset) noexcept;

/// Q(x, e_s) with components s+1..d forced to zero. For an unconditioned
/// (WAE) encoder pass rank = d.
Tensor encode(NetView encoder, const Tensor& x, const RankMask& mask, bool rank_conditioned = true);
Tensor generate(NetView generator, const Tensor& z);
/// f(x, e_s), one value per row (N x 1).
Tensor criticize(NetView critic, const Tensor& x, const RankMask& mask, bool rank_conditioned = true);

// Detached evaluation helpers.
Tensor encode(const LwganModel& model, const Tensor& x, Index rank);
Tensor generate(const LwganModel& model, const Tensor& z);
Tensor criticize(const LwganModel& model, const Tensor& x, Index rank);

}  // namespace lwgan
