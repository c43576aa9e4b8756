#include "lwgan/models.hpp"

#include <stdexcept>
#include <string>

namespace lwgan {

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::Lwgan: return "lwgan";
        case ModelKind::Wgan: return "wgan";
        case ModelKind::Wae: return "wae";
    }
    return "lwgan";
}

ModelKind model_kind_from_string(std::string_view name) {
    if (name == "lwgan") return ModelKind::Lwgan;
    if (name == "wgan") return ModelKind::Wgan;
    if (name == "wae") return ModelKind::Wae;
    throw std::invalid_argument("unknown mode '" + std::string(name) + "' (expected lwgan, wgan or wae)");
}

std::string_view to_string(ToyDataset kind) noexcept {
    switch (kind) {
        case ToyDataset::SwissRoll: return "swiss_roll";
        case ToyDataset::SCurve: return "s_curve";
        case ToyDataset::Hyperplane: return "hyperplane";
    }
    return "swiss_roll";
}

ToyDataset toy_dataset_from_string(std::string_view name) {
    if (name == "swiss_roll") return ToyDataset::SwissRoll;
    if (name == "s_curve") return ToyDataset::SCurve;
    if (name == "hyperplane") return ToyDataset::Hyperplane;
    throw std::invalid_argument("unknown dataset '" + std::string(name) +
                                "' (expected swiss_roll, s_curve or hyperplane)");
}

Index toy_ambient_dim(ToyDataset dataset) noexcept {
    switch (dataset) {
        case ToyDataset::SwissRoll: return 2;
        case ToyDataset::SCurve: return 3;
        case ToyDataset::Hyperplane: return 5;
    }
    return 0;
}

Index toy_latent_dim(ToyDataset dataset) noexcept {
    switch (dataset) {
        case ToyDataset::SwissRoll: return 5;
        case ToyDataset::SCurve: return 5;
        case ToyDataset::Hyperplane: return 10;
    }
    return 0;
}

void LwganModel::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("LwganModel: " + what); };
    if (p < 1 || d < 1) fail("p and d must be >= 1");
    const Index cond = rank_conditioned() ? d : 0;

    const bool want_encoder = kind != ModelKind::Wgan;
    const bool want_critic = kind != ModelKind::Wae;
    if (encoder.has_value() != want_encoder) fail("encoder presence does not match mode");
    if (critic.has_value() != want_critic) fail("critic presence does not match mode");

    generator.spec.validate();
    if (generator.spec.input_width() != d || generator.spec.output_width() != p)
        fail("generator must map d -> p");
    if (encoder) {
        encoder->spec.validate();
        if (encoder->spec.input_width() != p + cond || encoder->spec.output_width() != d)
            fail("encoder must map p (+ d rank one-hot) -> d");
    }
    if (critic) {
        critic->spec.validate();
        if (critic->spec.input_width() != p + cond || critic->spec.output_width() != 1)
            fail("critic must map p (+ d rank one-hot) -> 1");
    }
}

LwganModel make_model(ModelKind kind, Index p, Index d, std::uint64_t seed) {
    using nn::Activation;
    Rng base = Rng(seed).split(streams::kInit);
    LwganModel model;
    model.kind = kind;
    model.p = p;
    model.d = d;
    const Index cond = kind == ModelKind::Lwgan ? d : 0;

    if (kind != ModelKind::Wgan) {
        Rng rng = base.split(1);
        auto spec = nn::make_mlp_spec({p + cond, 512, 256, 128, 64, 32, d}, Activation::Relu);
        auto params = nn::mlp_init(spec, rng);
        model.encoder = Network{std::move(spec), std::move(params)};
    }
    {
        Rng rng = base.split(2);
        auto spec = nn::make_mlp_spec({d, 64, 64, 64, p}, Activation::Silu);
        auto params = nn::mlp_init(spec, rng);
        model.generator = Network{std::move(spec), std::move(params)};
    }
    if (kind != ModelKind::Wae) {
        Rng rng = base.split(3);
        auto spec = nn::make_mlp_spec({p + cond, 64, 64, 64, 1}, Activation::Relu);
        auto params = nn::mlp_init(spec, rng);
        model.critic = Network{std::move(spec), std::move(params)};
    }
    model.validate();
    return model;
}

LwganModel toy_model(ToyDataset dataset, std::uint64_t seed, ModelKind kind) {
    return make_model(kind, toy_ambient_dim(dataset), toy_latent_dim(dataset), seed);
}

namespace {

Tensor with_rank_code(const Tensor& x, const RankMask& mask) {
    Tensor code(one_hot(mask.dim(), mask.rank()).replicate(x.rows(), 1));
    return ad::concat_cols(x, code);
}

}  // namespace

Tensor encode(NetView encoder, const Tensor& x, const RankMask& mask, bool rank_conditioned) {
    const Tensor input = rank_conditioned ? with_rank_code(x, mask) : x;
    return apply_mask(mask, nn::mlp_forward(encoder.spec, encoder.params, input));
}

Tensor generate(NetView generator, const Tensor& z) { return nn::mlp_forward(generator.spec, generator.params, z); }

Tensor criticize(NetView critic, const Tensor& x, const RankMask& mask, bool rank_conditioned) {
    const Tensor input = rank_conditioned ? with_rank_code(x, mask) : x;
    return nn::mlp_forward(critic.spec, critic.params, input);
}

Tensor encode(const LwganModel& model, const Tensor& x, Index rank) {
    if (!model.encoder) throw std::logic_error("encode: model has no encoder");
    return encode(view(*model.encoder), x, RankMask(model.d, rank), model.rank_conditioned());
}

Tensor generate(const LwganModel& model, const Tensor& z) { return generate(view(model.generator), z); }

Tensor criticize(const LwganModel& model, const Tensor& x, Index rank) {
    if (!model.critic) throw std::logic_error("criticize: model has no critic");
    return criticize(view(*model.critic), x, RankMask(model.d, rank), model.rank_conditioned());
}

}  // namespace lwgan
