#include "lwgan/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lwgan {

namespace {
const nn::MlpSpec& empty_spec() {
    static const nn::MlpSpec spec{};
    return spec;
}
}  // namespace

ModelView view(const LwganModel& model) {
    const NetView none{empty_spec(), {}};
    return ModelView{model.encoder ? lwgan::view(*model.encoder) : none, lwgan::view(model.generator),
                     model.critic ? lwgan::view(*model.critic) : none, model.rank_conditioned()};
}

Tensor sample_loss(const ModelView& m, const Tensor& x, const Tensor& z, const RankMask& mask) {
    if (x.rows() != 1 || z.rows() != 1)
        throw ad::ShapeError("sample_loss: expected single rows, got " + ad::shape_str(x) + " and " +
                             ad::shape_str(z));
    const Tensor recon_x = generate(m.generator, encode(m.encoder, x, mask, m.rank_conditioned));
    const Tensor gen_x = generate(m.generator, z);
    const Tensor dist = ad::row_norm(ad::sub(x, recon_x));
    return ad::add(dist, ad::sub(criticize(m.critic, recon_x, mask, m.rank_conditioned),
                                 criticize(m.critic, gen_x, mask, m.rank_conditioned)));
}

LossTerms empirical_terms(const ModelView& m, const Tensor& x, const Tensor& z0, const RankMask& mask) {
    if (x.rows() == 0) throw std::invalid_argument("empirical_loss: empty batch");
    if (x.rows() != z0.rows())
        throw std::invalid_argument("empirical_loss: batch lengths differ (" + std::to_string(x.rows()) + " vs " +
                                    std::to_string(z0.rows()) + ")");
    const Tensor recon_x = generate(m.generator, encode(m.encoder, x, mask, m.rank_conditioned));
    const Tensor gen_x = generate(m.generator, apply_mask(mask, z0));
    LossTerms terms;
    terms.reconstruction = ad::mean(ad::row_norm(ad::sub(x, recon_x)));
    terms.critic_gap = ad::sub(ad::mean(criticize(m.critic, recon_x, mask, m.rank_conditioned)),
                               ad::mean(criticize(m.critic, gen_x, mask, m.rank_conditioned)));
    terms.total = ad::add(terms.reconstruction, terms.critic_gap);
    return terms;
}

LossBreakdown empirical_loss(const LwganModel& model, const Matrix& x, const Matrix& z0, Index rank, Index chunk) {
    if (x.rows() == 0) throw std::invalid_argument("empirical_loss: empty batch");
    if (x.rows() != z0.rows()) throw std::invalid_argument("empirical_loss: batch lengths differ");
    const RankMask mask(model.d, rank);
    const ModelView m = view(model);
    double recon_sum = 0.0;
    double real_sum = 0.0;
    double fake_sum = 0.0;
    for (Index start = 0; start < x.rows(); start += chunk) {
        const Index len = std::min(chunk, x.rows() - start);
        const Tensor xb(x.middleRows(start, len));
        const Tensor zb(z0.middleRows(start, len));
        const Tensor recon_x = generate(m.generator, encode(m.encoder, xb, mask, m.rank_conditioned));
        const Tensor gen_x = generate(m.generator, apply_mask(mask, zb));
        recon_sum += ad::row_norm(ad::sub(xb, recon_x)).values().sum();
        real_sum += criticize(m.critic, recon_x, mask, m.rank_conditioned).values().sum();
        fake_sum += criticize(m.critic, gen_x, mask, m.rank_conditioned).values().sum();
    }
    const auto n = static_cast<double>(x.rows());
    LossBreakdown out;
    out.reconstruction = recon_sum / n;
    out.critic_gap = real_sum / n - fake_sum / n;
    out.total = out.reconstruction + out.critic_gap;
    return out;
}

Tensor gradient_penalty(ad::Graph& graph, NetView critic, const Matrix& x_real, const Matrix& x_gen,
                        const Matrix& eps, const RankMask& mask, bool rank_conditioned) {
    if (x_real.rows() != x_gen.rows() || x_real.cols() != x_gen.cols())
        throw ad::ShapeError("gradient_penalty: real and generated batches differ in shape");
    if (eps.rows() != x_real.rows() || eps.cols() != 1)
        throw ad::ShapeError("gradient_penalty: eps must hold one value per row");
    Matrix mixed = x_real.array().colwise() * eps.col(0).array() +
                   x_gen.array().colwise() * (1.0 - eps.col(0).array());
    const Tensor x_hat = graph.variable(std::move(mixed));
    const Tensor scores = ad::sum(criticize(critic, x_hat, mask, rank_conditioned));
    // Rows are independent, so d(sum f)/dx_hat holds each row's own gradient.
    const Tensor grads = graph.grad(scores, std::span<const Tensor>(&x_hat, 1), true)[0];
    const Tensor norms = ad::row_norm(grads);
    if (!norms.values().allFinite()) throw std::domain_error("gradient_penalty: non-finite gradient norm");
    return ad::mean(ad::square(ad::affine(norms, 1.0, -1.0)));
}

Tensor critic_objective(const LossTerms& terms, const Tensor& penalty, double lambda_gp) {
    return ad::add(terms.total, ad::scale(penalty, lambda_gp));
}

std::vector<double> rank_score(std::span<const double> v_hat, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("rank_score: lambda must be >= 0");
    std::vector<double> scores;
    scores.reserve(v_hat.size());
    for (std::size_t i = 0; i < v_hat.size(); ++i) {
        if (!std::isfinite(v_hat[i]))
            throw std::domain_error("rank_score: non-finite V_hat at s = " + std::to_string(i + 1));
        scores.push_back(v_hat[i] + lambda * static_cast<double>(i + 1));
    }
    return scores;
}

Index smallest_argmin(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("smallest_argmin: empty input");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[best]) best = i;
    return static_cast<Index>(best + 1);
}

}  // namespace lwgan
