#pragma once

#include "lwgan/models.hpp"

#include <span>
#include <vector>

namespace lwgan {

/// Graph-attached scalar pieces of the empirical loss.
struct LossTerms {
    Tensor reconstruction;  // mean ||x - G(Q(x))||
    Tensor critic_gap;      // mean f(G(Q(x))) - mean f(G(A_s z0))
    Tensor total;           // reconstruction + critic_gap
};

/// Plain-value snapshot of the loss, as logged.
struct LossBreakdown {
    double reconstruction = 0.0;
    double critic_gap = 0.0;
    double total = 0.0;
    double gp = 0.0;
};

/// Everything the loss needs from a model, possibly graph-bound.
struct ModelView {
    NetView encoder;
    NetView generator;
    NetView critic;
    bool rank_conditioned = true;
};

ModelView view(const LwganModel& model);

/// L(x, z) = ||x - G(Q(x, e_s))|| + f(G(Q(x, e_s)), e_s) - f(G(z), e_s) for a
/// single 1 x p sample and a 1 x d latent that is already masked.
Tensor sample_loss(const ModelView& m, const Tensor& x, const Tensor& z, const RankMask& mask);

/// Batch means over rows of X paired with rows of z0 (unmasked; A_s is applied
/// here). Throws std::invalid_argument on empty or mismatched batches.
LossTerms empirical_terms(const ModelView& m, const Tensor& x, const Tensor& z0, const RankMask& mask);

/// Detached evaluation of the empirical loss over a possibly large dataset,
/// processed in row chunks.
LossBreakdown empirical_loss(const LwganModel& model, const Matrix& x, const Matrix& z0, Index rank,
                             Index chunk = 2048);

/// Two-sided gradient penalty mean_i (||grad_x f(x_hat_i)|| - 1)^2 with
/// x_hat_i = eps_i x_real_i + (1 - eps_i) x_gen_i. The interpolates are
/// registered as leaves of `graph` and the input gradient is taken with
/// create_graph, so the result is differentiable in the critic parameters.
/// Throws std::domain_error when a gradient norm is not finite.
Tensor gradient_penalty(ad::Graph& graph, NetView critic, const Matrix& x_real, const Matrix& x_gen,
                        const Matrix& eps, const RankMask& mask, bool rank_conditioned = true);

/// J = empirical loss total + lambda_gp * penalty.
Tensor critic_objective(const LossTerms& terms, const Tensor& penalty, double lambda_gp);

/// scores(s) = v_hat(s) + lambda * s for s = 1..d. Throws std::domain_error on
/// a non-finite entry and std::invalid_argument for negative lambda.
std::vector<double> rank_score(std::span<const double> v_hat, double lambda);

/// 1-based index of the smallest minimum.
Index smallest_argmin(std::span<const double> values);

}  // namespace lwgan
