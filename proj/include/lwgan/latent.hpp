#pragma once

#include "lwgan/autodiff.hpp"
#include "lwgan/rng.hpp"

namespace lwgan {

using ad::Index;
using ad::Matrix;
using ad::Tensor;

/// Rank-s projection A_s = diag(1,...,1,0,...,0) in d dimensions, 1 <= s <= d.
class RankMask {
public:
    /// Throws std::out_of_range unless 1 <= s <= d.
    RankMask(Index d, Index s);

    [[nodiscard]] Index dim() const noexcept { return d_; }
    [[nodiscard]] Index rank() const noexcept { return s_; }

    /// rows x d matrix of ones in the first s columns, zeros elsewhere.
    [[nodiscard]] Matrix matrix(Index rows) const;

    bool operator==(const RankMask&) const = default;

private:
    Index d_;
    Index s_;
};

/// Zeroes the last d - s columns of z. Implemented as an elementwise product
/// with a constant so gradients through the masked coordinates are exactly 0.
Tensor apply_mask(const RankMask& mask, const Tensor& z);

/// n rows of N(0, I_d) with the mask applied: the first s columns are standard
/// normal and the rest are zero. Draws are made row by row, all d coordinates
/// per row, so the unmasked prefix does not depend on s.
Matrix sample_latent(Rng& rng, Index n, const RankMask& mask);

/// n rows of unmasked N(0, I_d).
Matrix sample_normal(Rng& rng, Index n, Index d);

/// 1 x d row with a one in position s (1-based). Throws std::out_of_range.
Matrix one_hot(Index d, Index s);

}  // namespace lwgan
