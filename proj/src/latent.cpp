#include "lwgan/latent.hpp"

#include <stdexcept>
#include <string>

namespace lwgan {

RankMask::RankMask(Index d, Index s) : d_(d), s_(s) {
    if (d < 1 || s < 1 || s > d)
        throw std::out_of_range("RankMask: rank " + std::to_string(s) + " outside [1, " + std::to_string(d) + "]");
}

Matrix RankMask::matrix(Index rows) const {
    Matrix m = Matrix::Zero(rows, d_);
    m.leftCols(s_).setOnes();
    return m;
}

Tensor apply_mask(const RankMask& mask, const Tensor& z) {
    if (z.cols() != mask.dim())
        throw ad::ShapeError("apply_mask: latent width " + std::to_string(z.cols()) + " != d = " +
                             std::to_string(mask.dim()));
    if (mask.rank() == mask.dim()) return z;
    return ad::mul(z, Tensor(mask.matrix(z.rows())));
}

Matrix sample_normal(Rng& rng, Index n, Index d) {
    Matrix z(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) z(i, j) = rng.normal();
    return z;
}

Matrix sample_latent(Rng& rng, Index n, const RankMask& mask) {
    Matrix z = sample_normal(rng, n, mask.dim());
    z.rightCols(mask.dim() - mask.rank()).setZero();
    return z;
}

Matrix one_hot(Index d, Index s) {
    if (d < 1 || s < 1 || s > d)
        throw std::out_of_range("one_hot: rank " + std::to_string(s) + " outside [1, " + std::to_string(d) + "]");
    Matrix e = Matrix::Zero(1, d);
    e(0, s - 1) = 1.0;
    return e;
}

}  // namespace lwgan
