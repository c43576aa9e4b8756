#include "doctest.h"

#include "lwgan/latent.hpp"

#include "support.hpp"

using namespace lwgan;

TEST_CASE("rank mask bounds") {
    CHECK_NOTHROW(RankMask(5, 1));
    CHECK_NOTHROW(RankMask(5, 5));
    CHECK_THROWS_AS(RankMask(5, 0), std::out_of_range);
    CHECK_THROWS_AS(RankMask(5, 6), std::out_of_range);
    CHECK(RankMask(3, 2).matrix(2) == (Matrix(2, 3) << 1, 1, 0, 1, 1, 0).finished());
}

TEST_CASE("apply_mask") {
    const Tensor z(1, 3, {2.0, 5.0, -1.0});
    CHECK(apply_mask(RankMask(3, 1), z).values() == (Matrix(1, 3) << 2.0, 0.0, 0.0).finished());
    CHECK(apply_mask(RankMask(3, 3), z).values() == z.values());
    CHECK_THROWS_AS(apply_mask(RankMask(4, 2), z), ad::ShapeError);

    Rng rng(1);
    const Tensor r(testing::uniform_matrix(rng, 6, 5));
    const RankMask m(5, 3);
    const Tensor once = apply_mask(m, r);
    CHECK(apply_mask(m, once).values() == once.values());

    // Commutes with batching.
    for (Index i = 0; i < r.rows(); ++i)
        CHECK(apply_mask(m, Tensor(Matrix(r.values().row(i)))).values() == once.values().row(i));
}

TEST_CASE("masked coordinates receive exactly zero gradient") {
    ad::Graph g;
    const Tensor z = g.variable(Tensor(1, 3, {0.3, -0.2, 0.9}));
    const Tensor y = ad::sum(ad::square(apply_mask(RankMask(3, 1), z)));
    const Tensor gz = g.grad(y, {z})[0];
    CHECK(gz(0, 0) == doctest::Approx(0.6));
    CHECK(gz(0, 1) == 0.0);
    CHECK(gz(0, 2) == 0.0);
}

TEST_CASE("sample_latent zeros and moments") {
    Rng rng(2024);
    const Matrix z = sample_latent(rng, 100000, RankMask(5, 2));
    CHECK(z.rightCols(3).isZero(0.0));
    const double mean = z.col(0).mean();
    const double var = (z.col(0).array() - mean).square().sum() / static_cast<double>(z.rows() - 1);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
    const double cov = ((z.col(0).array() - mean) * (z.col(1).array() - z.col(1).mean())).mean();
    CHECK(std::abs(cov) < 0.02);
}

TEST_CASE("sample_latent prefix does not depend on the rank") {
    Rng a(5);
    Rng b(5);
    const Matrix z2 = sample_latent(a, 10, RankMask(4, 2));
    const Matrix z4 = sample_latent(b, 10, RankMask(4, 4));
    CHECK(z2.leftCols(2) == z4.leftCols(2));
}

TEST_CASE("one_hot") {
    CHECK(one_hot(5, 2) == (Matrix(1, 5) << 0, 1, 0, 0, 0).finished());
    CHECK(one_hot(1, 1) == Matrix::Ones(1, 1));
    for (Index d = 1; d <= 6; ++d)
        for (Index s = 1; s <= d; ++s) CHECK(one_hot(d, s).sum() == 1.0);
    CHECK_THROWS_AS(one_hot(3, 0), std::out_of_range);
    CHECK_THROWS_AS(one_hot(3, 4), std::out_of_range);
}
