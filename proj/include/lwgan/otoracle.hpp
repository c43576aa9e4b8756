#pragma once

#include "lwgan/autodiff.hpp"

#include <vector>

namespace lwgan::ot {

using ad::Index;
using ad::Matrix;

/// Optimal assignment of rows to columns of a square cost matrix.
struct Assignment {
    std::vector<Index> column_of_row;
    double cost = 0.0;
};

/// Shortest augmenting path (Jonker-Volgenant style) solver with row/column
/// potentials, O(m^3).
Assignment solve_assignment(const Matrix& cost);

/// Pairwise l2 distances between the rows of a and b.
Matrix distance_matrix(const Matrix& a, const Matrix& b);

/// Exact W1 between two uniform empirical measures with the same number of
/// points: the optimal assignment cost divided by m. Throws
/// std::invalid_argument on size or dimension mismatch or empty samples.
double w1_exact(const Matrix& a, const Matrix& b);

/// Exhaustive minimum over all m! assignments; m <= 8.
double w1_brute(const Matrix& a, const Matrix& b);

}  // namespace lwgan::ot
