#include "lwgan/otoracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lwgan::ot {

namespace {

void check_samples(const Matrix& a, const Matrix& b) {
    if (a.rows() < 1) throw std::invalid_argument("w1: empty sample");
    if (a.rows() != b.rows())
        throw std::invalid_argument("w1: sample sizes differ (" + std::to_string(a.rows()) + " vs " +
                                    std::to_string(b.rows()) + ")");
    if (a.cols() != b.cols()) throw std::invalid_argument("w1: dimensions differ");
    if (!a.allFinite() || !b.allFinite()) throw std::invalid_argument("w1: non-finite sample entries");
}

/// Sums the matched costs in row order so equal assignments give bitwise
/// equal totals regardless of which solver produced them.
double matched_mean(const Matrix& cost, const std::vector<Index>& column_of_row) {
    double total = 0.0;
    for (Index i = 0; i < cost.rows(); ++i) total += cost(i, column_of_row[static_cast<std::size_t>(i)]);
    return total / static_cast<double>(cost.rows());
}

}  // namespace

Matrix distance_matrix(const Matrix& a, const Matrix& b) {
    Matrix d(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
    return d;
}

Assignment solve_assignment(const Matrix& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw std::invalid_argument("solve_assignment: cost matrix must be square");
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is a virtual column used as the path root.
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<Index> row_of_col(static_cast<std::size_t>(n + 1), 0);
    std::vector<Index> way(static_cast<std::size_t>(n + 1), 0);

    for (Index i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        Index j0 = 0;
        std::vector<double> min_slack(static_cast<std::size_t>(n + 1), inf);
        std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = row_of_col[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) continue;
                const double reduced = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
                if (reduced < min_slack[uj]) {
                    min_slack[uj] = reduced;
                    way[uj] = j0;
                }
                if (min_slack[uj] < delta) {
                    delta = min_slack[uj];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                if (used[uj]) {
                    u[static_cast<std::size_t>(row_of_col[uj])] += delta;
                    v[uj] -= delta;
                } else {
                    min_slack[uj] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            row_of_col[static_cast<std::size_t>(j0)] = row_of_col[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    Assignment out;
    out.column_of_row.assign(static_cast<std::size_t>(n), 0);
    for (Index j = 1; j <= n; ++j)
        out.column_of_row[static_cast<std::size_t>(row_of_col[static_cast<std::size_t>(j)] - 1)] = j - 1;
    for (Index i = 0; i < n; ++i) out.cost += cost(i, out.column_of_row[static_cast<std::size_t>(i)]);
    return out;
}

double w1_exact(const Matrix& a, const Matrix& b) {
    check_samples(a, b);
    const Matrix cost = distance_matrix(a, b);
    return matched_mean(cost, solve_assignment(cost).column_of_row);
}

double w1_brute(const Matrix& a, const Matrix& b) {
    check_samples(a, b);
    if (a.rows() > 8) throw std::invalid_argument("w1_brute: m = " + std::to_string(a.rows()) + " exceeds 8");
    const Matrix cost = distance_matrix(a, b);
    std::vector<Index> perm(static_cast<std::size_t>(a.rows()));
    std::iota(perm.begin(), perm.end(), Index{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, matched_mean(cost, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace lwgan::ot
