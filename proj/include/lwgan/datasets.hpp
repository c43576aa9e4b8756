#pragma once

#include "lwgan/autodiff.hpp"
#include "lwgan/rng.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace lwgan {

using ad::Index;
using ad::Matrix;

/// n x p data matrix. Rows are observations.
struct Dataset {
    Matrix rows;
    std::string name;
    /// Known intrinsic dimension of the generating manifold (synthetic data).
    std::optional<Index> intrinsic_dim;

    [[nodiscard]] Index n() const noexcept { return rows.rows(); }
    [[nodiscard]] Index p() const noexcept { return rows.cols(); }
    /// Throws std::invalid_argument when empty or non-finite.
    void validate() const;
};

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// X1 = sin(t), X2 = 2V, X3 = sign(t) cos(t) with t = 3 pi (U - 0.5); sign(0) = 0.
std::array<double, 3> s_curve_point(double u, double v);
/// X = (V cos V, V sin V) with V = 3 pi (1 + 2U) / 2.
std::array<double, 2> swiss_roll_point(double u);
/// (x1, x2, x3, x4, x1 + x2 + x3 + x4^2).
std::array<double, 5> hyperplane_point(double x1, double x2, double x3, double x4);

/// U ~ Unif(0, 1), V ~ N(0, 1); p = 3, r = 2.
Dataset gen_s_curve(Index n, Rng& rng);
/// U ~ N(0, 1); p = 2, r = 1.
Dataset gen_swiss_roll(Index n, Rng& rng);
/// X1..X4 iid N(0, 1); p = 5, r = 4.
Dataset gen_hyperplane(Index n, Rng& rng);

/// Dispatch by name (swiss_roll, s_curve, hyperplane); data drawn from the
/// data stream of `seed`.
Dataset generate_dataset(const std::string& name, Index n, std::uint64_t seed);

/// Header row x1..xp, comma separated, LF line endings, shortest round-trip
/// decimal formatting.
void save_csv(const Dataset& data, const std::filesystem::path& path);
/// Throws CsvError with the offending line number on malformed or non-finite
/// input, and for files with no data rows.
Dataset load_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

struct Standardization {
    Matrix mean;  // 1 x p
    Matrix scale; // 1 x p
};

/// Centers and scales each column in place; constant columns keep scale 1.
Standardization standardize(Dataset& data);

}  // namespace lwgan
