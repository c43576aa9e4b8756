#pragma once

#include "lwgan/dimsel.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lwgan::plot {

struct Series {
    std::string name;
    Matrix points;  // n x 2 or n x p for scatter
};

/// Rank score against s with the argmin drawn as a marker of class "argmin".
std::string scores_svg(const RankScoreTable& table);

/// Overlaid point clouds. Two-column data gives one panel; wider data gives
/// two side-by-side projections onto (x1, x2) and (x1, x3).
std::string scatter_svg(const std::vector<Series>& clouds);

/// One panel and one polyline per metrics column.
std::string losses_svg(const TrainHistory& history);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lwgan::plot
