#include "lwgan/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

namespace lwgan {

void Dataset::validate() const {
    if (rows.rows() < 1 || rows.cols() < 1) throw std::invalid_argument("Dataset: need n >= 1 and p >= 1");
    if (!rows.allFinite()) throw std::invalid_argument("Dataset: non-finite entries");
}

std::array<double, 3> s_curve_point(double u, double v) {
    const double t = 3.0 * std::numbers::pi * (u - 0.5);
    const double sign = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    return {std::sin(t), 2.0 * v, sign * std::cos(t)};
}

std::array<double, 2> swiss_roll_point(double u) {
    const double v = 3.0 * std::numbers::pi * (1.0 + 2.0 * u) / 2.0;
    return {v * std::cos(v), v * std::sin(v)};
}

std::array<double, 5> hyperplane_point(double x1, double x2, double x3, double x4) {
    return {x1, x2, x3, x4, x1 + x2 + x3 + x4 * x4};
}

Dataset gen_s_curve(Index n, Rng& rng) {
    Dataset data{Matrix(n, 3), "s_curve", 2};
    for (Index i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const double v = rng.normal();
        const auto pt = s_curve_point(u, v);
        for (Index j = 0; j < 3; ++j) data.rows(i, j) = pt[static_cast<std::size_t>(j)];
    }
    return data;
}

Dataset gen_swiss_roll(Index n, Rng& rng) {
    Dataset data{Matrix(n, 2), "swiss_roll", 1};
    for (Index i = 0; i < n; ++i) {
        const auto pt = swiss_roll_point(rng.normal());
        data.rows(i, 0) = pt[0];
        data.rows(i, 1) = pt[1];
    }
    return data;
}

Dataset gen_hyperplane(Index n, Rng& rng) {
    Dataset data{Matrix(n, 5), "hyperplane", 4};
    for (Index i = 0; i < n; ++i) {
        const double x1 = rng.normal();
        const double x2 = rng.normal();
        const double x3 = rng.normal();
        const double x4 = rng.normal();
        const auto pt = hyperplane_point(x1, x2, x3, x4);
        for (Index j = 0; j < 5; ++j) data.rows(i, j) = pt[static_cast<std::size_t>(j)];
    }
    return data;
}

Dataset generate_dataset(const std::string& name, Index n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    Rng rng = Rng(seed).split(streams::kData);
    if (name == "swiss_roll") return gen_swiss_roll(n, rng);
    if (name == "s_curve") return gen_s_curve(n, rng);
    if (name == "hyperplane") return gen_hyperplane(n, rng);
    throw std::invalid_argument("unknown dataset '" + name + "' (expected swiss_roll, s_curve or hyperplane)");
}

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open " + path.string() + " for writing");
    for (Index j = 0; j < data.p(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
    out << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.p(); ++j) out << (j ? "," : "") << format_double(data.rows(i, j));
        out << '\n';
    }
    if (!out) throw CsvError("write failed for " + path.string());
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw CsvError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto columns = static_cast<Index>(std::count(line.begin(), line.end(), ',') + 1);

    std::vector<double> values;
    Index line_no = 1;
    Index rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Index fields = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc{})
                throw CsvError(path.string() + ":" + std::to_string(line_no) + ": malformed number in field " +
                               std::to_string(fields + 1));
            if (!std::isfinite(v))
                throw CsvError(path.string() + ":" + std::to_string(line_no) + ": non-finite value in field " +
                               std::to_string(fields + 1));
            values.push_back(v);
            ++fields;
            p = res.ptr;
            if (p == end) break;
            if (*p != ',')
                throw CsvError(path.string() + ":" + std::to_string(line_no) + ": unexpected character after field " +
                               std::to_string(fields));
            ++p;
        }
        if (fields != columns)
            throw CsvError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                           " fields, got " + std::to_string(fields));
        ++rows;
    }
    if (rows == 0) throw CsvError(path.string() + ": no data rows");

    Dataset data;
    data.name = path.stem().string();
    data.rows.resize(rows, columns);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < columns; ++j) data.rows(i, j) = values[static_cast<std::size_t>(i * columns + j)];
    return data;
}

Standardization standardize(Dataset& data) {
    Standardization s;
    s.mean = data.rows.colwise().mean();
    s.scale = Matrix::Ones(1, data.p());
    for (Index j = 0; j < data.p(); ++j) {
        const double sd = std::sqrt((data.rows.col(j).array() - s.mean(0, j)).square().sum() /
                                    std::max<double>(1.0, static_cast<double>(data.n() - 1)));
        if (sd > 0.0) s.scale(0, j) = sd;
    }
    data.rows = ((data.rows.rowwise() - s.mean.row(0)).array().rowwise() / s.scale.row(0).array()).matrix();
    return s;
}

}  // namespace lwgan
