#include "lwgan/plot.hpp"

#include "lwgan/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lwgan::plot {

namespace {

constexpr std::array<const char*, 4> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double m = 0.05 * (hi - lo);
        lo -= m;
        hi += m;
    }
};

/// Maps data coordinates into a panel rectangle.
struct Panel {
    double x0, y0, w, h;
    Range xr, yr;

    [[nodiscard]] double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
    [[nodiscard]] double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }

    void frame(std::ostringstream& out, const std::string& title, const std::string& xlabel) const {
        out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
            << "\" fill=\"none\" stroke=\"#333\"/>\n";
        out << "<text x=\"" << fmt(x0 + w / 2) << "\" y=\"" << fmt(y0 - 8)
            << "\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
        out << "<text x=\"" << fmt(x0 + w / 2) << "\" y=\"" << fmt(y0 + h + 30)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << xlabel << "</text>\n";
        out << "<text x=\"" << fmt(x0) << "\" y=\"" << fmt(y0 + h + 14) << "\" font-size=\"10\">" << fmt(xr.lo)
            << "</text>\n";
        out << "<text x=\"" << fmt(x0 + w) << "\" y=\"" << fmt(y0 + h + 14)
            << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(xr.hi) << "</text>\n";
        out << "<text x=\"" << fmt(x0 - 4) << "\" y=\"" << fmt(y0 + h) << "\" text-anchor=\"end\" font-size=\"10\">"
            << fmt(yr.lo) << "</text>\n";
        out << "<text x=\"" << fmt(x0 - 4) << "\" y=\"" << fmt(y0 + 10)
            << "\" text-anchor=\"end\" font-size=\"10\">" << fmt(yr.hi) << "</text>\n";
    }
};

std::string header(double width, double height) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(width) << "\" height=\""
        << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    return out.str();
}

void polyline(std::ostringstream& out, const Panel& p, const std::vector<double>& xs, const std::vector<double>& ys,
              const std::string& name, const char* color) {
    out << "<polyline class=\"series\" data-name=\"" << name << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(ys[i])) continue;
        out << fmt(p.px(xs[i])) << ',' << fmt(p.py(ys[i])) << ' ';
    }
    out << "\"/>\n";
}

}  // namespace

std::string scores_svg(const RankScoreTable& table) {
    if (table.dim() == 0) throw std::invalid_argument("scores_svg: empty table");
    Panel p{70, 40, 460, 300, {}, {}};
    std::vector<double> xs;
    for (Index s = 1; s <= table.dim(); ++s) {
        xs.push_back(static_cast<double>(s));
        p.xr.add(static_cast<double>(s));
        p.yr.add(table.rho_hat[static_cast<std::size_t>(s - 1)]);
        p.yr.add(table.v_hat[static_cast<std::size_t>(s - 1)]);
    }
    p.xr.pad();
    p.yr.pad();
    std::ostringstream out;
    out << header(600, 400);
    p.frame(out, "rank score (lambda = " + format_double(table.lambda) + ")", "s");
    polyline(out, p, xs, table.v_hat, "V_hat", kColors[0]);
    polyline(out, p, xs, table.rho_hat, "rho_hat", kColors[1]);
    for (std::size_t i = 0; i < xs.size(); ++i)
        out << "<circle cx=\"" << fmt(p.px(xs[i])) << "\" cy=\"" << fmt(p.py(table.rho_hat[i]))
            << "\" r=\"3\" fill=\"" << kColors[1] << "\"/>\n";
    const auto best = static_cast<std::size_t>(table.r_hat - 1);
    out << "<circle class=\"argmin\" data-s=\"" << table.r_hat << "\" cx=\"" << fmt(p.px(xs[best]))
        << "\" cy=\"" << fmt(p.py(table.rho_hat[best])) << "\" r=\"8\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt(p.px(xs[best]) + 10) << "\" y=\"" << fmt(p.py(table.rho_hat[best]) - 10)
        << "\" font-size=\"12\">r = " << table.r_hat << "</text>\n";
    out << "<text x=\"540\" y=\"60\" font-size=\"11\" fill=\"" << kColors[0] << "\">V_hat</text>\n";
    out << "<text x=\"540\" y=\"76\" font-size=\"11\" fill=\"" << kColors[1] << "\">rho_hat</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string scatter_svg(const std::vector<Series>& clouds) {
    if (clouds.empty()) throw std::invalid_argument("scatter_svg: nothing to draw");
    const Index p = clouds.front().points.cols();
    for (const Series& c : clouds)
        if (c.points.cols() != p) throw std::invalid_argument("scatter_svg: clouds differ in dimension");
    std::vector<std::pair<Index, Index>> axes;
    if (p <= 2) axes.emplace_back(0, p == 2 ? 1 : 0);
    else axes = {{0, 1}, {0, 2}};

    const double panel_w = 420;
    std::ostringstream out;
    out << header(80 + static_cast<double>(axes.size()) * (panel_w + 60), 520);
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const auto [cx, cy] = axes[a];
        Panel panel{60 + static_cast<double>(a) * (panel_w + 60), 40, panel_w, 420, {}, {}};
        for (const Series& c : clouds)
            for (Index i = 0; i < c.points.rows(); ++i) {
                panel.xr.add(c.points(i, cx));
                panel.yr.add(p == 1 ? 0.0 : c.points(i, cy));
            }
        panel.xr.pad();
        panel.yr.pad();
        const std::string title = p == 1 ? "x1" : "x" + std::to_string(cx + 1) + " vs x" + std::to_string(cy + 1);
        panel.frame(out, title, "x" + std::to_string(cx + 1));
        for (std::size_t k = 0; k < clouds.size(); ++k) {
            out << "<g class=\"cloud\" data-name=\"" << clouds[k].name << "\" fill=\"" << kColors[k % kColors.size()]
                << "\" fill-opacity=\"0.5\">\n";
            for (Index i = 0; i < clouds[k].points.rows(); ++i) {
                const double y = p == 1 ? 0.0 : clouds[k].points(i, cy);
                out << "<circle cx=\"" << fmt(panel.px(clouds[k].points(i, cx))) << "\" cy=\"" << fmt(panel.py(y))
                    << "\" r=\"1.5\"/>\n";
            }
            out << "</g>\n";
        }
    }
    for (std::size_t k = 0; k < clouds.size(); ++k)
        out << "<text x=\"70\" y=\"" << fmt(490 + 14.0 * static_cast<double>(k) - 14.0 * static_cast<double>(clouds.size() - 1))
            << "\" font-size=\"11\" fill=\"" << kColors[k % kColors.size()] << "\">" << clouds[k].name << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string losses_svg(const TrainHistory& history) {
    struct Column {
        const char* name;
        double IterationRecord::*field;
    };
    const std::array<Column, 4> columns = {{{"critic_gap_pre", &IterationRecord::critic_gap_pre},
                                            {"critic_gap_post", &IterationRecord::critic_gap_post},
                                            {"recon", &IterationRecord::recon},
                                            {"gp", &IterationRecord::gp}}};
    std::ostringstream out;
    out << header(1000, 640);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        Panel panel{70 + static_cast<double>(c % 2) * 480, 40 + static_cast<double>(c / 2) * 300, 400, 220, {}, {}};
        std::vector<double> xs;
        std::vector<double> ys;
        for (const IterationRecord& r : history.records) {
            xs.push_back(static_cast<double>(r.iter));
            ys.push_back(r.*columns[c].field);
            panel.xr.add(xs.back());
            panel.yr.add(ys.back());
        }
        panel.xr.pad();
        panel.yr.pad();
        panel.frame(out, columns[c].name, "iteration");
        polyline(out, panel, xs, ys, columns[c].name, kColors[c]);
    }
    out << "</svg>\n";
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace lwgan::plot
