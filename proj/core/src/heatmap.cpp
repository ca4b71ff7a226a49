#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "nucrec/bounds.hpp"
#include "nucrec/errors.hpp"
#include "nucrec/experiments.hpp"

namespace nucrec {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr double kBetaMax = 0.5;

double x_of(double beta) { return kLeft + beta / kBetaMax * (kWidth - kLeft - kRight); }
double y_of(double mu) { return kHeight - kBottom - mu * (kHeight - kTop - kBottom); }

// Cell extent along one axis: halfway to each neighbouring grid value.
std::pair<double, double> extent(const std::vector<double>& grid, double value, double fallback_half) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), value);
    const auto i = static_cast<std::size_t>(it - grid.begin());
    if (grid.size() < 2 || i >= grid.size()) return {value - fallback_half, value + fallback_half};
    const double left_half = i > 0 ? 0.5 * (grid[i] - grid[i - 1]) : 0.5 * (grid[1] - grid[0]);
    const double right_half = i + 1 < grid.size() ? 0.5 * (grid[i + 1] - grid[i]) : left_half;
    return {value - left_half, value + right_half};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string gray(double rate) {
    const int level = static_cast<int>(std::lround(std::clamp(rate, 0.0, 1.0) * 255.0));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", level, level, level);
    return buf;
}

void rect(std::ostream& out, const char* cls, double b0, double b1, double m0, double m1, const std::string& fill) {
    b0 = std::clamp(b0, 0.0, kBetaMax);
    b1 = std::clamp(b1, 0.0, kBetaMax);
    m0 = std::clamp(m0, 0.0, 1.0);
    m1 = std::clamp(m1, 0.0, 1.0);
    out << "  <rect class=\"" << cls << "\" x=\"" << fmt(x_of(b0)) << "\" y=\"" << fmt(y_of(m1)) << "\" width=\""
        << fmt(x_of(b1) - x_of(b0)) << "\" height=\"" << fmt(y_of(m0) - y_of(m1)) << "\" fill=\"" << fill
        << "\"/>\n";
}

void polyline(std::ostream& out, const char* cls, const std::string& stroke, const BoundCurve& curve, bool skip_sentinel) {
    out << "  <polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < curve.betas.size(); ++i) {
        if (skip_sentinel && curve.mus[i] >= 1.0) continue;
        out << (first ? "" : " ") << fmt(x_of(curve.betas[i])) << ',' << fmt(y_of(curve.mus[i]));
        first = false;
    }
    out << "\"/>\n";
}

}  // namespace

void write_heatmap_svg(std::ostream& out, const PhaseDiagram& d, bool overlay_weak, bool overlay_strong) {
    if (d.cells.empty() && d.skipped.empty()) throw DomainError("render_heatmap: diagram is empty");

    std::vector<double> betas, mus;
    for (const CellResult& c : d.cells) {
        betas.push_back(c.beta);
        mus.push_back(c.mu);
    }
    for (const SkippedCell& s : d.skipped) {
        betas.push_back(s.beta);
        mus.push_back(s.mu);
    }
    for (auto* v : {&betas, &mus}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    out << "  <title>Empirical recovery rate, n=" << d.spec.n << "</title>\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"#ffffff\"/>\n";
    rect(out, "frame", 0.0, kBetaMax, 0.0, 1.0, "#d9d9d9");

    for (const CellResult& c : d.cells) {
        const auto [b0, b1] = extent(betas, c.beta, 0.025);
        const auto [m0, m1] = extent(mus, c.mu, 0.025);
        rect(out, "cell", b0, b1, m0, m1, gray(static_cast<double>(c.successes) / c.attempts));
    }
    for (const SkippedCell& s : d.skipped) {
        const auto [b0, b1] = extent(betas, s.beta, 0.025);
        const auto [m0, m1] = extent(mus, s.mu, 0.025);
        rect(out, "skipped", b0, b1, m0, m1, "#9aa5b8");
    }

    constexpr int kCurvePoints = 200;
    if (overlay_weak) polyline(out, "weak-bound", "#d62728", bound_curve(BoundKind::weak, kCurvePoints), false);
    if (overlay_strong) polyline(out, "strong-bound", "#1f77b4", bound_curve(BoundKind::strong, kCurvePoints), true);

    // Axes and ticks.
    out << "  <g stroke=\"#000000\" stroke-width=\"1\">\n";
    out << "    <line x1=\"" << fmt(x_of(0)) << "\" y1=\"" << fmt(y_of(0)) << "\" x2=\"" << fmt(x_of(kBetaMax))
        << "\" y2=\"" << fmt(y_of(0)) << "\"/>\n";
    out << "    <line x1=\"" << fmt(x_of(0)) << "\" y1=\"" << fmt(y_of(0)) << "\" x2=\"" << fmt(x_of(0)) << "\" y2=\""
        << fmt(y_of(1)) << "\"/>\n";
    out << "  </g>\n";
    out << "  <g font-family=\"sans-serif\" font-size=\"12\" fill=\"#000000\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double beta = 0.1 * i;
        out << "    <text x=\"" << fmt(x_of(beta)) << "\" y=\"" << fmt(y_of(0) + 18) << "\" text-anchor=\"middle\">"
            << fmt(beta) << "</text>\n";
    }
    for (int i = 0; i <= 10; ++i) {
        const double mu = 0.1 * i;
        out << "    <text x=\"" << fmt(x_of(0) - 8) << "\" y=\"" << fmt(y_of(mu) + 4) << "\" text-anchor=\"end\">"
            << fmt(mu) << "</text>\n";
    }
    out << "    <text x=\"" << fmt(x_of(kBetaMax / 2)) << "\" y=\"" << fmt(kHeight - 15)
        << "\" text-anchor=\"middle\">beta = r/n</text>\n";
    out << "    <text x=\"18\" y=\"" << fmt(y_of(0.5)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << fmt(y_of(0.5)) << ")\">mu = m/n^2</text>\n";
    out << "  </g>\n";
    out << "</svg>\n";
}

void render_heatmap(const PhaseDiagram& d, bool overlay_weak, bool overlay_strong, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_heatmap_svg(out, d, overlay_weak, overlay_strong);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nucrec
