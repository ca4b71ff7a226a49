#include "nucrec/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>

#include "nucrec/errors.hpp"

namespace nucrec {

namespace {

constexpr double kPi = std::numbers::pi;

void require_beta(double beta, const char* what) {
    if (!(beta >= 0.0 && beta < 0.5)) {
        throw DomainError(std::string(what) + ": beta must lie in [0, 0.5), got " + std::to_string(beta));
    }
}

double power_gap(double beta) { return std::pow(1.0 - beta, 1.5) - std::pow(beta, 1.5); }

double strong_objective(double beta, double eps) {
    const StrongFg fg = strong_fg(beta, eps);
    return fg.f - fg.g;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double weak_bound_mu(double beta) {
    require_beta(beta, "weak_bound_mu");
    const double gap = power_gap(beta);
    return std::min(1.0, 1.0 - 64.0 / (9.0 * kPi * kPi) * gap * gap);
}

StrongFg strong_fg(double beta, double eps) {
    require_beta(beta, "strong_fg");
    if (!(eps > 0.0)) throw DomainError("strong_fg: eps must be positive");
    const double f = 8.0 / (3.0 * kPi) * (power_gap(beta) - 4.0 * eps) / (1.0 + 4.0 * eps);
    const double g = std::sqrt(2.0 * beta * (2.0 - beta)) * std::log(3.0 * kPi / (2.0 * eps));
    return StrongFg{f, g};
}

StrongBound strong_bound(double beta) {
    require_beta(beta, "strong_bound");
    constexpr int kGrid = 400;
    constexpr double kLogLo = -9.0;
    constexpr double kLogHi = 0.0;
    const double step = (kLogHi - kLogLo) / (kGrid - 1);

    int best = -1;
    double best_value = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        const double value = strong_objective(beta, std::pow(10.0, kLogLo + i * step));
        if (value > 0.0 && value > best_value) {
            best = i;
            best_value = value;
        }
    }
    if (best < 0) return StrongBound{};

    // Golden-section on log10(eps) over the bracket around the best grid point.
    double lo = kLogLo + std::max(best - 1, 0) * step;
    double hi = kLogLo + std::min(best + 1, kGrid - 1) * step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto objective = [&](double log_eps) { return strong_objective(beta, std::pow(10.0, log_eps)); };
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = objective(c);
    double fd = objective(d);
    for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    double best_log = kLogLo + best * step;
    const double refined_log = 0.5 * (lo + hi);
    const double refined = objective(refined_log);
    if (refined > best_value) {
        best_value = refined;
        best_log = refined_log;
    }
    return StrongBound{1.0 - best_value * best_value, std::pow(10.0, best_log), true};
}

double strong_bound_mu(double beta) { return strong_bound(beta).mu; }

double mp_constant() { return 8.0 / (3.0 * kPi); }

double mp_integrand(double t) { return std::sqrt(std::max(0.0, 4.0 - t)) / (2.0 * kPi); }

double mp_constant_quadrature(double tolerance) {
    if (!(tolerance > 0.0)) throw DomainError("mp_constant_quadrature: tolerance must be positive");
    const std::function<double(double)> f = mp_integrand;
    const double fa = f(0.0);
    const double fm = f(2.0);
    const double fb = f(4.0);
    const double whole = 4.0 / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, 0.0, 4.0, fa, fm, fb, whole, tolerance, 60);
}

double expected_nuclear_norm(long long D) {
    if (D < 1) throw DomainError("expected_nuclear_norm: D must be >= 1");
    return mp_constant() * std::pow(static_cast<double>(D), 1.5);
}

double sigma_nuclear(long long D) {
    if (D < 1) throw DomainError("sigma_nuclear: D must be >= 1");
    return std::sqrt(static_cast<double>(D));
}

double szarek_log_net_size(long long n, long long r, double eps) {
    if (r < 1 || r > n) throw DomainError("szarek_log_net_size: need 1 <= r <= n");
    if (!(eps > 0.0 && eps <= 1.5 * kPi)) throw DomainError("szarek_log_net_size: need 0 < eps <= 3pi/2");
    const double exponent = static_cast<double>(r) * (static_cast<double>(n) - 0.5 * r - 0.5);
    return exponent * std::log(3.0 * kPi / (2.0 * eps));
}

std::string_view to_string(BoundKind kind) { return kind == BoundKind::weak ? "weak" : "strong"; }

BoundCurve bound_curve(BoundKind kind, int points) {
    if (points < 1) throw DomainError("bound_curve: points must be positive");
    BoundCurve curve;
    curve.kind = kind;
    curve.betas.reserve(points);
    curve.mus.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double beta = 0.5 * i / points;
        curve.betas.push_back(beta);
        curve.mus.push_back(kind == BoundKind::weak ? weak_bound_mu(beta) : strong_bound_mu(beta));
    }
    return curve;
}

void write_bound_csv(std::ostream& out, const BoundCurve& curve, bool header) {
    if (header) out << "beta,mu,kind\n";
    const auto old_precision = out.precision(6);
    const auto old_flags = out.flags();
    out.unsetf(std::ios::floatfield);
    for (std::size_t i = 0; i < curve.betas.size(); ++i) {
        out << curve.betas[i] << ',' << curve.mus[i] << ',' << to_string(curve.kind) << '\n';
    }
    out.precision(old_precision);
    out.flags(old_flags);
}

}  // namespace nucrec
