#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

// Closed-form recovery thresholds for Gaussian measurement maps. Inputs are
// the normalized rank beta = r/n and the threshold is a normalized
// measurement count mu = m/n^2. Rectangular problems use n = max(n1, n2),
// which is conservative.

namespace nucrec {

/// Weak threshold: 1 - 64/(9 pi^2) * ((1-beta)^{3/2} - beta^{3/2})^2, for
/// beta in [0, 0.5). Throws DomainError outside that range.
double weak_bound_mu(double beta);

struct StrongFg {
    double f = 0.0;
    double g = 0.0;
};

/// f(beta, eps) = 8/(3 pi) ((1-beta)^{3/2} - beta^{3/2} - 4 eps) / (1 + 4 eps)
/// g(beta, eps) = sqrt(2 beta (2 - beta)) ln(3 pi / (2 eps))
StrongFg strong_fg(double beta, double eps);

struct StrongBound {
    double mu = 1.0;
    /// Maximizing eps; 0 when infeasible.
    double eps = 0.0;
    /// False when f - g <= 0 for every eps; mu is then the sentinel 1.0.
    bool feasible = false;
};

/// 1 - sup_{eps > 0, f - g > 0} (f - g)^2. The supremum is taken over a
/// 400-point log grid on [1e-9, 1] refined by golden-section search.
StrongBound strong_bound(double beta);
double strong_bound_mu(double beta);

/// 8/(3 pi), the mean singular value of a Gaussian matrix in units of sqrt(D).
double mp_constant();
/// (1/2pi) int_0^4 sqrt(4 - t) dt by adaptive Simpson quadrature.
double mp_constant_quadrature(double tolerance = 1e-13);
/// The quadrature integrand (1/2pi) sqrt(4 - t).
double mp_integrand(double t);

/// Leading-order E||G||_* = 8/(3 pi) D^{3/2} for G in G(D); D >= 1.
double expected_nuclear_norm(long long D);
/// sqrt(D), the Gaussian-process standard deviation of ||G||_*.
double sigma_nuclear(long long D);

/// ln of the eps-net size bound (3 pi / (2 eps))^{r (n - r/2 - 1/2)} for
/// rank-r projectors on R^n. Requires 1 <= r <= n and 0 < eps <= 3 pi / 2.
double szarek_log_net_size(long long n, long long r, double eps);

enum class BoundKind { weak, strong };

std::string_view to_string(BoundKind kind);

struct BoundCurve {
    BoundKind kind = BoundKind::weak;
    std::vector<double> betas;
    std::vector<double> mus;
};

/// Curve on beta_i = 0.5 * i / points, i = 0..points-1.
BoundCurve bound_curve(BoundKind kind, int points);

/// CSV "beta,mu,kind", one row per point, 6 significant digits. Writes the
/// header line only when `header` is set so several curves can share a file.
void write_bound_csv(std::ostream& out, const BoundCurve& curve, bool header = true);

}  // namespace nucrec
