#pragma once

#include <limits>
#include <optional>

#include "nucrec/ensemble.hpp"
#include "nucrec/matcore.hpp"

namespace nucrec {

/// minimize ||X||_* subject to map(X) = b, optionally with the planted matrix
/// that generated b.
class AffineProblem {
public:
    AffineProblem(LinearMap map, Vector b, std::optional<Matrix> planted = std::nullopt);

    /// b = map(planted).
    static AffineProblem from_planted(LinearMap map, Matrix planted);

    const LinearMap& map() const noexcept { return map_; }
    const Vector& b() const noexcept { return b_; }
    const std::optional<Matrix>& planted() const noexcept { return planted_; }

private:
    LinearMap map_;
    Vector b_;
    std::optional<Matrix> planted_;
};

struct SolverConfig {
    int max_iter = 5000;
    /// Threshold on max(primal, dual) residual, relative to (1 + ||b||).
    double tol = 1e-7;
    /// Initial ADMM penalty rho.
    double penalty = 1.0;
    /// Residual balancing: rescale rho by 2 when one residual exceeds the
    /// other by more than a factor of 10.
    bool adaptive_penalty = true;
    /// Count increases of the projected objective after the first 50
    /// iterations. Costs one extra SVD per iteration.
    bool track_objective = false;

    void validate() const;
};

struct RecoveryResult {
    Matrix X;
    bool converged = false;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double nuclear_norm = 0.0;
    /// Only populated with SolverConfig::track_objective.
    int objective_increases = 0;
};

/// Singular value soft-thresholding: U diag(max(s - tau, 0)) V^T, the proximal
/// map of tau * ||.||_*.
Matrix svt(const Matrix& m, double tau);

/// Euclidean projection onto {X : map(X) = b} with a cached factorization of
/// A A^T. Throws DegenerateMap when A A^T is singular. The problem must
/// outlive the projector.
class AffineProjector {
public:
    explicit AffineProjector(const AffineProblem& problem);

    Matrix project(const Matrix& w) const;

private:
    const AffineProblem* problem_;
    Matrix pinv_;  // A^T (A A^T)^{-1}, (n1*n2) x m
};

Matrix project_affine(const Matrix& w, const AffineProblem& problem);

/// ADMM on  min ||Z||_*  s.t.  X = Z, map(X) = b.
///
/// Each iteration projects onto the affine set, applies svt with threshold
/// 1/rho, and updates the scaled dual. The returned X is the affine projection
/// of the final low-rank iterate, so it is feasible to projection accuracy
/// whether or not the run converged. Hitting max_iter is reported through
/// `converged = false`, never by throwing.
RecoveryResult solve_min_nuclear(const AffineProblem& problem, const SolverConfig& config = {});
RecoveryResult solve_min_nuclear(const AffineProblem& problem, const SolverConfig& config,
                                 const Matrix& initial);

inline constexpr double kRecoveryThreshold = 1e-3;

double relative_error(const Matrix& x, const Matrix& reference);

/// True iff ||x - x0||_F / ||x0||_F < threshold (strict).
bool check_recovery(const Matrix& x, const Matrix& x0, double threshold = kRecoveryThreshold);

struct OptimalityReport {
    /// +inf when the null space is empty.
    double min_gap = std::numeric_limits<double>::infinity();
    bool pass = true;
};

/// Spot check of ||X + tY||_* >= ||X||_* over sampled null-space directions.
///
/// Samples `trials` unit combinations Y of an orthonormal null-space basis and
/// evaluates (||X + tY||_* - ||X||_*) / t for both signs of Y and
/// t in {1e-4, 1e-3, 1e-2}. Passes iff the smallest value is >= -1e-5.
OptimalityReport nullspace_optimality_check(const Matrix& x, const AffineProblem& problem, int trials,
                                            RngStream& rng);

}  // namespace nucrec
