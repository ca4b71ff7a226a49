#pragma once

#include <limits>

#include "nucrec/ensemble.hpp"
#include "nucrec/matcore.hpp"

// Null-space certificates for nuclear-norm recovery. Every sampler here is
// Monte Carlo evidence about a "for all Y, for all P, Q" statement, not a
// proof of it.

namespace nucrec {

/// Y = Y1 + Y2 with rank(Y1) = rank(X) and ||X + Y2||_* = ||X||_* + ||Y2||_*.
struct DecompositionResult {
    Matrix Y1;
    Matrix Y2;
};

/// Margins below -kBoundaryTolerance are violations; margins within
/// +-kBoundaryTolerance are counted as boundary cases (neither strict pass nor
/// strict fail).
inline constexpr double kBoundaryTolerance = 1e-12;

struct ConditionReport {
    int trials = 0;
    int violations = 0;
    int boundary = 0;
    /// Smallest observed ||(I-P)Y(I-Q)||_* - ||P Y Q||_* over unit-norm Y.
    double min_margin = std::numeric_limits<double>::infinity();
    bool pass = true;
};

/// Schur-complement split of y in the singular coordinates of x.
///
/// With x = U diag(X11, 0) V^T and U^T y V = [[Y11, Y12], [Y21, Y22]]:
///   Y1 = U [[Y11, Y12], [Y21, Y21 Y11^{-1} Y12]] V^T
///   Y2 = U [[0, 0], [0, Y22 - Y21 Y11^{-1} Y12]] V^T
/// Requires 2 rank(x) < min(rows, cols). Throws DegenerateDecomposition when
/// Y11 is singular, its condition number exceeds 1e10, or its smallest
/// singular value is below 1e-10 ||y||; the ill-posed case is refused rather
/// than perturbed.
DecompositionResult decompose(const Matrix& x, const Matrix& y);

/// Tests X^T Y = 0 and X Y^T = 0 (relative tolerance 1e-9) and the resulting
/// nuclear-norm additivity (relative tolerance 1e-7). Throws NumericFailure if
/// orthogonality holds but additivity does not.
bool additivity_holds(const Matrix& x, const Matrix& y);

/// ||(I-P) Y (I-Q)||_* - ||P Y Q||_*.
double condition_margin(const Matrix& y, const Matrix& P, const Matrix& Q);

/// Samples unit-norm null-space elements Y and Haar-random rank-r projectors
/// P, Q, and records the margin of ||(I-P)Y(I-Q)||_* >= ||PYQ||_* for Y and -Y.
/// An empty null space is a vacuous pass with trials = 0.
ConditionReport sufficient_condition_sample(const LinearMap& map, int r, int trials, RngStream& rng);

struct Counterexample {
    Matrix x0;          // rank-r planted matrix Y1
    Vector b;           // map(x0)
    Matrix competitor;  // -Y2: feasible for b with strictly smaller nuclear norm
};

/// Recovery failure instance from a null-space element y that violates the
/// rank-r condition: x0 = Y1 and b = map(Y1), so -Y2 is feasible with a
/// smaller nuclear norm. The split is the rank-r SVD truncation of y.
/// Throws NoCounterexample if ||Y1||_* <= ||Y2||_* (or y = 0) and DomainError
/// if y is not in the null space.
Counterexample construct_counterexample(const LinearMap& map, const Matrix& y, int r);

/// Same, with the caller choosing the split point Y1 (Y2 = y - Y1).
Counterexample construct_counterexample_with_split(const LinearMap& map, const Matrix& y, const Matrix& y1);

struct InfGapOptions {
    int iterations = 500;
};

/// Upper estimate of inf over unit coefficient vectors v of
/// condition_margin(sum_i v_i B_i, P, Q), with B_i an orthonormal null-space
/// basis. Runs projected subgradient descent on the sphere from `restarts`
/// random starts; the step at iteration k is a rotation by 1/sqrt(k) radians
/// along the normalized tangent subgradient. Returns +inf for an empty null
/// space and the exact minimum for a one-dimensional one.
double inf_gap_estimate(const LinearMap& map, const Matrix& P, const Matrix& Q, int restarts, RngStream& rng,
                        const InfGapOptions& options = {});

}  // namespace nucrec
