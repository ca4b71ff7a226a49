#include "nucrec/recovery.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "nucrec/errors.hpp"

namespace nucrec {

AffineProblem::AffineProblem(LinearMap map, Vector b, std::optional<Matrix> planted)
    : map_(std::move(map)), b_(std::move(b)), planted_(std::move(planted)) {
    if (b_.size() != map_.rows()) {
        throw DimensionError("AffineProblem: b has length " + std::to_string(b_.size()) + ", map has " +
                             std::to_string(map_.rows()) + " rows");
    }
    if (!b_.allFinite()) throw NumericFailure("AffineProblem: b has non-finite entries");
    if (planted_) {
        require_finite(*planted_, "AffineProblem planted");
        const double residual = (map_.apply(*planted_) - b_).norm();
        if (residual > 1e-9 * (1.0 + b_.norm())) {
            throw DomainError("AffineProblem: planted matrix is not consistent with b");
        }
    }
}

AffineProblem AffineProblem::from_planted(LinearMap map, Matrix planted) {
    Vector b = map.apply(planted);
    return AffineProblem(std::move(map), std::move(b), std::move(planted));
}

void SolverConfig::validate() const {
    if (max_iter < 1) throw DomainError("SolverConfig: max_iter must be positive");
    if (!(tol > 0.0)) throw DomainError("SolverConfig: tol must be positive");
    if (!(penalty > 0.0)) throw DomainError("SolverConfig: penalty must be positive");
}

Matrix svt(const Matrix& m, double tau) {
    if (!(tau >= 0.0)) throw DomainError("svt: tau must be non-negative");
    if (tau == 0.0) return m;
    const SvdFactors f = svd(m);
    Eigen::Index keep = 0;
    while (keep < f.singular_values.size() && f.singular_values(keep) > tau) ++keep;
    if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
    const Vector shrunk = f.singular_values.head(keep).array() - tau;
    return f.U.leftCols(keep) * shrunk.asDiagonal() * f.V.leftCols(keep).transpose();
}

AffineProjector::AffineProjector(const AffineProblem& problem) : problem_(&problem) {
    const Matrix& A = problem.map().matrix();
    Matrix gram = A * A.transpose();
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-15) {
        throw DegenerateMap("project_affine: A A^T is singular");
    }
    if (llt.rcond() < 1e-10) {
        const double jitter = 1e-12 * gram.diagonal().mean();
        gram.diagonal().array() += jitter;
        llt.compute(gram);
        if (llt.info() != Eigen::Success) throw DegenerateMap("project_affine: A A^T is singular");
    }
    pinv_ = llt.solve(A).transpose();
}

Matrix AffineProjector::project(const Matrix& w) const {
    const LinearMap& map = problem_->map();
    if (w.rows() != map.n1() || w.cols() != map.n2()) throw DimensionError("project_affine: shape mismatch");
    const Vector residual = map.apply(w) - problem_->b();
    Matrix z = w;
    Eigen::Map<Vector>(z.data(), z.size()) -= pinv_ * residual;
    return z;
}

Matrix project_affine(const Matrix& w, const AffineProblem& problem) {
    return AffineProjector(problem).project(w);
}

namespace {

RecoveryResult run_admm(const AffineProblem& problem, const SolverConfig& config, Matrix Z) {
    config.validate();
    require_finite(Z, "solve_min_nuclear initial point");
    const AffineProjector projector(problem);
    const double threshold = config.tol * (1.0 + problem.b().norm());

    Matrix U = Matrix::Zero(Z.rows(), Z.cols());
    double rho = config.penalty;
    RecoveryResult result;
    double last_objective = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const Matrix X = projector.project(Z - U);
        const Matrix Z_prev = Z;
        Z = svt(X + U, 1.0 / rho);
        U += X - Z;

        result.iterations = iter;
        result.primal_residual = (X - Z).norm();
        result.dual_residual = rho * (Z - Z_prev).norm();

        if (config.track_objective) {
            const double objective = nuclear_norm(X);
            if (iter > 50 && objective > last_objective * (1.0 + 1e-12)) ++result.objective_increases;
            last_objective = objective;
        }

        if (result.primal_residual <= threshold && result.dual_residual <= threshold) {
            result.converged = true;
            break;
        }
        if (config.adaptive_penalty) {
            if (result.primal_residual > 10.0 * result.dual_residual) {
                rho *= 2.0;
                U /= 2.0;
            } else if (result.dual_residual > 10.0 * result.primal_residual) {
                rho /= 2.0;
                U *= 2.0;
            }
        }
    }

    result.X = projector.project(Z);
    result.nuclear_norm = nuclear_norm(result.X);
    return result;
}

}  // namespace

RecoveryResult solve_min_nuclear(const AffineProblem& problem, const SolverConfig& config) {
    return run_admm(problem, config, Matrix::Zero(problem.map().n1(), problem.map().n2()));
}

RecoveryResult solve_min_nuclear(const AffineProblem& problem, const SolverConfig& config,
                                 const Matrix& initial) {
    if (initial.rows() != problem.map().n1() || initial.cols() != problem.map().n2()) {
        throw DimensionError("solve_min_nuclear: initial point has the wrong shape");
    }
    return run_admm(problem, config, initial);
}

double relative_error(const Matrix& x, const Matrix& reference) {
    if (x.rows() != reference.rows() || x.cols() != reference.cols()) {
        throw DimensionError("relative_error: shape mismatch");
    }
    const double ref = reference.norm();
    if (ref == 0.0) throw InvalidReference("relative_error: reference matrix is zero");
    return (x - reference).norm() / ref;
}

bool check_recovery(const Matrix& x, const Matrix& x0, double threshold) {
    return relative_error(x, x0) < threshold;
}

OptimalityReport nullspace_optimality_check(const Matrix& x, const AffineProblem& problem, int trials,
                                            RngStream& rng) {
    const LinearMap& map = problem.map();
    if (x.rows() != map.n1() || x.cols() != map.n2()) {
        throw DimensionError("nullspace_optimality_check: shape mismatch");
    }
    OptimalityReport report;
    const Matrix basis = null_space_matrix(map);
    if (basis.cols() == 0) return report;

    constexpr std::array<double, 3> steps{1e-4, 1e-3, 1e-2};
    const double base = nuclear_norm(x);
    for (int trial = 0; trial < trials; ++trial) {
        const Vector v = random_unit_vector(basis.cols(), rng);
        const Matrix Y = unvectorize(basis * v, map.n1(), map.n2());
        for (double sign : {1.0, -1.0}) {
            for (double t : steps) {
                const double gap = (nuclear_norm(x + (sign * t) * Y) - base) / t;
                report.min_gap = std::min(report.min_gap, gap);
            }
        }
    }
    report.pass = report.min_gap >= -1e-5;
    return report;
}

}  // namespace nucrec
