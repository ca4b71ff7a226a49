#include "nucrec/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nucrec/errors.hpp"

namespace nucrec {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": shape mismatch");
    }
}

struct FullSvd {
    Matrix U;
    Vector s;
    Matrix V;
};

FullSvd full_svd(const Matrix& x) {
    Eigen::JacobiSVD<Matrix> solver(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (solver.info() != Eigen::Success) throw NumericFailure("svd: iteration did not converge");
    return FullSvd{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

// U_r V_r^T over the numerically nonzero singular triplets.
Matrix polar_factor(const SvdFactors& f) {
    const auto r = static_cast<Eigen::Index>(numerical_rank(f.singular_values));
    return f.U.leftCols(r) * f.V.leftCols(r).transpose();
}

void check_projector(const Matrix& P, Eigen::Index n, const char* what) {
    if (P.rows() != n || P.cols() != n) throw DimensionError(std::string(what) + ": projector has wrong size");
    require_finite(P, what);
}

}  // namespace

DecompositionResult decompose(const Matrix& x, const Matrix& y) {
    require_same_shape(x, y, "decompose");
    require_finite(x, "decompose");
    require_finite(y, "decompose");
    const FullSvd f = full_svd(x);
    const auto r = static_cast<Eigen::Index>(numerical_rank(f.s));
    if (2 * r >= std::min(x.rows(), x.cols())) {
        throw DomainError("decompose: rank(x) = " + std::to_string(r) + " must be below min(rows, cols)/2");
    }
    const Eigen::Index n1 = x.rows();
    const Eigen::Index n2 = x.cols();
    const Matrix rotated = f.U.transpose() * y * f.V;

    Matrix y1 = rotated;
    Matrix y2 = Matrix::Zero(n1, n2);
    if (r > 0) {
        const Matrix y11 = rotated.topLeftCorner(r, r);
        const Vector s11 = singular_values(y11);
        const double y_scale = singular_values(rotated)(0);
        if (s11(r - 1) == 0.0 || s11(0) / s11(r - 1) > 1e10 || y_scale / s11(r - 1) > 1e10) {
            throw DegenerateDecomposition("decompose: pivot block is singular or ill-conditioned");
        }
        const Matrix schur = rotated.bottomLeftCorner(n1 - r, r) *
                             y11.partialPivLu().solve(rotated.topRightCorner(r, n2 - r));
        y1.bottomRightCorner(n1 - r, n2 - r) = schur;
        y2.bottomRightCorner(n1 - r, n2 - r) = rotated.bottomRightCorner(n1 - r, n2 - r) - schur;
    } else {
        y1.setZero();
        y2 = rotated;
    }
    return DecompositionResult{f.U * y1 * f.V.transpose(), f.U * y2 * f.V.transpose()};
}

bool additivity_holds(const Matrix& x, const Matrix& y) {
    require_same_shape(x, y, "additivity_holds");
    const double scale = x.norm() * y.norm();
    const bool orthogonal = (x.transpose() * y).norm() <= 1e-9 * scale && (x * y.transpose()).norm() <= 1e-9 * scale;
    const double nx = nuclear_norm(x);
    const double ny = nuclear_norm(y);
    const bool additive = std::abs(nuclear_norm(x + y) - nx - ny) <= 1e-7 * (nx + ny);
    if (orthogonal && !additive) {
        throw NumericFailure("additivity_holds: orthogonal supports but nuclear norms are not additive");
    }
    return orthogonal && additive;
}

double condition_margin(const Matrix& y, const Matrix& P, const Matrix& Q) {
    check_projector(P, y.rows(), "condition_margin");
    check_projector(Q, y.cols(), "condition_margin");
    const Matrix Pc = Matrix::Identity(y.rows(), y.rows()) - P;
    const Matrix Qc = Matrix::Identity(y.cols(), y.cols()) - Q;
    return nuclear_norm(Pc * y * Qc) - nuclear_norm(P * y * Q);
}

ConditionReport sufficient_condition_sample(const LinearMap& map, int r, int trials, RngStream& rng) {
    if (r < 1 || r > std::min(map.n1(), map.n2())) throw DomainError("sufficient_condition_sample: bad rank");
    if (trials < 0) throw DomainError("sufficient_condition_sample: trials must be non-negative");
    ConditionReport report;
    const Matrix basis = null_space_matrix(map);
    if (basis.cols() == 0) return report;

    report.trials = trials;
    for (int t = 0; t < trials; ++t) {
        const Vector v = random_unit_vector(basis.cols(), rng);
        const Matrix Y = unvectorize(basis * v, map.n1(), map.n2());
        const Matrix P = random_projector(map.n1(), r, rng);
        const Matrix Q = random_projector(map.n2(), r, rng);
        const double margin = std::min(condition_margin(Y, P, Q), condition_margin(-Y, P, Q));
        report.min_margin = std::min(report.min_margin, margin);
        if (margin < -kBoundaryTolerance) {
            ++report.violations;
        } else if (margin <= kBoundaryTolerance) {
            ++report.boundary;
        }
    }
    report.pass = report.violations == 0;
    return report;
}

Counterexample construct_counterexample_with_split(const LinearMap& map, const Matrix& y, const Matrix& y1) {
    if (y.rows() != map.n1() || y.cols() != map.n2()) throw DimensionError("construct_counterexample: shape mismatch");
    require_same_shape(y, y1, "construct_counterexample");
    require_finite(y, "construct_counterexample");
    require_finite(y1, "construct_counterexample");
    if (y.norm() == 0.0) throw NoCounterexample("construct_counterexample: y is zero");
    if (map.apply(y).norm() > 1e-8 * std::max(1.0, y.norm())) {
        throw DomainError("construct_counterexample: y is not in the null space of the map");
    }
    const Matrix y2 = y - y1;
    if (!(nuclear_norm(y1) > nuclear_norm(y2))) {
        throw NoCounterexample("construct_counterexample: ||Y1||_* <= ||Y2||_*, no violation present");
    }
    return Counterexample{y1, map.apply(y1), -y2};
}

Counterexample construct_counterexample(const LinearMap& map, const Matrix& y, int r) {
    if (r < 1 || r > std::min(map.n1(), map.n2())) throw DomainError("construct_counterexample: bad rank");
    if (y.rows() != map.n1() || y.cols() != map.n2()) throw DimensionError("construct_counterexample: shape mismatch");
    if (y.allFinite() && y.norm() == 0.0) throw NoCounterexample("construct_counterexample: y is zero");
    const SvdFactors f = svd(y);
    const Matrix y1 =
        f.U.leftCols(r) * f.singular_values.head(r).asDiagonal() * f.V.leftCols(r).transpose();
    return construct_counterexample_with_split(map, y, y1);
}

double inf_gap_estimate(const LinearMap& map, const Matrix& P, const Matrix& Q, int restarts, RngStream& rng,
                        const InfGapOptions& options) {
    check_projector(P, map.n1(), "inf_gap_estimate");
    check_projector(Q, map.n2(), "inf_gap_estimate");
    if (restarts < 1 || options.iterations < 1) throw DomainError("inf_gap_estimate: need positive restarts");
    const Matrix basis = null_space_matrix(map);
    const Eigen::Index k = basis.cols();
    if (k == 0) return std::numeric_limits<double>::infinity();

    const Eigen::Index n1 = map.n1();
    const Eigen::Index n2 = map.n2();
    const Matrix Pc = Matrix::Identity(n1, n1) - P;
    const Matrix Qc = Matrix::Identity(n2, n2) - Q;

    if (k == 1) {
        const Matrix Y = unvectorize(basis.col(0), n1, n2);
        return std::min(condition_margin(Y, P, Q), condition_margin(-Y, P, Q));
    }

    double best = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < restarts; ++restart) {
        Vector v = random_unit_vector(k, rng);
        for (int it = 1; it <= options.iterations; ++it) {
            const Matrix Y = unvectorize(basis * v, n1, n2);
            const SvdFactors outer = svd(Pc * Y * Qc);
            const SvdFactors inner_block = svd(P * Y * Q);
            const double margin = outer.singular_values.sum() - inner_block.singular_values.sum();
            best = std::min(best, margin);

            const Matrix G = Pc * polar_factor(outer) * Qc - P * polar_factor(inner_block) * Q;
            Vector grad = basis.transpose() * vectorize(G);
            grad -= grad.dot(v) * v;
            const double gnorm = grad.norm();
            if (gnorm <= 1e-14) break;
            const double angle = 1.0 / std::sqrt(static_cast<double>(it));
            v = std::cos(angle) * v - std::sin(angle) * (grad / gnorm);
            v.normalize();
        }
    }
    return best;
}

}  // namespace nucrec
