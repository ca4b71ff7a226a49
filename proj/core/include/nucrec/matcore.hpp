#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>

namespace nucrec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values above this fraction of the largest one count towards the
/// numerical rank.
inline constexpr double kRankTolerance = 1e-9;

/// Thin SVD: m = U * diag(singular_values) * V^T with k = min(rows, cols).
struct SvdFactors {
    Matrix U;
    Vector singular_values;  // non-increasing, non-negative
    Matrix V;
};

struct Norms {
    double nuclear = 0.0;
    double operator_norm = 0.0;
    double frobenius = 0.0;
};

/// Orthogonal projectors onto the column space and the row space of a matrix.
struct SpaceProjectors {
    Matrix col;
    Matrix row;
};

/// Throws NumericFailure if any entry of `m` is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

SvdFactors svd(const Matrix& m);
Vector singular_values(const Matrix& m);

/// Number of singular values strictly above kRankTolerance * s[0].
std::size_t numerical_rank(const Vector& singular_values);
std::size_t numerical_rank(const Matrix& m);

double nuclear_norm(const Matrix& m);
Norms norms(const Matrix& m);

/// Column-stacking vectorization: the columns of `m` stacked top to bottom.
Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols);

SpaceProjectors space_projectors(const Matrix& x);

/// Frobenius inner product <a, b> = trace(a^T b).
double inner(const Matrix& a, const Matrix& b);

// Text format: first line "rows cols", then one line per row with
// whitespace-separated decimals.
Matrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace nucrec
