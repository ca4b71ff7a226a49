#include "nucrec/ensemble.hpp"

#include <string>

#include "nucrec/errors.hpp"

namespace nucrec {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, const std::vector<std::uint64_t>& label) {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t part : label) h = mix64(h ^ mix64(part + 0x632be59bd9b4e019ULL));
    return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::vector<std::uint64_t> label)
    : seed_(seed), label_(std::move(label)), engine_(stream_seed(seed_, label_)) {}

RngStream RngStream::child(std::initializer_list<std::uint64_t> suffix) const {
    std::vector<std::uint64_t> label = label_;
    label.insert(label.end(), suffix.begin(), suffix.end());
    return RngStream(seed_, std::move(label));
}

double RngStream::normal() { return normal_(engine_); }

LinearMap::LinearMap(Matrix A, Eigen::Index n1, Eigen::Index n2) : A_(std::move(A)), n1_(n1), n2_(n2) {
    if (n1_ < 1 || n2_ < 1) throw DimensionError("LinearMap: matrix shape must be positive");
    if (A_.rows() < 1 || A_.cols() != n1_ * n2_) {
        throw DimensionError("LinearMap: expected " + std::to_string(n1_ * n2_) + " columns, got " +
                             std::to_string(A_.cols()));
    }
    require_finite(A_, "LinearMap");
}

Vector LinearMap::apply(const Matrix& X) const {
    if (X.rows() != n1_ || X.cols() != n2_) throw DimensionError("LinearMap::apply: shape mismatch");
    // Eigen storage is column-major, so the flat view of X is already vec(X).
    return A_ * Eigen::Map<const Vector>(X.data(), X.size());
}

Matrix LinearMap::adjoint(const Vector& y) const {
    if (y.size() != A_.rows()) throw DimensionError("LinearMap::adjoint: length mismatch");
    return unvectorize(A_.transpose() * y, n1_, n2_);
}

Matrix sample_gaussian(Eigen::Index d1, Eigen::Index d2, RngStream& rng) {
    if (d1 < 1 || d2 < 1) throw DimensionError("sample_gaussian: dimensions must be positive");
    Matrix g(d1, d2);
    // Fill in row-major order so the draw sequence does not depend on storage.
    for (Eigen::Index i = 0; i < d1; ++i) {
        for (Eigen::Index j = 0; j < d2; ++j) g(i, j) = rng.normal();
    }
    return g;
}

LinearMap sample_linear_map(Eigen::Index m, Eigen::Index n1, Eigen::Index n2, RngStream& rng) {
    if (n1 < 1 || n2 < 1) throw DimensionError("sample_linear_map: matrix shape must be positive");
    if (m < 1 || m > n1 * n2) {
        throw DimensionError("sample_linear_map: need 1 <= m <= n1*n2, got m=" + std::to_string(m));
    }
    return LinearMap(sample_gaussian(m, n1 * n2, rng), n1, n2);
}

Matrix sample_low_rank(Eigen::Index n1, Eigen::Index n2, Eigen::Index r, RngStream& rng) {
    if (n1 < 1 || n2 < 1 || r < 1 || r > std::min(n1, n2)) {
        throw DimensionError("sample_low_rank: need 1 <= r <= min(n1, n2)");
    }
    const Matrix left = sample_gaussian(n1, r, rng);
    const Matrix right = sample_gaussian(n2, r, rng);
    return left * right.transpose();
}

Matrix null_space_matrix(const LinearMap& map) {
    const Matrix& A = map.matrix();
    const Eigen::Index m = A.rows();
    const Eigen::Index N = A.cols();
    Eigen::BDCSVD<Matrix> solver(A, Eigen::ComputeFullV);
    if (solver.info() != Eigen::Success) throw NumericFailure("null_space_basis: svd did not converge");
    const Vector& s = solver.singularValues();
    if (s.size() < m || numerical_rank(s) < static_cast<std::size_t>(m)) {
        throw DegenerateMap("null_space_basis: measurement matrix is not of full row rank");
    }
    return solver.matrixV().rightCols(N - m);
}

std::vector<Matrix> null_space_basis(const LinearMap& map) {
    const Matrix basis = null_space_matrix(map);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(basis.cols()));
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        out.push_back(unvectorize(basis.col(k), map.n1(), map.n2()));
    }
    return out;
}

Matrix random_projector(Eigen::Index n, Eigen::Index r, RngStream& rng) {
    if (r < 0 || r > n) throw DimensionError("random_projector: need 0 <= r <= n");
    if (r == 0) return Matrix::Zero(n, n);
    const Matrix frame = sample_gaussian(n, r, rng);
    Eigen::HouseholderQR<Matrix> qr(frame);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, r);
    return Q * Q.transpose();
}

Vector random_unit_vector(Eigen::Index k, RngStream& rng) {
    if (k < 1) throw DimensionError("random_unit_vector: dimension must be positive");
    Vector v(k);
    for (Eigen::Index i = 0; i < k; ++i) v(i) = rng.normal();
    return v / v.norm();
}

}  // namespace nucrec
