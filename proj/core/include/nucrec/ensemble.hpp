#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "nucrec/matcore.hpp"

namespace nucrec {

/// Deterministic random stream identified by a root seed and a label path.
///
/// The engine seed is an avalanche mix of the seed and every label element,
/// so a stream for (seed, {cell, repetition}) can be recreated in isolation
/// and does not depend on the order in which other streams were consumed.
/// Identical (seed, label) pairs give identical sequences within one build.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::vector<std::uint64_t> label = {});

    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<std::uint64_t>& label() const noexcept { return label_; }

    /// Independent stream whose label extends this one's.
    RngStream child(std::initializer_list<std::uint64_t> suffix) const;

    double normal();
    std::uint64_t next_u64() { return engine_(); }
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> label_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Linear map X -> A vec(X) from n1 x n2 matrices to R^m.
class LinearMap {
public:
    LinearMap(Matrix A, Eigen::Index n1, Eigen::Index n2);

    Eigen::Index rows() const noexcept { return A_.rows(); }
    Eigen::Index n1() const noexcept { return n1_; }
    Eigen::Index n2() const noexcept { return n2_; }
    const Matrix& matrix() const noexcept { return A_; }

    Vector apply(const Matrix& X) const;
    /// Adjoint map y -> unvec(A^T y).
    Matrix adjoint(const Vector& y) const;

private:
    Matrix A_;
    Eigen::Index n1_;
    Eigen::Index n2_;
};

/// d1 x d2 matrix with i.i.d. standard normal entries.
Matrix sample_gaussian(Eigen::Index d1, Eigen::Index d2, RngStream& rng);

/// Map with an m x (n1*n2) i.i.d. standard normal matrix. Requires 1 <= m <= n1*n2.
LinearMap sample_linear_map(Eigen::Index m, Eigen::Index n1, Eigen::Index n2, RngStream& rng);

/// Y_L * Y_R^T with Y_L (n1 x r) and Y_R (n2 x r) standard normal.
Matrix sample_low_rank(Eigen::Index n1, Eigen::Index n2, Eigen::Index r, RngStream& rng);

/// Orthonormal basis of null(A) as the columns of an (n1*n2) x (n1*n2 - m) matrix.
/// Throws DegenerateMap when A is not of full row rank.
Matrix null_space_matrix(const LinearMap& map);

/// The same basis, unvectorized into n1 x n2 matrices.
std::vector<Matrix> null_space_basis(const LinearMap& map);

/// Orthogonal projector onto a Haar-random r-dimensional subspace of R^n,
/// built by orthonormalizing an n x r Gaussian frame.
Matrix random_projector(Eigen::Index n, Eigen::Index r, RngStream& rng);

/// Uniformly distributed unit vector in R^k.
Vector random_unit_vector(Eigen::Index k, RngStream& rng);

}  // namespace nucrec
