#include "nucrec/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "nucrec/errors.hpp"

namespace nucrec {

namespace {

// Jacobi is the most accurate choice for the small matrices the solver
// iterates on; divide and conquer takes over for large inputs.
constexpr Eigen::Index kJacobiMaxDim = 48;

void require_nonempty(const Matrix& m, std::string_view what) {
    if (m.rows() < 1 || m.cols() < 1) {
        throw DimensionError(std::string(what) + ": matrix must have at least one row and column");
    }
}

template <class Solver>
SvdFactors finish(const Solver& solver) {
    if (solver.info() != Eigen::Success) {
        throw NumericFailure("svd: iteration did not converge");
    }
    SvdFactors f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    if (!f.U.allFinite() || !f.V.allFinite() || !f.singular_values.allFinite()) {
        throw NumericFailure("svd: non-finite factors");
    }
    return f;
}

}  // namespace

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) {
        throw NumericFailure(std::string(what) + ": matrix has NaN or infinite entries");
    }
}

SvdFactors svd(const Matrix& m) {
    require_nonempty(m, "svd");
    require_finite(m, "svd");
    constexpr int opts = Eigen::ComputeThinU | Eigen::ComputeThinV;
    if (std::max(m.rows(), m.cols()) <= kJacobiMaxDim) {
        return finish(Eigen::JacobiSVD<Matrix>(m, opts));
    }
    return finish(Eigen::BDCSVD<Matrix>(m, opts));
}

Vector singular_values(const Matrix& m) {
    require_nonempty(m, "singular_values");
    require_finite(m, "singular_values");
    Vector s;
    if (std::max(m.rows(), m.cols()) <= kJacobiMaxDim) {
        Eigen::JacobiSVD<Matrix> solver(m);
        if (solver.info() != Eigen::Success) throw NumericFailure("svd: iteration did not converge");
        s = solver.singularValues();
    } else {
        Eigen::BDCSVD<Matrix> solver(m);
        if (solver.info() != Eigen::Success) throw NumericFailure("svd: iteration did not converge");
        s = solver.singularValues();
    }
    return s;
}

std::size_t numerical_rank(const Vector& s) {
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    const double cutoff = kRankTolerance * s(0);
    return static_cast<std::size_t>((s.array() > cutoff).count());
}

std::size_t numerical_rank(const Matrix& m) { return numerical_rank(singular_values(m)); }

double nuclear_norm(const Matrix& m) { return singular_values(m).sum(); }

Norms norms(const Matrix& m) {
    const Vector s = singular_values(m);
    return Norms{s.sum(), s(0), m.norm()};
}

Vector vectorize(const Matrix& m) {
    Vector v(m.size());
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) v(k++) = m(i, j);
    }
    return v;
}

Matrix unvectorize(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    if (rows < 1 || cols < 1 || v.size() != rows * cols) {
        throw DimensionError("unvectorize: length " + std::to_string(v.size()) + " does not match " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
    Matrix m(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = v(k++);
    }
    return m;
}

SpaceProjectors space_projectors(const Matrix& x) {
    const SvdFactors f = svd(x);
    const auto r = static_cast<Eigen::Index>(numerical_rank(f.singular_values));
    const Matrix Ur = f.U.leftCols(r);
    const Matrix Vr = f.V.leftCols(r);
    return SpaceProjectors{Ur * Ur.transpose(), Vr * Vr.transpose()};
}

double inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("inner: shape mismatch");
    }
    return (a.array() * b.array()).sum();
}

Matrix read_matrix(std::istream& in) {
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            return true;
        }
        return false;
    };
    if (!next_line()) throw IoError("matrix text: missing 'rows cols' header");
    std::istringstream header(line);
    long long rows = 0, cols = 0;
    if (!(header >> rows >> cols) || rows < 1 || cols < 1) {
        throw IoError("matrix text: malformed header '" + line + "'");
    }
    Matrix m(rows, cols);
    for (long long i = 0; i < rows; ++i) {
        if (!next_line()) throw IoError("matrix text: expected " + std::to_string(rows) + " rows");
        std::istringstream row(line);
        for (long long j = 0; j < cols; ++j) {
            if (!(row >> m(i, j))) {
                throw IoError("matrix text: row " + std::to_string(i + 1) + " has fewer than " +
                              std::to_string(cols) + " entries");
            }
        }
    }
    require_finite(m, "read_matrix");
    return m;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << m(i, j);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

Matrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    try {
        return read_matrix(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_matrix(out, m);
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nucrec
