#include "slqr/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <string>

#include "slqr/errors.hpp"

namespace slqr {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kSingularRcond = 1e-14;

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
  if (!all_finite(m)) throw NumericError("SymMatrix: non-finite entry");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw ValidationError("SymMatrix: matrix is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("SymMatrix: matrix is not square");
  SymMatrix s;
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

double SymMatrix::min_eigenvalue() const {
  if (m_.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Vector vech(const SymMatrix& s) {
  const Index n = s.dim();
  Vector v(half_vec_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) v(k++) = s(i, j);
  }
  return v;
}

Vector vech_outer(const Vector& z) {
  const Index n = z.size();
  Vector v(half_vec_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) v(k++) = z(i) * z(j);
  }
  return v;
}

Vector vecs(const SymMatrix& s) {
  const Index n = s.dim();
  Vector v(half_vec_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) v(k++) = (i == j) ? s(i, i) : s(i, j) + s(j, i);
  }
  return v;
}

SymMatrix unvecs(const Vector& v, Index n) {
  if (n < 1 || v.size() != half_vec_size(n)) {
    throw DimensionError("unvecs: vector length " + std::to_string(v.size()) +
                         " does not match n(n+1)/2 for n=" + std::to_string(n));
  }
  Matrix m(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      if (i == j) {
        m(i, i) = v(k);
      } else {
        m(i, j) = 0.5 * v(k);
        m(j, i) = m(i, j);
      }
      ++k;
    }
  }
  return SymMatrix::symmetrized(m);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix is not square");
  if (m.size() == 0) return 0.0;
  if (!all_finite(m)) throw NumericError("spectral_radius: non-finite entry");
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw NumericError("spectral_radius: eigensolver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Vector solve_linear(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw DimensionError("solve_linear: incompatible shapes");
  }
  Eigen::PartialPivLU<Matrix> lu(a);
  if (!(lu.rcond() >= kSingularRcond)) {
    throw SingularMatrixError("solve_linear: matrix is singular to working precision");
  }
  return lu.solve(b);
}

double min_sym_eigenvalue(const Matrix& m) { return SymMatrix::symmetrized(m).min_eigenvalue(); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace slqr
