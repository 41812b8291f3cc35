#pragma once

#include <Eigen/Dense>

namespace slqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Square matrix that is exactly symmetric.
///
/// Construction accepts inputs that are symmetric to within 1e-12 relative
/// tolerance and stores the symmetric part, so downstream code can rely on
/// bit-exact symmetry.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Matrix& m);

  // Stores (m + m^T) / 2 without checking symmetry of the input.
  static SymMatrix symmetrized(const Matrix& m);
  static SymMatrix zero(Index n) { return symmetrized(Matrix::Zero(n, n)); }
  static SymMatrix identity(Index n) { return symmetrized(Matrix::Identity(n, n)); }

  const Matrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double min_eigenvalue() const;

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

// n(n+1)/2
constexpr Index half_vec_size(Index n) { return n * (n + 1) / 2; }

// Lower-triangular column-major half vectorization:
// (s11, s21, ..., sn1, s22, s32, ..., snn).
Vector vech(const SymMatrix& s);
// vech(z z^T) without forming the outer product.
Vector vech_outer(const Vector& z);

// Same ordering as vech with off-diagonal entries doubled, so that
// vech(z z^T) . vecs(S) == z^T S z.
Vector vecs(const SymMatrix& s);

// Inverse of vecs. Throws DimensionError when v.size() != n(n+1)/2.
SymMatrix unvecs(const Vector& v, Index n);

Matrix kron(const Matrix& a, const Matrix& b);

// Column-stacking vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

// Largest eigenvalue modulus, from a dense general eigensolver.
// Throws NumericError if the solver fails.
double spectral_radius(const Matrix& m);

// Partial-pivoting LU solve. Throws SingularMatrixError when the reciprocal
// condition estimate falls below 1e-14, DimensionError on shape mismatch.
Vector solve_linear(const Matrix& a, const Vector& b);

// Minimum eigenvalue of the symmetric part of m.
double min_sym_eigenvalue(const Matrix& m);

bool all_finite(const Matrix& m);

}  // namespace slqr
