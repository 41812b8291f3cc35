#include <gtest/gtest.h>

#include <random>

#include "slqr/errors.hpp"
#include "slqr/linalg.hpp"
#include "test_support.hpp"

namespace slqr {
namespace {

using testing::mat;
using testing::random_matrix;

SymMatrix random_sym(std::mt19937_64& rng, Index n) {
  return SymMatrix::symmetrized(random_matrix(rng, n, n));
}

TEST(Vech, LowerTriangularColumnMajor) {
  EXPECT_EQ(vech(SymMatrix(mat(2, 2, {1, 2, 2, 3}))), (Vector(3) << 1, 2, 3).finished());
  EXPECT_EQ(vech(SymMatrix::identity(3)), (Vector(6) << 1, 0, 0, 1, 0, 1).finished());
  EXPECT_EQ(vech(SymMatrix(mat(2, 2, {4, 5, 5, 6}))), (Vector(3) << 4, 5, 6).finished());
  EXPECT_EQ(vech(SymMatrix(mat(3, 3, {1, 2, 3, 2, 4, 5, 3, 5, 6}))),
            (Vector(6) << 1, 2, 3, 4, 5, 6).finished());
}

TEST(Vecs, DoublesOffDiagonal) {
  EXPECT_EQ(vecs(SymMatrix(mat(2, 2, {1, 2, 2, 3}))), (Vector(3) << 1, 4, 3).finished());
  EXPECT_EQ(vecs(SymMatrix::identity(2)), (Vector(3) << 1, 0, 1).finished());
}

TEST(Vecs, VechOuterMatchesVechOfOuterProduct) {
  std::mt19937_64 rng(3);
  for (Index n = 1; n <= 5; ++n) {
    const Vector z = random_matrix(rng, n, 1);
    EXPECT_TRUE(vech_outer(z).isApprox(vech(SymMatrix::symmetrized(z * z.transpose()))));
  }
}

TEST(Unvecs, InvertsVecs) {
  EXPECT_EQ(unvecs((Vector(3) << 1, 4, 3).finished(), 2).matrix(), mat(2, 2, {1, 2, 2, 3}));
  EXPECT_EQ(unvecs((Vector(1) << 5).finished(), 1).matrix(), mat(1, 1, {5}));

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + trial % 5;
    const SymMatrix s = random_sym(rng, n);
    EXPECT_EQ(unvecs(vecs(s), n), s);
    const Vector v = random_matrix(rng, half_vec_size(n), 1);
    EXPECT_TRUE(vecs(unvecs(v, n)).isApprox(v, 1e-15));
  }
}

TEST(Unvecs, RejectsWrongLength) {
  EXPECT_THROW(unvecs(Vector::Zero(4), 2), DimensionError);
  EXPECT_THROW(unvecs(Vector::Zero(3), 0), DimensionError);
}

TEST(SymMatrix, RejectsAsymmetricInput) {
  EXPECT_THROW(SymMatrix(mat(2, 2, {1, 2, 3, 4})), ValidationError);
  EXPECT_THROW(SymMatrix(Matrix::Zero(2, 3)), DimensionError);
  EXPECT_NO_THROW(SymMatrix(mat(2, 2, {1, 2, 2 + 1e-14, 4})));
}

TEST(Kron, KnownProducts) {
  EXPECT_EQ(kron(Matrix::Identity(2, 2), Matrix::Identity(2, 2)), Matrix::Identity(4, 4));
  const Matrix b = mat(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(kron(mat(1, 1, {2}), b), 2 * b);
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 1) = 1;
  EXPECT_EQ(kron(mat(2, 2, {1, 0, 0, 0}), mat(2, 2, {0, 1, 0, 0})), expected);
  EXPECT_EQ(kron(Matrix::Ones(2, 3), Matrix::Ones(3, 2)).rows(), 6);
}

TEST(SpectralRadius, KnownSpectra) {
  EXPECT_NEAR(spectral_radius(Matrix::Identity(3, 3)), 1.0, 1e-14);
  EXPECT_NEAR(spectral_radius(mat(2, 2, {0.5, 0, 0, -0.25})), 0.5, 1e-14);
  EXPECT_NEAR(spectral_radius(mat(2, 2, {0, 1, -1, 0})), 1.0, 1e-14);
  EXPECT_THROW(spectral_radius(Matrix::Zero(2, 3)), DimensionError);
}

TEST(SolveLinear, SolvesAndDetectsSingular) {
  EXPECT_TRUE(solve_linear(Matrix::Identity(2, 2), (Vector(2) << 3, 4).finished())
                  .isApprox((Vector(2) << 3, 4).finished()));
  EXPECT_TRUE(solve_linear(mat(2, 2, {2, 0, 0, 4}), (Vector(2) << 2, 8).finished())
                  .isApprox((Vector(2) << 1, 2).finished()));
  EXPECT_THROW(solve_linear(mat(2, 2, {1, 2, 2, 4}), Vector::Ones(2)), SingularMatrixError);
  EXPECT_THROW(solve_linear(Matrix::Identity(2, 2), Vector::Ones(3)), DimensionError);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 6, 6) + 6.0 * Matrix::Identity(6, 6);
    const Vector b = random_matrix(rng, 6, 1);
    const Vector x = solve_linear(a, b);
    EXPECT_LE((a * x - b).norm(), 1e-10 * (1.0 + b.norm()));
  }
}

// Randomized identities; the acceptance suite runs the 1000-case version.
TEST(Identities, QuadraticFormAndTrace) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + trial % 5;
    const SymMatrix s = random_sym(rng, n);
    const SymMatrix t = random_sym(rng, n);
    const Vector z = random_matrix(rng, n, 1);

    double brute = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) brute += z(i) * s(i, j) * z(j);
    }
    EXPECT_NEAR(vech_outer(z).dot(vecs(s)), brute, 1e-12 * (1.0 + std::abs(brute)));

    double trace = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) trace += s(i, j) * t(j, i);
    }
    EXPECT_NEAR(vecs(s).dot(vech(t)), trace, 1e-12 * (1.0 + std::abs(trace)));
  }
}

TEST(Identities, SpectralRadiusOfKronSquare) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(rng, 1 + trial % 4, 1 + trial % 4);
    const double r = spectral_radius(a);
    EXPECT_NEAR(spectral_radius(kron(a, a)), r * r, 1e-10 * r * r);
  }
}

}  // namespace
}  // namespace slqr
