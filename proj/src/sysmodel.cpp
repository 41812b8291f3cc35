#include "slqr/sysmodel.hpp"

#include <cmath>
#include <string>

#include "slqr/errors.hpp"
#include "slqr/stability.hpp"

namespace slqr {

namespace {

constexpr double kPsdTol = 1e-10;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void expect_shape(const Matrix& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(name) + " is " + shape(m) + ", expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!all_finite(m)) throw ValidationError(std::string(name) + " has non-finite entries");
}

void expect_symmetric_psd(const Matrix& m, const char* name) {
  SymMatrix s{m};  // throws if not symmetric
  if (s.dim() > 0 && s.min_eigenvalue() < -kPsdTol) {
    throw ValidationError(std::string(name) + " is not positive semidefinite");
  }
}

void expect_symmetric_pd(const Matrix& m, const char* name) {
  SymMatrix s{m};
  if (s.min_eigenvalue() <= 0.0) {
    throw ValidationError(std::string(name) + " is not positive definite");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vector step_with_factor(const SystemModel& model, const Matrix& w_factor, const Vector& x,
                        const Vector& u, GaussianStream& rng) {
  const double d = rng.next();
  const Vector w = w_factor * rng.next_vector(model.n());
  return model.A * x + model.B * u + (model.C * x + model.D * u) * d + w;
}

}  // namespace

void SystemModel::validate() const {
  const Index nx = A.rows();
  const Index nu = B.cols();
  if (nx < 1) throw DimensionError("A must be non-empty");
  if (nu < 1) throw DimensionError("B must have at least one column");
  expect_shape(A, nx, nx, "A");
  expect_shape(B, nx, nu, "B");
  expect_shape(C, nx, nx, "C");
  expect_shape(D, nx, nu, "D");
  expect_shape(W, nx, nx, "W");
  expect_shape(X0, nx, nx, "X0");
  expect_symmetric_psd(W, "W");
  expect_symmetric_psd(X0, "X0");
}

void CostSpec::validate() const {
  if (Q.rows() < 1 || R.rows() < 1) throw DimensionError("Q and R must be non-empty");
  expect_shape(Q, Q.rows(), Q.rows(), "Q");
  expect_shape(R, R.rows(), R.rows(), "R");
  expect_symmetric_pd(Q, "Q");
  expect_symmetric_pd(R, "R");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ValidationError("discount factor must lie in [0, 1), got " + std::to_string(gamma));
  }
}

void CostSpec::validate_against(const SystemModel& model) const {
  validate();
  expect_shape(Q, model.n(), model.n(), "Q");
  expect_shape(R, model.m(), model.m(), "R");
}

Vector Rollout::z(Index k) const {
  Vector out(states.rows() + inputs.rows());
  out << states.col(k), inputs.col(k);
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

GaussianStream GaussianStream::substream(std::uint64_t master,
                                         std::initializer_list<std::uint64_t> path) {
  return GaussianStream(derive_seed(master, path));
}

Vector GaussianStream::next_vector(Index size) {
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = next();
  return v;
}

Matrix psd_factor(const Matrix& s) {
  const Index n = s.rows();
  Matrix f = Matrix::Zero(n, n);
  const double tol = kPsdTol * std::max(1.0, s.cwiseAbs().maxCoeff());
  for (Index j = 0; j < n; ++j) {
    double pivot = s(j, j) - f.row(j).head(j).squaredNorm();
    if (pivot <= tol) continue;
    const double root = std::sqrt(pivot);
    f(j, j) = root;
    for (Index i = j + 1; i < n; ++i) {
      f(i, j) = (s(i, j) - f.row(i).head(j).dot(f.row(j).head(j))) / root;
    }
  }
  return f;
}

void check_gain(const SystemModel& model, const Gain& gain) {
  expect_shape(gain.L, model.m(), model.n(), "gain L");
}

Vector step(const SystemModel& model, const Vector& x, const Vector& u, GaussianStream& rng) {
  if (x.size() != model.n() || u.size() != model.m()) {
    throw DimensionError("step: state or input has the wrong size");
  }
  return step_with_factor(model, psd_factor(model.W), x, u, rng);
}

Rollout rollout(const SystemModel& model, const Gain& gain, double probe_std, Index steps,
                GaussianStream& rng) {
  check_gain(model, gain);
  if (steps < 1) throw ValidationError("rollout: length must be positive");
  if (!(probe_std >= 0.0)) throw ValidationError("rollout: probe_std must be nonnegative");

  const Matrix w_factor = psd_factor(model.W);
  Rollout r;
  r.states.resize(model.n(), steps + 1);
  r.inputs.resize(model.m(), steps + 1);

  Vector x = psd_factor(model.X0) * rng.next_vector(model.n());
  for (Index k = 0; k <= steps; ++k) {
    const Vector u = gain.L * x + probe_std * rng.next_vector(model.m());
    r.states.col(k) = x;
    r.inputs.col(k) = u;
    if (k < steps) x = step_with_factor(model, w_factor, x, u, rng);
  }
  if (!all_finite(r.states) || !all_finite(r.inputs)) {
    throw NumericError("rollout: state diverged to non-finite values");
  }
  return r;
}

SymMatrix covariance_step(const SystemModel& model, const Gain& gain, const SymMatrix& x) {
  check_gain(model, gain);
  if (x.dim() != model.n()) throw DimensionError("covariance_step: covariance has wrong size");
  const Matrix f = model.A + model.B * gain.L;
  const Matrix g = model.C + model.D * gain.L;
  return SymMatrix::symmetrized(f * x.matrix() * f.transpose() + g * x.matrix() * g.transpose() +
                                model.W);
}

SymMatrix stationary_covariance(const SystemModel& model, const Gain& gain) {
  if (!is_admissible(model, gain)) {
    throw AdmissibilityError("stationary_covariance: gain is not admissible");
  }
  const Index n = model.n();
  const Matrix lhs = Matrix::Identity(n * n, n * n) - closed_loop_matrix(model, gain);
  Vector sol;
  try {
    sol = solve_linear(lhs, vec(model.W));
  } catch (const SingularMatrixError& e) {
    throw NumericError(std::string("stationary_covariance: ") + e.what());
  }
  SymMatrix x = SymMatrix::symmetrized(unvec(sol, n, n));
  if (x.min_eigenvalue() < -kPsdTol * std::max(1.0, x.matrix().cwiseAbs().maxCoeff())) {
    throw NumericError("stationary_covariance: solution is not positive semidefinite");
  }
  return x;
}

double one_step_cost(const CostSpec& cost, const Vector& x, const Vector& u) {
  if (x.size() != cost.Q.rows() || u.size() != cost.R.rows()) {
    throw DimensionError("one_step_cost: state or input has the wrong size");
  }
  return x.dot(cost.Q * x) + u.dot(cost.R * u);
}

}  // namespace slqr
