#include "slqr/qkernel.hpp"

#include <Eigen/Cholesky>
#include <sstream>

#include "slqr/errors.hpp"

namespace slqr {

namespace {

constexpr double kHuuMinEigenvalue = 1e-12;

Matrix stacked_identity(const Gain& gain) {
  const Index n = gain.L.cols();
  Matrix s(n + gain.L.rows(), n);
  s << Matrix::Identity(n, n), gain.L;
  return s;
}

}  // namespace

QKernel::QKernel(SymMatrix h, Index state_dim) : h_(std::move(h)), n_(state_dim) {
  if (n_ < 1 || n_ >= h_.dim()) throw DimensionError("QKernel: state dimension out of range");
}

QKernel h_from_p(const SystemModel& model, const CostSpec& cost, const CostKernel& kernel) {
  const Index n = model.n();
  const Index m = model.m();
  const Matrix& p = kernel.P.matrix();
  const double g = cost.gamma;
  Matrix h(n + m, n + m);
  h.topLeftCorner(n, n) = cost.Q + g * (model.A.transpose() * p * model.A + model.C.transpose() * p * model.C);
  h.topRightCorner(n, m) = g * (model.A.transpose() * p * model.B + model.C.transpose() * p * model.D);
  h.bottomLeftCorner(m, n) = h.topRightCorner(n, m).transpose();
  h.bottomRightCorner(m, m) = cost.R + g * (model.B.transpose() * p * model.B + model.D.transpose() * p * model.D);
  return QKernel(SymMatrix::symmetrized(h), n);
}

CostKernel p_from_h(const QKernel& h, const Gain& gain) {
  if (gain.L.rows() != h.input_dim() || gain.L.cols() != h.state_dim()) {
    throw DimensionError("p_from_h: gain does not match kernel blocks");
  }
  const Matrix s = stacked_identity(gain);
  return CostKernel{SymMatrix::symmetrized(s.transpose() * h.h().matrix() * s)};
}

Gain gain_from_h(const QKernel& h) {
  const Matrix huu = h.huu();
  const double min_eig = min_sym_eigenvalue(huu);
  if (!(min_eig > kHuuMinEigenvalue)) {
    std::ostringstream msg;
    msg << "gain_from_h: Huu is not positive definite (min eigenvalue " << min_eig << ")";
    throw EvaluationError(msg.str());
  }
  return Gain{-huu.ldlt().solve(h.hux())};
}

SymMatrix noise_moment(const Gain& gain, const Matrix& w) {
  const Matrix s = stacked_identity(gain);
  return SymMatrix::symmetrized(s * w * s.transpose());
}

double q_value(const QKernel& h, const Gain& gain, const Matrix& w, double gamma, const Vector& x,
               const Vector& u) {
  if (x.size() != h.state_dim() || u.size() != h.input_dim()) {
    throw DimensionError("q_value: state or input has the wrong size");
  }
  Vector z(x.size() + u.size());
  z << x, u;
  const double trace_term = (h.h().matrix() * noise_moment(gain, w).matrix()).trace();
  return z.dot(h.h().matrix() * z) + gamma / (1.0 - gamma) * trace_term;
}

QKernel exact_q_policy_evaluation(const SystemModel& model, const CostSpec& cost, const Gain& gain) {
  return h_from_p(model, cost, solve_sle(model, cost, gain));
}

}  // namespace slqr
