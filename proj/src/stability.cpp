#include "slqr/stability.hpp"

#include <cmath>
#include <string>

#include "slqr/errors.hpp"

namespace slqr {

namespace {

constexpr double kAdmissibleMargin = 1e-9;
constexpr double kCostBoundMargin = 1e-10;
constexpr double kSleResidualTol = 1e-9;

}  // namespace

Matrix closed_loop_matrix(const SystemModel& model, const Gain& gain) {
  check_gain(model, gain);
  const Matrix f = model.A + model.B * gain.L;
  const Matrix g = model.C + model.D * gain.L;
  return kron(f, f) + kron(g, g);
}

bool is_admissible(const SystemModel& model, const Gain& gain) {
  return spectral_radius(closed_loop_matrix(model, gain)) < 1.0 - kAdmissibleMargin;
}

CostKernel solve_sle(const SystemModel& model, const CostSpec& cost, const Gain& gain) {
  const Index n = model.n();
  const Matrix m = closed_loop_matrix(model, gain);
  const double rho = spectral_radius(m);
  if (cost.gamma * rho >= 1.0) {
    throw NoUniqueSolutionError("solve_sle: gamma * rho(M) = " + std::to_string(cost.gamma * rho) +
                                " >= 1");
  }

  const Matrix rhs = cost.Q + gain.L.transpose() * cost.R * gain.L;
  const Matrix lhs = Matrix::Identity(n * n, n * n) - cost.gamma * m.transpose();
  Vector sol;
  try {
    sol = solve_linear(lhs, vec(rhs));
  } catch (const SingularMatrixError& e) {
    throw NumericError(std::string("solve_sle: ") + e.what());
  }
  SymMatrix p = SymMatrix::symmetrized(unvec(sol, n, n));

  const Matrix f = model.A + model.B * gain.L;
  const Matrix g = model.C + model.D * gain.L;
  const Matrix residual = cost.gamma * (f.transpose() * p.matrix() * f + g.transpose() * p.matrix() * g) +
                          rhs - p.matrix();
  const double scale = 1.0 + p.matrix().norm();
  if (!(residual.norm() <= kSleResidualTol * scale)) {
    throw NumericError("solve_sle: residual check failed (" + std::to_string(residual.norm()) + ")");
  }
  return CostKernel{p};
}

bool cost_bound_holds(const CostSpec& cost, const Gain& gain, const CostKernel& kernel) {
  const Matrix bound = (cost.Q + gain.L.transpose() * cost.R * gain.L) / (1.0 - cost.gamma);
  return min_sym_eigenvalue(bound - kernel.P.matrix()) > kCostBoundMargin;
}

double exact_cost(const SystemModel& model, const CostSpec& cost, const Gain& gain) {
  if (!is_admissible(model, gain)) throw AdmissibilityError("exact_cost: gain is not admissible");
  const Matrix p = solve_sle(model, cost, gain).P.matrix();
  return (p * model.X0).trace() + cost.gamma / (1.0 - cost.gamma) * (p * model.W).trace();
}

std::optional<double> smallest_certified_discount(const SystemModel& model, const CostSpec& cost,
                                                  const Gain& gain, double resolution) {
  const int steps = static_cast<int>(std::lround(1.0 / resolution));
  CostSpec trial = cost;
  for (int k = 1; k < steps; ++k) {
    trial.gamma = k * resolution;
    try {
      if (cost_bound_holds(trial, gain, solve_sle(model, trial, gain))) return trial.gamma;
    } catch (const NoUniqueSolutionError&) {
      return std::nullopt;  // larger discounts only make the operator less contractive
    }
  }
  return std::nullopt;
}

}  // namespace slqr
