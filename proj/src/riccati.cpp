#include "slqr/riccati.hpp"

#include <Eigen/Cholesky>
#include <string>

#include "slqr/errors.hpp"

namespace slqr {

namespace {

constexpr double kDivergenceNorm = 1e12;

// Right-hand side of the Riccati equation evaluated at P.
Matrix riccati_map(const SystemModel& model, const CostSpec& cost, const Matrix& p) {
  const double g = cost.gamma;
  const Matrix huu = cost.R + g * (model.B.transpose() * p * model.B + model.D.transpose() * p * model.D);
  const Matrix hux = g * (model.B.transpose() * p * model.A + model.D.transpose() * p * model.C);
  const Matrix hxx = cost.Q + g * (model.A.transpose() * p * model.A + model.C.transpose() * p * model.C);
  return hxx - hux.transpose() * huu.ldlt().solve(hux);
}

}  // namespace

std::vector<Gain> PiTrace::gain_sequence() const {
  std::vector<Gain> gains;
  gains.reserve(iterations.size() + 1);
  for (const auto& it : iterations) gains.push_back(it.gain);
  gains.push_back(final_gain);
  return gains;
}

Gain policy_improve(const SystemModel& model, const CostSpec& cost, const CostKernel& kernel) {
  const Matrix& p = kernel.P.matrix();
  const double g = cost.gamma;
  const Matrix huu = cost.R + g * (model.B.transpose() * p * model.B + model.D.transpose() * p * model.D);
  const Matrix hux = g * (model.B.transpose() * p * model.A + model.D.transpose() * p * model.C);
  return Gain{-huu.ldlt().solve(hux)};
}

PiTrace offline_pi(const SystemModel& model, const CostSpec& cost, const Gain& initial,
                   int max_iterations, double tolerance) {
  check_gain(model, initial);
  if (max_iterations < 0) throw ValidationError("offline_pi: max_iterations must be nonnegative");
  if (!(tolerance > 0.0)) throw ValidationError("offline_pi: tolerance must be positive");
  if (!is_admissible(model, initial)) throw AdmissibilityError("offline_pi: initial gain is not admissible");

  PiTrace trace;
  Gain gain = initial;
  for (int i = 0; i < max_iterations; ++i) {
    CostKernel kernel;
    try {
      kernel = solve_sle(model, cost, gain);
    } catch (const Error& e) {
      throw NumericError("offline_pi: policy evaluation failed at iteration " + std::to_string(i) + ": " +
                         e.what());
    }
    Gain next = policy_improve(model, cost, kernel);
    const double change = (next.L - gain.L).norm();
    trace.iterations.push_back(PiIterate{i, gain, kernel, change});
    gain = std::move(next);
    if (change < tolerance) {
      trace.converged = true;
      break;
    }
  }
  trace.final_gain = gain;
  try {
    trace.final_kernel = solve_sle(model, cost, gain);
  } catch (const Error&) {
    trace.final_kernel.reset();
  }
  return trace;
}

SymMatrix sare_residual(const SystemModel& model, const CostSpec& cost, const CostKernel& kernel) {
  return SymMatrix::symmetrized(riccati_map(model, cost, kernel.P.matrix()) - kernel.P.matrix());
}

CostKernel value_iteration_sare(const SystemModel& model, const CostSpec& cost, int iterations) {
  if (iterations < 1) throw ValidationError("value_iteration_sare: iterations must be positive");
  Matrix p = cost.Q;
  for (int j = 0; j < iterations; ++j) {
    p = riccati_map(model, cost, p);
    p = 0.5 * (p + p.transpose());
    if (!(p.norm() <= kDivergenceNorm)) {
      throw NumericError("value_iteration_sare: diverged at step " + std::to_string(j));
    }
  }
  return CostKernel{SymMatrix::symmetrized(p)};
}

}  // namespace slqr
