#pragma once

#include <optional>

#include "slqr/linalg.hpp"
#include "slqr/sysmodel.hpp"

namespace slqr {

/// Quadratic cost kernel P of a fixed policy: V(x) = x'Px + gamma/(1-gamma) tr(PW).
struct CostKernel {
  SymMatrix P;
};

// (A+BL) (x) (A+BL) + (C+DL) (x) (C+DL), the second-moment propagator of the
// closed loop acting on column-stacked covariances.
Matrix closed_loop_matrix(const SystemModel& model, const Gain& gain);

// Mean-square stability of the closed loop: rho(M) < 1 - 1e-9.
bool is_admissible(const SystemModel& model, const Gain& gain);

// Solves P = gamma (A+BL)'P(A+BL) + gamma (C+DL)'P(C+DL) + Q + L'RL.
//
// Throws NoUniqueSolutionError when gamma * rho(M) >= 1 and NumericError when
// the residual check fails.
CostKernel solve_sle(const SystemModel& model, const CostSpec& cost, const Gain& gain);

// Sufficient admissibility certificate from the discounted kernel:
// (Q + L'RL) / (1 - gamma) - P is positive definite (margin 1e-10).
bool cost_bound_holds(const CostSpec& cost, const Gain& gain, const CostKernel& kernel);

// Expected discounted cost over x_0 ~ N(0, X0):
// tr(P X0) + gamma/(1-gamma) tr(P W). Throws AdmissibilityError for an
// inadmissible gain.
double exact_cost(const SystemModel& model, const CostSpec& cost, const Gain& gain);

// Smallest discount on a 0.01 grid in (0, 1) at which cost_bound_holds for
// the gain, scanning upward; nullopt when no grid point passes.
std::optional<double> smallest_certified_discount(const SystemModel& model, const CostSpec& cost,
                                                  const Gain& gain, double resolution = 0.01);

}  // namespace slqr
