#pragma once

#include <vector>

#include "slqr/stability.hpp"

namespace slqr {

/// One policy-iteration step: the gain L(i) that was evaluated, its kernel
/// P(i), and ||L(i+1) - L(i)||_F for the improved gain.
struct PiIterate {
  int index = 0;
  Gain gain;
  CostKernel kernel;
  double gain_change = 0.0;
};

struct PiTrace {
  std::vector<PiIterate> iterations;
  bool converged = false;
  Gain final_gain;
  // Kernel of final_gain; empty when the final gain could not be evaluated.
  std::optional<CostKernel> final_kernel;

  // L(0), L(1), ..., final_gain.
  std::vector<Gain> gain_sequence() const;
};

// -(R + g B'PB + g D'PD)^{-1} (g B'PA + g D'PC).
Gain policy_improve(const SystemModel& model, const CostSpec& cost, const CostKernel& kernel);

inline constexpr int kDefaultMaxIterations = 20;
inline constexpr double kDefaultTolerance = 1e-2;

// Model-based policy iteration. Throws AdmissibilityError when L0 is not
// admissible; a Lyapunov solve failing mid-run raises NumericError naming
// the iteration.
PiTrace offline_pi(const SystemModel& model, const CostSpec& cost, const Gain& initial,
                   int max_iterations = kDefaultMaxIterations, double tolerance = kDefaultTolerance);

// Q + g A'PA + g C'PC - (g A'PB + g C'PD)(R + g B'PB + g D'PD)^{-1}(g B'PA + g D'PC) - P.
SymMatrix sare_residual(const SystemModel& model, const CostSpec& cost, const CostKernel& kernel);

// Iterates the Riccati map from P = Q. Throws NumericError if ||P|| exceeds
// 1e12.
CostKernel value_iteration_sare(const SystemModel& model, const CostSpec& cost, int iterations);

}  // namespace slqr
