#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "slqr/linalg.hpp"

namespace slqr {

/// Discrete-time plant with scalar multiplicative noise and additive noise:
///
///   x_{k+1} = A x_k + B u_k + (C x_k + D u_k) d_k + w_k,
///
/// with d_k ~ N(0, 1), w_k ~ N(0, W) and x_0 ~ N(0, X0), all mutually
/// independent.
struct SystemModel {
  Matrix A;   // n x n
  Matrix B;   // n x m
  Matrix C;   // n x n
  Matrix D;   // n x m
  Matrix W;   // n x n, symmetric PSD
  Matrix X0;  // n x n, symmetric PSD

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }

  // Throws DimensionError / ValidationError when an invariant is violated.
  void validate() const;
};

/// One-step cost x'Qx + u'Ru and the discount applied to future costs.
struct CostSpec {
  Matrix Q;  // n x n, symmetric PD
  Matrix R;  // m x m, symmetric PD
  double gamma = 0.0;

  void validate() const;
  void validate_against(const SystemModel& model) const;
};

/// Linear state feedback u = L x.
struct Gain {
  Matrix L;  // m x n

  friend bool operator==(const Gain&, const Gain&) = default;
};

/// Recorded closed-loop data. Column k of `states` is x_k and column k of
/// `inputs` is the input actually applied at x_k (probing included), for
/// k = 0..N.
struct Rollout {
  Matrix states;
  Matrix inputs;

  Index length() const { return states.cols() - 1; }
  Vector z(Index k) const;
};

/// Seeded stream of independent standard normals.
///
/// Backed by std::mt19937_64 and std::normal_distribution; output is
/// deterministic for a given seed and standard library.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  static GaussianStream substream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  double next() { return normal_(engine_); }
  Vector next_vector(Index size);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// splitmix64 hash of `master` and `path`, e.g. derive_seed(seed, {iteration,
// batch}). Distinct paths give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// Lower-triangular F with F F^T = S for symmetric PSD S; columns with a
// non-positive pivot are zero. Used to draw N(0, S) samples.
Matrix psd_factor(const Matrix& s);

// Draws d, then the n components of w (in index order), and returns
// A x + B u + (C x + D u) d + F w where F = psd_factor(W).
Vector step(const SystemModel& model, const Vector& x, const Vector& u, GaussianStream& rng);

// Samples x_0 ~ N(0, X0) and applies u_k = L x_k + probe_std * e_k for
// N steps. Draw order per step: e_k (m normals), then the plant draws of
// `step`. Records N+1 state/input pairs.
Rollout rollout(const SystemModel& model, const Gain& gain, double probe_std, Index steps,
                GaussianStream& rng);

// (A+BL) X (A+BL)^T + (C+DL) X (C+DL)^T + W.
SymMatrix covariance_step(const SystemModel& model, const Gain& gain, const SymMatrix& x);

// Fixed point of covariance_step. Throws AdmissibilityError when the gain is
// not admissible.
SymMatrix stationary_covariance(const SystemModel& model, const Gain& gain);

double one_step_cost(const CostSpec& cost, const Vector& x, const Vector& u);

// Throws DimensionError unless L is m x n for the model.
void check_gain(const SystemModel& model, const Gain& gain);

}  // namespace slqr
