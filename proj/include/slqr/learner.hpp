#pragma once

#include <cstdint>
#include <vector>

#include "slqr/qkernel.hpp"
#include "slqr/riccati.hpp"

namespace slqr {

/// Which input enters the successor feature phi(z_{k+1}).
///
/// kPolicy pairs x_{k+1} with the evaluated policy's own action L x_{k+1},
/// so the probing noise only enters the current-step features. kRecorded
/// uses the recorded input u_{k+1}, probing included; its Bellman relation
/// carries an extra gamma * probe_std^2 * tr(Huu) term that the trace
/// correction does not remove.
enum class NextAction { kPolicy, kRecorded };

struct LearnerConfig {
  Gain initial_gain;
  Index rollout_length = 900;  // N
  int num_mean = 5;            // rollouts averaged per iteration
  int max_iterations = kDefaultMaxIterations;
  double tolerance = kDefaultTolerance;
  double probe_std = 1.0;
  std::uint64_t master_seed = 0;
  bool trace_correction = true;
  NextAction next_action = NextAction::kPolicy;
  int threads = 1;
  // Total plant steps a run may consume; 0 means unlimited. An iteration
  // that would exceed the budget is not started.
  std::int64_t max_steps = 0;

  // Throws ValidationError. n and m are the state and input dimensions.
  void validate(Index n, Index m) const;
};

/// Regression data for one policy-evaluation step, p = n + m and
/// k = p(p+1)/2 columns.
struct DataMatrices {
  Matrix phi;    // N x k, row j = vech(z_j z_j')
  Matrix psi;    // N x k, row j = vech(z'_{j+1} z'_{j+1}')
  Vector ups;    // N, entry j = c(z_j)
  Matrix gam;    // N x k, every row = vech([I;L] W [I;L]')
  Index state_dim = 0;

  Index rows() const { return phi.rows(); }
};

DataMatrices build_data_matrices(const Rollout& roll, const Gain& gain, const CostSpec& cost, const Matrix& w,
                                 NextAction next_action = NextAction::kPolicy);

// Solves (Phi'(Phi + g Gam - g Psi)) vecs(H) = Phi' Ups.
//
// Throws ExcitationError when the smallest singular value of Phi is below
// 1e-8 times the largest, NumericError when the normal matrix is singular
// and EvaluationError when the estimated Huu is not positive definite.
QKernel bls_estimate(const DataMatrices& data, double gamma);

/// Source of closed-loop data. Implementations hide the plant; the learner
/// sees nothing but rollouts.
class RolloutSampler {
 public:
  virtual ~RolloutSampler() = default;

  // Must be callable concurrently from several threads and deterministic in
  // substream_id.
  virtual Rollout next_rollout(const Gain& gain, double probe_std, Index steps,
                               std::uint64_t substream_id) const = 0;
  virtual Index state_dim() const = 0;
  virtual Index input_dim() const = 0;
};

/// Sampler backed by a simulated SystemModel.
class ModelSampler final : public RolloutSampler {
 public:
  explicit ModelSampler(SystemModel model);

  Rollout next_rollout(const Gain& gain, double probe_std, Index steps,
                       std::uint64_t substream_id) const override;
  Index state_dim() const override { return model_.n(); }
  Index input_dim() const override { return model_.m(); }

 private:
  SystemModel model_;
};

// Seed of the rollout for (iteration, batch) under master_seed.
std::uint64_t batch_substream_id(std::uint64_t master_seed, int iteration, int batch);

struct LearnerResult {
  // Iterate kernels are [I;L]' H [I;L] of the estimated H. final_kernel is
  // left empty: the plant is unknown to the learner.
  PiTrace trace;
  std::vector<QKernel> q_kernels;  // one per iteration
  std::int64_t steps_consumed = 0;
};

// Batch least-squares Q-learning policy iteration. W is the additive-noise
// covariance used for the trace correction. Errors from the estimator are
// rethrown with the iteration index in the message.
LearnerResult model_free_pi(const RolloutSampler& sampler, const CostSpec& cost, const Matrix& w,
                            const LearnerConfig& config);

}  // namespace slqr
