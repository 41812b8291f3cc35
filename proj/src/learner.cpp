#include "slqr/learner.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <future>
#include <sstream>
#include <string>

#include "slqr/errors.hpp"

namespace slqr {

namespace {

constexpr double kRankTolerance = 1e-8;

template <typename E>
[[noreturn]] void rethrow_at(const E& e, int iteration) {
  throw E("iteration " + std::to_string(iteration) + ": " + e.what());
}

QKernel estimate_at(const DataMatrices& data, double gamma, int iteration) {
  try {
    return bls_estimate(data, gamma);
  } catch (const ExcitationError& e) {
    rethrow_at(e, iteration);
  } catch (const EvaluationError& e) {
    rethrow_at(e, iteration);
  } catch (const NumericError& e) {
    rethrow_at(e, iteration);
  }
}

}  // namespace

void LearnerConfig::validate(Index n, Index m) const {
  if (initial_gain.L.rows() != m || initial_gain.L.cols() != n) {
    throw ValidationError("learner: initial gain must be " + std::to_string(m) + "x" + std::to_string(n));
  }
  if (!initial_gain.L.allFinite()) throw ValidationError("learner: initial gain has non-finite entries");
  if (rollout_length < 1) throw ValidationError("learner: rollout length N must be positive");
  if (num_mean < 1) throw ValidationError("learner: num_mean must be positive");
  if (max_iterations < 0) throw ValidationError("learner: max_iterations must be nonnegative");
  if (!(tolerance > 0.0)) throw ValidationError("learner: tolerance must be positive");
  if (!(probe_std > 0.0)) throw ValidationError("learner: probe_std must be positive");
  if (threads < 1) throw ValidationError("learner: threads must be positive");
  if (max_steps < 0) throw ValidationError("learner: max_steps must be nonnegative");
  if (max_steps > 0 && max_steps < rollout_length * num_mean) {
    throw ValidationError("learner: max_steps is smaller than one iteration (N * num_mean)");
  }
  const Index features = half_vec_size(n + m);
  if (rollout_length * num_mean < features) {
    throw ValidationError("learner: N * num_mean = " + std::to_string(rollout_length * num_mean) +
                          " is below the " + std::to_string(features) + " regression unknowns");
  }
}

DataMatrices build_data_matrices(const Rollout& roll, const Gain& gain, const CostSpec& cost, const Matrix& w,
                                 NextAction next_action) {
  const Index n = roll.states.rows();
  const Index m = roll.inputs.rows();
  const Index steps = roll.length();
  if (roll.inputs.cols() != roll.states.cols() || steps < 1) {
    throw DimensionError("build_data_matrices: rollout needs N+1 matching states and inputs");
  }
  if (gain.L.rows() != m || gain.L.cols() != n || cost.Q.rows() != n || cost.R.rows() != m ||
      w.rows() != n || w.cols() != n) {
    throw DimensionError("build_data_matrices: dimensions do not match the rollout");
  }

  const Index k = half_vec_size(n + m);
  DataMatrices data;
  data.state_dim = n;
  data.phi.resize(steps, k);
  data.psi.resize(steps, k);
  data.ups.resize(steps);

  Vector next(n + m);
  for (Index j = 0; j < steps; ++j) {
    const Vector z = roll.z(j);
    data.phi.row(j) = vech_outer(z).transpose();
    data.ups(j) = one_step_cost(cost, roll.states.col(j), roll.inputs.col(j));
    if (next_action == NextAction::kRecorded) {
      next = roll.z(j + 1);
    } else {
      next << roll.states.col(j + 1), gain.L * roll.states.col(j + 1);
    }
    data.psi.row(j) = vech_outer(next).transpose();
  }
  data.gam = vech(noise_moment(gain, w)).transpose().replicate(steps, 1);
  return data;
}

QKernel bls_estimate(const DataMatrices& data, double gamma) {
  const Index k = data.phi.cols();
  if (data.psi.rows() != data.rows() || data.psi.cols() != k || data.gam.rows() != data.rows() ||
      data.gam.cols() != k || data.ups.size() != data.rows()) {
    throw DimensionError("bls_estimate: data matrices have inconsistent shapes");
  }
  Index p = 0;
  while (half_vec_size(p) < k) ++p;
  if (half_vec_size(p) != k || data.state_dim < 1 || data.state_dim >= p) {
    throw DimensionError("bls_estimate: column count is not p(p+1)/2 for a valid split");
  }
  if (!data.phi.allFinite() || !data.psi.allFinite() || !data.ups.allFinite()) {
    throw NumericError("bls_estimate: data contains non-finite entries");
  }

  Eigen::JacobiSVD<Matrix> svd(data.phi);
  const Vector& sv = svd.singularValues();
  if (data.rows() < k || !(sv(0) > 0.0) || !(sv(k - 1) >= kRankTolerance * sv(0))) {
    std::ostringstream msg;
    msg << "bls_estimate: regression matrix is rank deficient (singular value ratio "
        << (data.rows() < k || !(sv(0) > 0.0) ? 0.0 : sv(k - 1) / sv(0)) << "); increase probe_std or N";
    throw ExcitationError(msg.str());
  }

  const Matrix normal = data.phi.transpose() * (data.phi + gamma * data.gam - gamma * data.psi);
  Vector h;
  try {
    h = solve_linear(normal, data.phi.transpose() * data.ups);
  } catch (const SingularMatrixError& e) {
    throw NumericError(std::string("bls_estimate: ") + e.what());
  }
  QKernel kernel(unvecs(h, p), data.state_dim);
  const double min_eig = min_sym_eigenvalue(kernel.huu());
  if (!(min_eig > 1e-12)) {
    std::ostringstream msg;
    msg << "bls_estimate: estimated Huu is not positive definite (min eigenvalue " << min_eig
        << ", Huu = " << kernel.huu().format(Eigen::IOFormat(6, Eigen::DontAlignCols, ", ", "; ", "", "", "[", "]"))
        << ")";
    throw EvaluationError(msg.str());
  }
  return kernel;
}

ModelSampler::ModelSampler(SystemModel model) : model_(std::move(model)) { model_.validate(); }

Rollout ModelSampler::next_rollout(const Gain& gain, double probe_std, Index steps,
                                   std::uint64_t substream_id) const {
  GaussianStream rng(substream_id);
  return rollout(model_, gain, probe_std, steps, rng);
}

std::uint64_t batch_substream_id(std::uint64_t master_seed, int iteration, int batch) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(batch)});
}

LearnerResult model_free_pi(const RolloutSampler& sampler, const CostSpec& cost, const Matrix& w,
                            const LearnerConfig& config) {
  const Index n = sampler.state_dim();
  const Index m = sampler.input_dim();
  config.validate(n, m);
  if (cost.Q.rows() != n || cost.R.rows() != m) throw DimensionError("model_free_pi: cost does not match sampler");
  if (w.rows() != n || w.cols() != n) throw DimensionError("model_free_pi: W does not match sampler");

  LearnerResult result;
  Gain gain = config.initial_gain;
  const Index steps = config.rollout_length;

  const std::int64_t per_iteration = static_cast<std::int64_t>(steps) * config.num_mean;
  for (int i = 0; i < config.max_iterations; ++i) {
    if (config.max_steps > 0 && result.steps_consumed + per_iteration > config.max_steps) break;
    auto collect = [&](int q) {
      const Rollout roll = sampler.next_rollout(gain, config.probe_std, steps,
                                                batch_substream_id(config.master_seed, i, q));
      return build_data_matrices(roll, gain, cost, w, config.next_action);
    };

    DataMatrices avg;
    auto accumulate = [&](DataMatrices batch, int q) {
      if (q == 0) {
        avg = std::move(batch);
      } else {
        avg.phi += batch.phi;
        avg.psi += batch.psi;
        avg.ups += batch.ups;
      }
    };
    if (config.threads > 1) {
      for (int first = 0; first < config.num_mean; first += config.threads) {
        const int last = std::min(config.num_mean, first + config.threads);
        std::vector<std::future<DataMatrices>> pending;
        for (int q = first; q < last; ++q) pending.push_back(std::async(std::launch::async, collect, q));
        for (int q = first; q < last; ++q) accumulate(pending[q - first].get(), q);
      }
    } else {
      for (int q = 0; q < config.num_mean; ++q) accumulate(collect(q), q);
    }
    result.steps_consumed += per_iteration;

    const double scale = 1.0 / config.num_mean;
    avg.phi *= scale;
    avg.psi *= scale;
    avg.ups *= scale;
    if (!config.trace_correction) avg.gam.setZero();

    QKernel h = estimate_at(avg, cost.gamma, i);
    Gain next = gain_from_h(h);
    const double change = (next.L - gain.L).norm();
    result.trace.iterations.push_back(PiIterate{i, gain, p_from_h(h, gain), change});
    result.q_kernels.push_back(std::move(h));
    gain = std::move(next);
    if (change < config.tolerance) {
      result.trace.converged = true;
      break;
    }
  }
  result.trace.final_gain = gain;
  return result;
}

}  // namespace slqr
