#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>

#include "slqr/errors.hpp"
#include "slqr/learner.hpp"
#include "test_support.hpp"

namespace slqr {
namespace {

using testing::example_cost;
using testing::example_initial_gain;
using testing::example_model;
using testing::max_abs;

LearnerConfig example_config(std::uint64_t seed) {
  LearnerConfig c;
  c.initial_gain = example_initial_gain();
  c.rollout_length = 3600;
  c.num_mean = 5;
  c.probe_std = 1.0;
  c.master_seed = seed;
  c.max_steps = 90000;
  return c;
}

SystemModel noiseless(SystemModel s) {
  s.C.setZero();
  s.D.setZero();
  s.W.setZero();
  return s;
}

// Returns an all-zero trajectory and counts calls. Stands in for a plant
// that never gets excited.
class DeadSampler final : public RolloutSampler {
 public:
  Rollout next_rollout(const Gain&, double, Index steps, std::uint64_t) const override {
    ++calls;
    Rollout r;
    r.states = Matrix::Zero(2, steps + 1);
    r.inputs = Matrix::Zero(1, steps + 1);
    return r;
  }
  Index state_dim() const override { return 2; }
  Index input_dim() const override { return 1; }
  mutable std::atomic<int> calls{0};
};

TEST(DataMatrices, ShapesAndNoiseColumns) {
  const SystemModel s = example_model();
  GaussianStream rng(5);
  const Rollout r = rollout(s, example_initial_gain(), 1.0, 40, rng);
  const DataMatrices d = build_data_matrices(r, example_initial_gain(), example_cost(), s.W);
  EXPECT_EQ(d.rows(), 40);
  EXPECT_EQ(d.phi.cols(), 6);
  EXPECT_EQ(d.psi.cols(), 6);
  EXPECT_EQ(d.gam.cols(), 6);
  EXPECT_EQ(d.state_dim, 2);
  const DataMatrices quiet = build_data_matrices(r, example_initial_gain(), example_cost(), Matrix::Zero(2, 2));
  EXPECT_EQ(quiet.gam, Matrix::Zero(40, 6));
}

TEST(DataMatrices, RowsEvaluateQuadraticForms) {
  const SystemModel s = example_model();
  const Gain g = example_initial_gain();
  GaussianStream rng(6);
  const Rollout r = rollout(s, g, 1.0, 20, rng);
  std::mt19937_64 gen(7);
  const SymMatrix h = SymMatrix::symmetrized(testing::random_matrix(gen, 3, 3));
  for (auto mode : {NextAction::kPolicy, NextAction::kRecorded}) {
    const DataMatrices d = build_data_matrices(r, g, example_cost(), s.W, mode);
    for (Index j = 0; j < d.rows(); ++j) {
      const Vector z = r.z(j);
      EXPECT_NEAR(d.phi.row(j).dot(vecs(h)), z.dot(h.matrix() * z), 1e-10 * (1 + z.squaredNorm()));
      Vector next(3);
      if (mode == NextAction::kPolicy) {
        next << r.states.col(j + 1), g.L * r.states.col(j + 1);
      } else {
        next = r.z(j + 1);
      }
      EXPECT_NEAR(d.psi.row(j).dot(vecs(h)), next.dot(h.matrix() * next), 1e-10 * (1 + next.squaredNorm()));
      EXPECT_NEAR(d.ups(j), one_step_cost(example_cost(), r.states.col(j), r.inputs.col(j)), 1e-12);
    }
  }
}

TEST(BlsEstimate, ExactMomentsRecoverPolicyKernel) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 8; ++trial) {
    const bool example = trial == 0;
    auto rc = testing::random_admissible_case(rng, 1 + trial % 3, 1 + trial % 2, 0.7);
    const SystemModel s = example ? example_model() : rc.model;
    const Gain g = example ? example_initial_gain() : rc.gain;
    const CostSpec c = example ? example_cost() : testing::random_cost(rng, s.n(), s.m(), 0.8);
    const QKernel expected = exact_q_policy_evaluation(s, c, g);
    const QKernel found = bls_estimate(testing::exact_moment_data(s, c, g), c.gamma);
    EXPECT_LE(max_abs(found.h().matrix() - expected.h().matrix()), 1e-6 * (1 + max_abs(expected.h().matrix())));
  }
}

TEST(BlsEstimate, NoiseFreePlantIsRecoveredFromSamples) {
  const SystemModel s = noiseless(example_model());
  const Gain g = example_initial_gain();
  const CostSpec c = example_cost();
  GaussianStream rng(83);
  const Rollout r = rollout(s, g, 1.0, 30, rng);
  const QKernel h = bls_estimate(build_data_matrices(r, g, c, s.W), c.gamma);
  const QKernel expected = exact_q_policy_evaluation(s, c, g);
  EXPECT_LE(max_abs(h.h().matrix() - expected.h().matrix()), 1e-6 * max_abs(expected.h().matrix()));
}

TEST(BlsEstimate, UnprobedDataIsRankDeficient) {
  const SystemModel s = example_model();
  GaussianStream rng(89);
  const Rollout r = rollout(s, example_initial_gain(), 0.0, 200, rng);
  EXPECT_THROW(bls_estimate(build_data_matrices(r, example_initial_gain(), example_cost(), s.W), 0.7),
               ExcitationError);
}

TEST(BlsEstimate, RejectsInconsistentShapes) {
  DataMatrices d = testing::exact_moment_data(example_model(), example_cost(), example_initial_gain());
  d.ups.conservativeResize(3);
  EXPECT_THROW(bls_estimate(d, 0.7), DimensionError);
}

TEST(LearnerConfig, Validation) {
  LearnerConfig c = example_config(1);
  EXPECT_NO_THROW(c.validate(2, 1));
  EXPECT_THROW(c.validate(3, 1), ValidationError);
  c.probe_std = 0.0;
  EXPECT_THROW(c.validate(2, 1), ValidationError);
  c = example_config(1);
  c.rollout_length = 1;
  c.num_mean = 5;
  c.max_steps = 0;
  EXPECT_THROW(c.validate(2, 1), ValidationError);  // 5 rows for 6 unknowns
  c = example_config(1);
  c.max_steps = 100;
  EXPECT_THROW(c.validate(2, 1), ValidationError);
}

TEST(ModelFreePi, ZeroIterationsReturnsInitialGain) {
  LearnerConfig c = example_config(1);
  c.max_iterations = 0;
  const LearnerResult r = model_free_pi(ModelSampler(example_model()), example_cost(), example_model().W, c);
  EXPECT_FALSE(r.trace.converged);
  EXPECT_TRUE(r.trace.iterations.empty());
  EXPECT_EQ(r.trace.final_gain, example_initial_gain());
  EXPECT_EQ(r.steps_consumed, 0);
}

TEST(ModelFreePi, SeededRunsAreDeterministicAndThreadInvariant) {
  const ModelSampler sampler(example_model());
  LearnerConfig c = example_config(3);
  const LearnerResult a = model_free_pi(sampler, example_cost(), example_model().W, c);
  const LearnerResult b = model_free_pi(sampler, example_cost(), example_model().W, c);
  c.threads = 4;
  const LearnerResult t = model_free_pi(sampler, example_cost(), example_model().W, c);
  ASSERT_EQ(a.trace.iterations.size(), b.trace.iterations.size());
  ASSERT_EQ(a.trace.iterations.size(), t.trace.iterations.size());
  for (std::size_t i = 0; i < a.q_kernels.size(); ++i) {
    EXPECT_EQ(a.q_kernels[i].h(), b.q_kernels[i].h());
    EXPECT_EQ(a.q_kernels[i].h(), t.q_kernels[i].h());
  }
  EXPECT_EQ(a.trace.final_gain, t.trace.final_gain);

  c = example_config(4);
  const LearnerResult other = model_free_pi(sampler, example_cost(), example_model().W, c);
  EXPECT_NE(other.q_kernels[0].h(), a.q_kernels[0].h());
}

TEST(ModelFreePi, RespectsStepBudget) {
  LearnerConfig c = example_config(2);
  c.tolerance = 1e-12;  // never converges; only the budget stops it
  c.max_steps = 2 * c.rollout_length * c.num_mean + 1;
  const LearnerResult r = model_free_pi(ModelSampler(example_model()), example_cost(), example_model().W, c);
  EXPECT_EQ(r.trace.iterations.size(), 2u);
  EXPECT_EQ(r.steps_consumed, 2 * c.rollout_length * c.num_mean);
  EXPECT_FALSE(r.trace.converged);
}

TEST(ModelFreePi, ExcitationFailureNamesIteration) {
  const DeadSampler sampler;
  LearnerConfig c = example_config(1);
  try {
    model_free_pi(sampler, example_cost(), Matrix::Identity(2, 2), c);
    FAIL() << "expected ExcitationError";
  } catch (const ExcitationError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 0"), std::string::npos) << e.what();
  }
  EXPECT_EQ(sampler.calls.load(), c.num_mean);
}

TEST(ModelFreePi, TraceCorrectionChangesTheEstimate) {
  const ModelSampler sampler(example_model());
  LearnerConfig c = example_config(5);
  c.max_iterations = 1;
  const LearnerResult on = model_free_pi(sampler, example_cost(), example_model().W, c);
  c.trace_correction = false;
  const LearnerResult off = model_free_pi(sampler, example_cost(), example_model().W, c);
  const QKernel truth = exact_q_policy_evaluation(example_model(), example_cost(), example_initial_gain());
  const double err_on = max_abs(on.q_kernels[0].h().matrix() - truth.h().matrix());
  const double err_off = max_abs(off.q_kernels[0].h().matrix() - truth.h().matrix());
  EXPECT_GT(err_off, err_on);
}

// Median first-iteration kernel error shrinks as the rollouts get longer.
TEST(ModelFreePi, KernelErrorShrinksWithData) {
  const ModelSampler sampler(example_model());
  const QKernel truth = exact_q_policy_evaluation(example_model(), example_cost(), example_initial_gain());
  auto median_error = [&](Index n) {
    std::vector<double> errs;
    for (std::uint64_t seed = 1; seed <= 11; ++seed) {
      LearnerConfig c = example_config(seed);
      c.rollout_length = n;
      c.max_iterations = 1;
      c.max_steps = 0;
      const LearnerResult r = model_free_pi(sampler, example_cost(), example_model().W, c);
      errs.push_back(max_abs(r.q_kernels[0].h().matrix() - truth.h().matrix()));
    }
    std::nth_element(errs.begin(), errs.begin() + 5, errs.end());
    return errs[5];
  };
  const double coarse = median_error(300);
  const double fine = median_error(4800);
  EXPECT_LT(fine, coarse);
}

TEST(ModelFreePi, FirstGainsTrackOfflinePolicyIteration) {
  const ModelSampler sampler(example_model());
  const PiTrace offline = offline_pi(example_model(), example_cost(), example_initial_gain());
  const auto offline_gains = offline.gain_sequence();
  int tracked = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LearnerResult r = model_free_pi(sampler, example_cost(), example_model().W, example_config(seed));
    const auto gains = r.trace.gain_sequence();
    bool ok = gains.size() >= 3;
    for (std::size_t i = 1; ok && i < 3 && i < offline_gains.size(); ++i) {
      ok = (gains[i].L - offline_gains[i].L).norm() <= 0.15;
    }
    tracked += ok;
  }
  EXPECT_GE(tracked, 8);
}

}  // namespace
}  // namespace slqr
