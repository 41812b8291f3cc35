#pragma once

#include "slqr/stability.hpp"

namespace slqr {

/// Kernel H of the state-action value function, ordered [x; u]:
///
///   H = [ Hxx  Hxu ]
///       [ Hux  Huu ]
class QKernel {
 public:
  QKernel() = default;
  QKernel(SymMatrix h, Index state_dim);

  const SymMatrix& h() const { return h_; }
  Index state_dim() const { return n_; }
  Index input_dim() const { return h_.dim() - n_; }

  Matrix hxx() const { return h_.matrix().topLeftCorner(n_, n_); }
  Matrix hxu() const { return h_.matrix().topRightCorner(n_, input_dim()); }
  Matrix hux() const { return h_.matrix().bottomLeftCorner(input_dim(), n_); }
  Matrix huu() const { return h_.matrix().bottomRightCorner(input_dim(), input_dim()); }

 private:
  SymMatrix h_;
  Index n_ = 0;
};

QKernel h_from_p(const SystemModel& model, const CostSpec& cost, const CostKernel& kernel);

// [I; L]' H [I; L].
CostKernel p_from_h(const QKernel& h, const Gain& gain);

// -Huu^{-1} Hux. Throws EvaluationError if Huu is not positive definite
// (min eigenvalue <= 1e-12).
Gain gain_from_h(const QKernel& h);

// [I; L] W [I; L]', the additive-noise covariance seen in [x; Lx].
SymMatrix noise_moment(const Gain& gain, const Matrix& w);

// z'Hz + gamma/(1-gamma) tr(H [I;L] W [I;L]') at z = [x; u].
double q_value(const QKernel& h, const Gain& gain, const Matrix& w, double gamma, const Vector& x,
               const Vector& u);

// Q-kernel of a fixed gain under exact expectations, via the cost kernel.
QKernel exact_q_policy_evaluation(const SystemModel& model, const CostSpec& cost, const Gain& gain);

}  // namespace slqr
