#pragma once

#include <Eigen/Dense>

#include "flipst/galerkin.hpp"
#include "flipst/spectral.hpp"

namespace flipst {

/// exp(A) by scaling and squaring with a Pade core. Throws NumericalError on
/// non-finite input or output.
Eigen::MatrixXd matrix_exp(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// H P H^+ on the flipped ordering.
TransitionGenerator flipped_generator(const TransitionGenerator& p, const FlipTransfer& h);

/// One step of the augmented state (alpha, beta):
/// alpha' = phi alpha + beta, beta' = beta.
struct DiscreteTransition {
  double delta = 1.0;
  Eigen::MatrixXd phi;

  Eigen::Index dim() const { return phi.rows(); }
  /// [[phi, I], [0, I]]
  Eigen::MatrixXd augmented() const;
};

struct AugmentedState {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  Eigen::VectorXd stacked() const;
  static AugmentedState split(const Eigen::Ref<const Eigen::VectorXd>& theta);
};

DiscreteTransition build_transition(const TransitionGenerator& gen, double delta);

AugmentedState step(const DiscreteTransition& t, const AugmentedState& s);

} // namespace flipst
