#include "flipst/dynamics.hpp"

#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "flipst/error.hpp"

namespace flipst {

Eigen::MatrixXd matrix_exp(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.rows() != a.cols()) throw ConfigError("matrix_exp: matrix must be square");
  if (!a.allFinite()) throw NumericalError("matrix_exp: non-finite input");
  Eigen::MatrixXd out = Eigen::MatrixXd(a).exp();
  if (!out.allFinite()) throw NumericalError("matrix_exp: result overflowed");
  return out;
}

TransitionGenerator flipped_generator(const TransitionGenerator& p, const FlipTransfer& h) {
  if (!(p.ordering == h.original) || p.matrix.rows() != h.h.cols()) {
    throw ConfigError("flipped_generator: generator ordering (" + std::to_string(p.matrix.rows()) +
                      " modes) does not match flip transfer (" + std::to_string(h.h.cols()) + ")");
  }
  return {h.flipped, h.h * p.matrix * h.h_pinv};
}

Eigen::MatrixXd DiscreteTransition::augmented() const {
  const Eigen::Index k = dim();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  g.topLeftCorner(k, k) = phi;
  g.topRightCorner(k, k).setIdentity();
  g.bottomRightCorner(k, k).setIdentity();
  return g;
}

Eigen::VectorXd AugmentedState::stacked() const {
  Eigen::VectorXd theta(alpha.size() + beta.size());
  theta << alpha, beta;
  return theta;
}

AugmentedState AugmentedState::split(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const Eigen::Index k = theta.size() / 2;
  return {theta.head(k), theta.tail(k)};
}

DiscreteTransition build_transition(const TransitionGenerator& gen, double delta) {
  if (!(delta > 0.0)) throw ConfigError("build_transition: delta must be positive");
  return {delta, matrix_exp(delta * gen.matrix)};
}

AugmentedState step(const DiscreteTransition& t, const AugmentedState& s) {
  return {t.phi * s.alpha + s.beta, s.beta};
}

} // namespace flipst
