#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "flipst/dynamics.hpp"

namespace flipst {

struct NoiseParams {
  double sigma2_alpha = 0.005;
  double sigma2_beta = 0.001;
  double sigma2_obs = 0.0;

  void validate() const;
};

/// Linear-Gaussian model on theta = (alpha, beta):
///
///   y(t)     = F alpha(t) + v,          v ~ N(0, s2_alpha Vb + s2_obs I)
///   theta(t) = G theta(t-1) + w,        w ~ N(0, diag(s2_alpha B, s2_beta B))
///
/// with G = [[phi, I], [0, I]]. For the non-flipped model B = Vb = I; for the
/// flipped model B = Vb = H H^T. An empty `obs` means F = I.
struct StateSpaceModel {
  DiscreteTransition transition;
  Eigen::MatrixXd obs;
  Eigen::MatrixXd process_base;
  Eigen::MatrixXd obs_base;
  NoiseParams noise;

  Eigen::Index alpha_dim() const { return transition.dim(); }
  Eigen::Index state_dim() const { return 2 * transition.dim(); }
  Eigen::Index obs_dim() const { return obs.size() == 0 ? alpha_dim() : obs.rows(); }

  Eigen::MatrixXd obs_matrix() const;
  Eigen::MatrixXd obs_cov() const;
  Eigen::MatrixXd process_cov() const;

  void validate() const;
};

/// Coefficient-space model (F = I). `noise_map` L gives B = Vb = L L^T; an
/// empty map means identity. With `diagonal` only diag(L L^T) is kept.
StateSpaceModel make_coefficient_model(DiscreteTransition transition, const Eigen::MatrixXd& noise_map,
                                       NoiseParams noise, bool diagonal = false);

/// scale * max(s2_alpha, s2_beta) * I on the augmented state.
Eigen::MatrixXd initial_covariance(Eigen::Index state_dim, const NoiseParams& noise,
                                   double scale = 10.0);

struct FilterOptions {
  bool store_covariances = true;
  bool store_innovations = true;
};

struct FilterResult {
  std::vector<AugmentedState> means;
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<Eigen::VectorXd> innovations;
  std::vector<Eigen::MatrixXd> innovation_covs;
  std::vector<double> step_loglik;
  AugmentedState last_mean;
  Eigen::MatrixXd last_cov;
  double loglik = 0.0;
};

/// Predict/update recursion. The first observation is assimilated against the
/// supplied prior directly (no propagation before it). Throws NumericalError
/// when an innovation covariance is not positive definite.
FilterResult kf_filter(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& observations,
                       const AugmentedState& init_mean, const Eigen::MatrixXd& init_cov,
                       FilterOptions opts = {});

/// Innovations log-likelihood only; same recursion as kf_filter.
double kf_loglik(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& observations,
                 const AugmentedState& init_mean, const Eigen::MatrixXd& init_cov);

struct Forecast {
  std::vector<AugmentedState> means;
  std::vector<Eigen::MatrixXd> covariances;
};

Forecast kf_forecast(const StateSpaceModel& model, const AugmentedState& last_mean,
                     const Eigen::MatrixXd& last_cov, int horizon);

struct EstimateOptions {
  bool fit_obs_noise = true;
  std::vector<double> grid_log10 = {-5.0, -3.0, -1.0};
  int max_evaluations = 120;
  double floor = 1e-12;
  double ceiling = 1e6;
  double tolerance = 1e-4;
  double init_cov_scale = 10.0;
};

struct VarianceEstimate {
  NoiseParams params;
  double loglik = 0.0;
  double best_grid_loglik = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Maximizes the innovations log-likelihood over (s2_alpha, s2_beta[, s2_obs])
/// in log space: coarse grid start, then Nelder-Mead from the best grid point.
/// When the budget runs out the best point so far is returned with
/// converged = false.
VarianceEstimate estimate_variances(const StateSpaceModel& model_template,
                                    const std::vector<Eigen::VectorXd>& observations,
                                    const AugmentedState& init_mean, EstimateOptions opts = {});

} // namespace flipst
