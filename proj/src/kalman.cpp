#include "flipst/kalman.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "flipst/error.hpp"

namespace flipst {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_positive(double v, const char* name, bool allow_zero) {
  if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
    throw ConfigError(std::string("noise parameter ") + name + " out of range: " + std::to_string(v));
  }
}

// Covariance prediction through G = [[phi, I], [0, I]] exploiting the block form.
void predict_in_place(const StateSpaceModel& m, VectorXd& theta, MatrixXd& cov) {
  const Index k = m.alpha_dim();
  const MatrixXd& phi = m.transition.phi;

  theta.head(k) = phi * theta.head(k) + theta.tail(k);

  const MatrixXd a = cov.topLeftCorner(k, k);
  const MatrixXd b = cov.topRightCorner(k, k);
  const MatrixXd c = cov.bottomRightCorner(k, k);
  const MatrixXd phi_b = phi * b;
  MatrixXd a_new = phi * a * phi.transpose();
  a_new += phi_b + phi_b.transpose() + c;
  a_new += m.noise.sigma2_alpha * m.process_base;
  const MatrixXd b_new = phi_b + c;

  cov.topLeftCorner(k, k) = a_new;
  cov.topRightCorner(k, k) = b_new;
  cov.bottomLeftCorner(k, k) = b_new.transpose();
  cov.bottomRightCorner(k, k) += m.noise.sigma2_beta * m.process_base;
}

struct UpdateOutcome {
  double loglik;
  VectorXd innovation;
  MatrixXd innovation_cov;
};

UpdateOutcome update_in_place(const StateSpaceModel& m, const VectorXd& y, VectorXd& theta,
                              MatrixXd& cov, int t, bool keep) {
  const Index k = m.alpha_dim();
  const bool identity = m.obs.size() == 0;
  const Index p = m.obs_dim();
  if (y.size() != p) {
    throw ConfigError("observation " + std::to_string(t) + " has length " + std::to_string(y.size()) +
                      ", expected " + std::to_string(p));
  }

  // cov * F_aug^T where F_aug = (F, 0).
  MatrixXd pht = identity ? MatrixXd(cov.leftCols(k)) : MatrixXd(cov.leftCols(k) * m.obs.transpose());
  MatrixXd s = identity ? MatrixXd(pht.topRows(k)) : MatrixXd(m.obs * pht.topRows(k));
  s += m.obs_cov();
  s = 0.5 * (s + s.transpose()).eval();

  VectorXd innov = identity ? VectorXd(y - theta.head(k)) : VectorXd(y - m.obs * theta.head(k));

  Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("innovation covariance not positive definite at step " + std::to_string(t));
  }
  const VectorXd z = llt.matrixL().solve(innov);
  const MatrixXd u = llt.matrixL().solve(pht.transpose());

  theta.noalias() += u.transpose() * z;
  cov.noalias() -= u.transpose() * u;
  cov = 0.5 * (cov + cov.transpose()).eval();

  double logdet = 0.0;
  for (Index i = 0; i < p; ++i) logdet += std::log(llt.matrixLLT()(i, i));
  const double ll = -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + 2.0 * logdet +
                            z.squaredNorm());
  if (!std::isfinite(ll) || !theta.allFinite()) {
    throw NumericalError("non-finite filter state at step " + std::to_string(t));
  }
  UpdateOutcome out{ll, {}, {}};
  if (keep) {
    out.innovation = std::move(innov);
    out.innovation_cov = std::move(s);
  }
  return out;
}

double run(const StateSpaceModel& m, const std::vector<VectorXd>& obs, const AugmentedState& init,
           const MatrixXd& init_cov, FilterResult* store, FilterOptions opts) {
  m.validate();
  if (init.alpha.size() != m.alpha_dim() || init.beta.size() != m.alpha_dim()) {
    throw ConfigError("initial state dimension mismatch");
  }
  if (init_cov.rows() != m.state_dim() || init_cov.cols() != m.state_dim()) {
    throw ConfigError("initial covariance dimension mismatch");
  }
  VectorXd theta = init.stacked();
  MatrixXd cov = init_cov;
  double total = 0.0;
  for (size_t t = 0; t < obs.size(); ++t) {
    if (t > 0) predict_in_place(m, theta, cov);
    auto outcome = update_in_place(m, obs[t], theta, cov, static_cast<int>(t),
                                   store != nullptr && opts.store_innovations);
    total += outcome.loglik;
    if (store != nullptr) {
      store->means.push_back(AugmentedState::split(theta));
      store->step_loglik.push_back(outcome.loglik);
      if (opts.store_covariances) store->covariances.push_back(cov);
      if (opts.store_innovations) {
        store->innovations.push_back(std::move(outcome.innovation));
        store->innovation_covs.push_back(std::move(outcome.innovation_cov));
      }
    }
  }
  if (store != nullptr) {
    store->last_mean = AugmentedState::split(theta);
    store->last_cov = std::move(cov);
    store->loglik = total;
  }
  return total;
}

} // namespace

void NoiseParams::validate() const {
  require_positive(sigma2_alpha, "sigma2_alpha", false);
  require_positive(sigma2_beta, "sigma2_beta", false);
  require_positive(sigma2_obs, "sigma2_obs", true);
}

MatrixXd StateSpaceModel::obs_matrix() const {
  return obs.size() == 0 ? MatrixXd(MatrixXd::Identity(alpha_dim(), alpha_dim())) : obs;
}

MatrixXd StateSpaceModel::obs_cov() const {
  MatrixXd v = noise.sigma2_alpha * obs_base;
  v.diagonal().array() += noise.sigma2_obs;
  return v;
}

MatrixXd StateSpaceModel::process_cov() const {
  const Index k = alpha_dim();
  MatrixXd w = MatrixXd::Zero(2 * k, 2 * k);
  w.topLeftCorner(k, k) = noise.sigma2_alpha * process_base;
  w.bottomRightCorner(k, k) = noise.sigma2_beta * process_base;
  return w;
}

void StateSpaceModel::validate() const {
  const Index k = alpha_dim();
  if (transition.phi.rows() != transition.phi.cols()) throw ConfigError("transition must be square");
  if (obs.size() != 0 && obs.cols() != k) throw ConfigError("observation matrix column mismatch");
  if (process_base.rows() != k || process_base.cols() != k) {
    throw ConfigError("process noise base has wrong shape");
  }
  if (obs_base.rows() != obs_dim() || obs_base.cols() != obs_dim()) {
    throw ConfigError("observation noise base has wrong shape");
  }
  noise.validate();
}

StateSpaceModel make_coefficient_model(DiscreteTransition transition, const MatrixXd& noise_map,
                                       NoiseParams noise, bool diagonal) {
  const Index k = transition.dim();
  MatrixXd base = noise_map.size() == 0 ? MatrixXd(MatrixXd::Identity(k, k))
                                        : MatrixXd(noise_map * noise_map.transpose());
  if (base.rows() != k) throw ConfigError("noise map rows must match the state dimension");
  if (diagonal) base = MatrixXd(base.diagonal().asDiagonal());
  StateSpaceModel m{std::move(transition), MatrixXd(), base, base, noise};
  m.validate();
  return m;
}

MatrixXd initial_covariance(Index state_dim, const NoiseParams& noise, double scale) {
  return MatrixXd::Identity(state_dim, state_dim) * (scale * std::max(noise.sigma2_alpha, noise.sigma2_beta));
}

FilterResult kf_filter(const StateSpaceModel& model, const std::vector<VectorXd>& observations,
                       const AugmentedState& init_mean, const MatrixXd& init_cov, FilterOptions opts) {
  FilterResult result;
  run(model, observations, init_mean, init_cov, &result, opts);
  return result;
}

double kf_loglik(const StateSpaceModel& model, const std::vector<VectorXd>& observations,
                 const AugmentedState& init_mean, const MatrixXd& init_cov) {
  return run(model, observations, init_mean, init_cov, nullptr, {});
}

Forecast kf_forecast(const StateSpaceModel& model, const AugmentedState& last_mean,
                     const MatrixXd& last_cov, int horizon) {
  if (horizon < 1) throw ConfigError("forecast horizon must be >= 1");
  model.validate();
  Forecast out;
  VectorXd theta = last_mean.stacked();
  MatrixXd cov = last_cov;
  for (int h = 0; h < horizon; ++h) {
    predict_in_place(model, theta, cov);
    out.means.push_back(AugmentedState::split(theta));
    out.covariances.push_back(cov);
  }
  return out;
}

VarianceEstimate estimate_variances(const StateSpaceModel& model_template,
                                    const std::vector<VectorXd>& observations,
                                    const AugmentedState& init_mean, EstimateOptions opts) {
  if (observations.size() < 3) throw ConfigError("variance estimation needs at least 3 time steps");
  const int dim = opts.fit_obs_noise ? 3 : 2;
  const double lo = std::log(opts.floor);
  const double hi = std::log(opts.ceiling);

  VarianceEstimate est;
  StateSpaceModel model = model_template;

  auto params_of = [&](const std::array<double, 3>& x) {
    NoiseParams p = model_template.noise;
    p.sigma2_alpha = std::exp(std::clamp(x[0], lo, hi));
    p.sigma2_beta = std::exp(std::clamp(x[1], lo, hi));
    if (dim == 3) p.sigma2_obs = std::exp(std::clamp(x[2], lo, hi));
    return p;
  };
  auto objective = [&](const std::array<double, 3>& x) {
    ++est.evaluations;
    model.noise = params_of(x);
    try {
      const double ll = kf_loglik(model, observations, init_mean,
                                  initial_covariance(model.state_dim(), model.noise, opts.init_cov_scale));
      return -ll;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // Coarse grid in log10 space.
  const double ln10 = std::log(10.0);
  std::array<double, 3> best{};
  double best_f = std::numeric_limits<double>::infinity();
  const size_t g = opts.grid_log10.size();
  const size_t combos = dim == 3 ? g * g * g : g * g;
  for (size_t c = 0; c < combos; ++c) {
    std::array<double, 3> x{opts.grid_log10[c % g] * ln10, opts.grid_log10[(c / g) % g] * ln10,
                            dim == 3 ? opts.grid_log10[(c / (g * g)) % g] * ln10 : 0.0};
    const double f = objective(x);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }
  est.best_grid_loglik = -best_f;
  if (!std::isfinite(best_f)) {
    throw NumericalError("variance estimation: the likelihood is degenerate at every grid start");
  }

  // Nelder-Mead in log space.
  std::vector<std::array<double, 3>> simplex(dim + 1, best);
  std::vector<double> fval(dim + 1, best_f);
  for (int i = 0; i < dim; ++i) {
    simplex[i + 1][i] += ln10;
    fval[i + 1] = objective(simplex[i + 1]);
  }
  auto order = [&] {
    std::vector<int> idx(dim + 1);
    for (int i = 0; i <= dim; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fval[a] < fval[b]; });
    auto s2 = simplex;
    auto f2 = fval;
    for (int i = 0; i <= dim; ++i) {
      simplex[i] = s2[idx[i]];
      fval[i] = f2[idx[i]];
    }
  };
  auto blend = [&](const std::array<double, 3>& a, const std::array<double, 3>& b, double t) {
    std::array<double, 3> r{};
    for (int i = 0; i < dim; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };

  while (est.evaluations < opts.max_evaluations) {
    order();
    const double spread = std::abs(fval[dim] - fval[0]);
    if (std::isfinite(fval[dim]) && spread <= opts.tolerance * (1.0 + std::abs(fval[0]))) {
      est.converged = true;
      break;
    }
    std::array<double, 3> centroid{};
    for (int i = 0; i < dim; ++i) {
      for (int d = 0; d < dim; ++d) centroid[d] += simplex[i][d] / dim;
    }
    const auto reflected = blend(centroid, simplex[dim], -1.0);
    const double fr = objective(reflected);
    if (fr < fval[0]) {
      const auto expanded = blend(centroid, simplex[dim], -2.0);
      const double fe = objective(expanded);
      if (fe < fr) {
        simplex[dim] = expanded;
        fval[dim] = fe;
      } else {
        simplex[dim] = reflected;
        fval[dim] = fr;
      }
      continue;
    }
    if (fr < fval[dim - 1]) {
      simplex[dim] = reflected;
      fval[dim] = fr;
      continue;
    }
    const bool outside = fr < fval[dim];
    const auto contracted = outside ? blend(centroid, reflected, 0.5) : blend(centroid, simplex[dim], 0.5);
    const double fc = objective(contracted);
    if (fc < std::min(fr, fval[dim])) {
      simplex[dim] = contracted;
      fval[dim] = fc;
      continue;
    }
    for (int i = 1; i <= dim; ++i) {
      simplex[i] = blend(simplex[0], simplex[i], 0.5);
      fval[i] = objective(simplex[i]);
    }
  }
  order();
  est.params = params_of(simplex[0]);
  est.loglik = -fval[0];
  return est;
}

} // namespace flipst
