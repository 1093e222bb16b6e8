#include "flipst/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "flipst/error.hpp"

namespace flipst {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Eigen::VectorXd gaussian_noise(std::mt19937_64& rng, Eigen::Index n, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = normal(rng);
  return out;
}

} // namespace

void SimulationConfig::validate() const {
  grid.validate();
  if (steps < 2) throw ConfigError("simulation needs at least 2 steps");
  if (!(delta > 0.0)) throw ConfigError("simulation delta must be positive");
  if (!(source_scale > 0.0)) throw ConfigError("source scale must be positive");
  if (noise_alpha < 0.0 || noise_beta < 0.0) throw ConfigError("noise variances must be non-negative");
  if (diffusivity < 0.0) throw ConfigError("diffusivity must be non-negative");
  if (noise_modes < 0) throw ConfigError("noise_modes must be >= 0");
}

Field forcing_field(const SimulationConfig& cfg) {
  const GridSpec g = cfg.grid;
  Field q(g);
  const double denom = 2.0 * cfg.source_scale * cfg.source_scale;
  for (int j = 0; j < g.n1; ++j) {
    for (int i = 0; i < g.n2; ++i) {
      const double dx = g.x(j) - cfg.source_x;
      const double dy = g.y(i) - cfg.source_y;
      q.at(i, j) = cfg.source_amplitude * std::exp(-(dx * dx + dy * dy) / denom);
    }
  }
  return q;
}

UniformPropagator::UniformPropagator(ModeOrdering ord, double vx, double vy, double diffusivity,
                                     double delta)
    : ord_(std::move(ord)),
      decay_(ord_.size()),
      cos_(ord_.size()),
      sin_(ord_.size()) {
  for (int c = 0; c < ord_.size(); ++c) {
    const Wavenumber k = ord_[c].k;
    const double lambda = -two_pi * two_pi * diffusivity * static_cast<double>(k.norm2());
    decay_[c] = std::exp(lambda * delta);
    // K1 modes have sin(2 pi k.s) == 0 on the grid, so advection drops out.
    const double omega = ord_[c].paired ? two_pi * (k.k1 * vx + k.k2 * vy) : 0.0;
    cos_[c] = std::cos(omega * delta);
    sin_[c] = std::sin(omega * delta);
  }
}

Eigen::VectorXd UniformPropagator::apply(const Eigen::VectorXd& alpha) const {
  const int nk1 = ord_.k1_count();
  const int nk2 = ord_.k2_count();
  Eigen::VectorXd out(alpha.size());
  for (int c = 0; c < nk1; ++c) out[c] = decay_[c] * alpha[c];
  for (int m = 0; m < nk2; ++m) {
    const int ci = nk1 + m;
    const int si = nk1 + nk2 + m;
    const double a = alpha[ci], b = alpha[si];
    out[ci] = decay_[ci] * (cos_[ci] * a - sin_[ci] * b);
    out[si] = decay_[ci] * (sin_[ci] * a + cos_[ci] * b);
  }
  return out;
}

Eigen::MatrixXd UniformPropagator::matrix() const {
  const int k = ord_.size();
  Eigen::MatrixXd m(k, k);
  for (int c = 0; c < k; ++c) m.col(c) = apply(Eigen::VectorXd::Unit(k, c));
  return m;
}

SimulationResult simulate_advection(const SimulationConfig& cfg) {
  cfg.validate();
  const ModeOrdering ord = ModeOrdering::full(cfg.grid);
  const UniformPropagator prop(ord, cfg.vx, cfg.vy, cfg.diffusivity, cfg.delta);
  const bool all_modes = cfg.noise_modes == 0 || cfg.noise_modes >= ord.size();
  const ModeOrdering noisy = all_modes ? ord : ModeOrdering::truncated(cfg.grid, cfg.noise_modes);

  std::mt19937_64 rng(cfg.seed);
  auto draw = [&](double variance) -> Eigen::VectorXd {
    if (variance == 0.0) return Eigen::VectorXd::Zero(ord.size());
    Eigen::VectorXd e = gaussian_noise(rng, noisy.size(), variance);
    return all_modes ? e : restrict_coefficients(e, noisy, ord);
  };

  SimulationResult out;
  out.ordering = ord;
  Eigen::VectorXd alpha = analyze(forcing_field(cfg), ord).alpha;
  Eigen::VectorXd beta = alpha;
  for (int t = 0; t < cfg.steps; ++t) {
    if (t > 0) {
      alpha = prop.apply(alpha) + beta + draw(cfg.noise_alpha);
      beta += draw(cfg.noise_beta);
    }
    out.alpha.push_back(alpha);
    out.beta.push_back(beta);
    out.frames.push_back(synthesize({ord, alpha}));
  }
  return out;
}

void StormConfig::validate() const {
  grid.validate();
  if (steps < 2) throw ConfigError("storm stack needs at least 2 steps");
}

std::vector<Field> simulate_storm(const StormConfig& cfg) {
  cfg.validate();
  struct Cell {
    double x, y, scale, peak_mm, growth;
  };
  // A train of cells strung out upstream of the (0, 1) corner; they cross the
  // low-x/high-y boundaries one after another while the stack runs.
  const Cell cells[] = {
      {0.06, 0.94, 0.070, 40.0, 0.02},  {-0.02, 0.99, 0.060, 30.0, 0.03},
      {0.02, 1.06, 0.065, 35.0, 0.00},  {-0.08, 1.03, 0.075, 45.0, 0.02},
      {-0.05, 1.12, 0.055, 25.0, 0.04}, {-0.14, 1.10, 0.070, 38.0, 0.01},
  };
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> jitter(0.0, cfg.noise_dbz);
  const GridSpec g = cfg.grid;
  std::vector<Field> frames;
  for (int t = 0; t < cfg.steps; ++t) {
    Field z(g);
    for (int j = 0; j < g.n1; ++j) {
      for (int i = 0; i < g.n2; ++i) {
        double rain = 0.0;
        for (const auto& c : cells) {
          const double dx = g.x(j) - (c.x + cfg.vx * t);
          const double dy = g.y(i) - (c.y + cfg.vy * t);
          const double s = c.scale * (1.0 + c.growth * t);
          rain += c.peak_mm * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
        }
        // Inverse Marshall-Palmer: Z = 10 log10(200 R^1.6); sub-threshold rain is no echo.
        z.at(i, j) = rain > 0.05 ? 10.0 * std::log10(200.0 * std::pow(rain, 1.6)) + jitter(rng)
                                 : cfg.no_echo_dbz;
      }
    }
    frames.push_back(std::move(z));
  }
  return frames;
}

} // namespace flipst
