#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "flipst/grid.hpp"
#include "flipst/spectral.hpp"

namespace flipst {

/// Advection of a fixed Gaussian source with a forcing term:
///   xi' = -v . grad(xi) + d lap(xi) + Q(s),   xi(s, 0) = Q(s).
struct SimulationConfig {
  GridSpec grid{100, 100};
  int steps = 30;
  double delta = 1.0;
  double vx = 0.01;
  double vy = 0.0;
  double diffusivity = 0.0;
  double source_x = 0.1;
  double source_y = 0.0;
  double source_scale = 0.18;
  double source_amplitude = 3.0 / (2.0 * 3.14159265358979323846 * 0.18 * 0.18);
  double noise_alpha = 0.005;
  double noise_beta = 0.001;
  /// Number of lowest-rank coefficients receiving noise; 0 means all.
  int noise_modes = 0;
  std::uint64_t seed = 20230;

  void validate() const;
};

Field forcing_field(const SimulationConfig& cfg);

/// exp(delta P) for spatially uniform velocity and isotropic diffusivity on
/// any ordering. P is block diagonal there (2x2 rotation-decay blocks for
/// each K2 mode, pure decay for K1), so the exponential is applied per mode.
class UniformPropagator {
public:
  UniformPropagator(ModeOrdering ord, double vx, double vy, double diffusivity, double delta);

  Eigen::VectorXd apply(const Eigen::VectorXd& alpha) const;
  /// Dense K x K matrix of the same map.
  Eigen::MatrixXd matrix() const;

private:
  ModeOrdering ord_;
  Eigen::VectorXd decay_;
  Eigen::VectorXd cos_;
  Eigen::VectorXd sin_;
};

struct SimulationResult {
  ModeOrdering ordering;
  std::vector<Field> frames;
  std::vector<Eigen::VectorXd> alpha;
  std::vector<Eigen::VectorXd> beta;
};

/// alpha(0) = beta(0) = analyze(Q); alpha(t+1) = exp(dP) alpha(t) + beta(t) + e_a,
/// beta(t+1) = beta(t) + e_b with e ~ N(0, noise I) on the noisy coefficients.
/// Frames are full-resolution syntheses. Deterministic for a given seed.
SimulationResult simulate_advection(const SimulationConfig& cfg);

/// Synthetic storm-like reflectivity stack (dBZ): Gaussian rain cells entering
/// from the high-y, low-x corner and drifting toward the opposite corner.
/// Pixels without rain carry `no_echo_dbz`.
struct StormConfig {
  GridSpec grid{100, 100};
  int steps = 8;
  double vx = 0.015;
  double vy = -0.015;
  double no_echo_dbz = -30.0;
  double noise_dbz = 0.5;
  std::uint64_t seed = 7;

  void validate() const;
};

std::vector<Field> simulate_storm(const StormConfig& cfg);

} // namespace flipst
