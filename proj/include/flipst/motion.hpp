#pragma once

#include <string>

#include <Eigen/Dense>

#include "flipst/galerkin.hpp"
#include "flipst/grid.hpp"

namespace flipst {

/// Block-matching (TREC) parameters. Lengths are in pixels.
struct MotionConfig {
  int block = 16;
  double overlap = 0.5;
  int search_radius = 8;
  /// Blocks whose pixel variance falls below this are not matched.
  double min_block_energy = 1e-6;
  double smooth_sigma = 2.0;

  void validate() const;
  int stride() const;
};

struct MotionEstimate {
  VelocityField velocity;
  /// Per-block displacement in pixels, rows index block-y, columns block-x.
  Eigen::MatrixXd block_dx;
  Eigen::MatrixXd block_dy;
  Eigen::MatrixXd block_score;
  bool degenerate = false;
  std::string warning;
};

/// Displacement maximizing normalized cross-correlation per block, with
/// parabolic sub-pixel refinement. Unmatched blocks take the mean of their
/// matched neighbours, the block vectors are Gaussian-smoothed and then
/// bilinearly interpolated to every pixel. Velocities are in domain lengths
/// per step (pixels / n along each axis).
MotionEstimate estimate_velocity(const Field& frame_a, const Field& frame_b, const MotionConfig& cfg = {});

/// Scalar eddy diffusivity 0.28 dx dy |S| with
/// |S| = sqrt((dvx/dx - dvy/dy)^2 + (dvx/dy + dvy/dx)^2), derivatives by
/// central differences (one-sided at the edges).
Field deformation_diffusivity(const VelocityField& vel, double delta_x, double delta_y);

/// The same scalar promoted to d(s) I, with its divergence.
DiffusivityField diffusivity_from_velocity(const VelocityField& vel, double delta_x, double delta_y);

} // namespace flipst
