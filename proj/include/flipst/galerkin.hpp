#pragma once

#include <Eigen/Dense>

#include "flipst/grid.hpp"
#include "flipst/spectral.hpp"

namespace flipst {

/// Velocity in domain lengths per time step, sampled at grid points.
struct VelocityField {
  GridSpec grid;
  Eigen::VectorXd vx;
  Eigen::VectorXd vy;

  static VelocityField zero(GridSpec g);
  static VelocityField constant(GridSpec g, double vx, double vy);
};

/// Symmetric diffusivity tensor (domain length^2 per step) and its divergence
/// (div D)_x = d/dx dxx + d/dy dyx, (div D)_y = d/dx dxy + d/dy dyy.
struct DiffusivityField {
  GridSpec grid;
  Eigen::VectorXd dxx, dxy, dyx, dyy;
  Eigen::VectorXd div_dx, div_dy;

  static DiffusivityField zero(GridSpec g);
  /// d * I with d constant; the divergence vanishes.
  static DiffusivityField isotropic(GridSpec g, double d);
  /// Scalar field promoted to d(s) * I. The divergence uses central
  /// differences, periodic when `periodic` is set and one-sided at the
  /// boundary rows/columns otherwise.
  static DiffusivityField from_scalar(const Field& d, bool periodic);
  /// Full tensor with divergence by finite differences as above.
  static DiffusivityField from_tensor(GridSpec g, Eigen::VectorXd dxx, Eigen::VectorXd dxy,
                                      Eigen::VectorXd dyy, bool periodic);
};

/// d/dx and d/dy of a field in domain units by second-order differences.
/// Periodic wrap when `periodic`, one-sided first-order at the edges otherwise.
struct Gradient {
  Eigen::VectorXd dx;
  Eigen::VectorXd dy;
};
Gradient finite_difference_gradient(const Field& f, bool periodic);

enum class PsiKind { A1, A2, A3, A4, D1, D2, D3, D4 };

/// Grid-mean quadrature of one Galerkin integrand. k is the trial mode and
/// k_test the test mode; A1/D1 project the image of cos_k onto cos_k',
/// A2/D2 the image of sin_k onto cos_k', A3/D3 cos_k onto sin_k', A4/D4 sin_k
/// onto sin_k'. Derivatives act on 2 pi k.
///
/// Advection signs follow A(xi) = -v . grad(xi). The divergence term enters
/// D2 and D4 with a positive sign: grad sin = +k~ cos.
double psi_entry(PsiKind kind, Wavenumber k, Wavenumber k_test, const VelocityField& vel,
                 const DiffusivityField& dif);

/// Grid mean of cos^2(2 pi k.s).
double normalization_c(Wavenumber k, GridSpec g);

/// Generator P with d(alpha)/dt = P alpha on the retained modes.
struct TransitionGenerator {
  ModeOrdering ordering;
  Eigen::MatrixXd matrix;
};

/// Galerkin assembly over retained modes only:
/// P(test, trial) = w_trial / (w_test c_test) * Psi(trial, test), where w is
/// the synthesis weight (1 for K1, 2 for K2). This reproduces the block layout
/// with the C1^-1 / C2^-1 scalings and the 2 and 1/2 prefactors.
TransitionGenerator assemble_transition(const ModeOrdering& ord, const VelocityField& vel,
                                        const DiffusivityField& dif);

} // namespace flipst
