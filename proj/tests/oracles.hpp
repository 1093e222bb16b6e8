#pragma once

// Reference computations the library is checked against. None of them call
// into flipst beyond the plain data types.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "flipst/grid.hpp"
#include "flipst/spectral.hpp"

namespace oracle {

constexpr double two_pi = 2.0 * std::numbers::pi;

inline Eigen::MatrixXd random_image(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

inline flipst::Field random_field(std::mt19937_64& rng, flipst::GridSpec g) {
  return flipst::Field::from_image(random_image(rng, g.n2, g.n1));
}

/// Double mirror image by explicit index reflection for the default variant:
/// flipped(i*, j*) = M(i, j) with i* in {i, 2 n2 - 1 - i}, j* in {j, 2 n1 - 1 - j}.
inline Eigen::MatrixXd reflect_image(const Eigen::MatrixXd& m) {
  const auto n2 = m.rows();
  const auto n1 = m.cols();
  Eigen::MatrixXd out(2 * n2, 2 * n1);
  for (Eigen::Index j = 0; j < n1; ++j) {
    for (Eigen::Index i = 0; i < n2; ++i) {
      const double v = m(i, j);
      out(i, j) = v;
      out(2 * n2 - 1 - i, j) = v;
      out(i, 2 * n1 - 1 - j) = v;
      out(2 * n2 - 1 - i, 2 * n1 - 1 - j) = v;
    }
  }
  return out;
}

/// Taylor series with scaling and squaring, summed to `terms` terms.
inline Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& a, int terms = 60) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.25) ++s;
  const Eigen::MatrixXd b = a / std::ldexp(1.0, s);
  const auto n = a.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k < terms; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

inline Eigen::MatrixXd svd_pinv(const Eigen::MatrixXd& a, double rel_tol = 1e-12) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::MatrixXd sinv = Eigen::MatrixXd::Zero(a.cols(), a.rows());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * s[0]) sinv(i, i) = 1.0 / s[i];
  }
  return svd.matrixV() * sinv * svd.matrixU().transpose();
}

/// Weighted basis column evaluated in floating point at (x_j, y_i).
inline double basis_value(const flipst::Coefficient& c, double x, double y) {
  const double th = two_pi * (c.k.k1 * x + c.k.k2 * y);
  const double w = c.paired ? 2.0 : 1.0;
  return w * (c.branch == flipst::Branch::cos ? std::cos(th) : std::sin(th));
}

inline Eigen::MatrixXd basis(const flipst::ModeOrdering& ord) {
  const auto g = ord.grid();
  Eigen::MatrixXd f(g.size(), ord.size());
  for (int c = 0; c < ord.size(); ++c)
    for (int j = 0; j < g.n1; ++j)
      for (int i = 0; i < g.n2; ++i) f(j * g.n2 + i, c) = basis_value(ord[c], g.x(j), g.y(i));
  return f;
}

/// Least-squares coefficients through the normal equations.
inline Eigen::VectorXd least_squares_coefficients(const flipst::Field& f, const flipst::ModeOrdering& ord) {
  const Eigen::MatrixXd b = basis(ord);
  return (b.transpose() * b).ldlt().solve(b.transpose() * f.values);
}

/// Periodic bilinear sample of an n2 x n1 image at fractional pixel (pi, pj).
inline double bilinear_periodic(const Eigen::MatrixXd& m, double pi, double pj) {
  const auto n2 = m.rows();
  const auto n1 = m.cols();
  const double fi = std::floor(pi);
  const double fj = std::floor(pj);
  const double ti = pi - fi;
  const double tj = pj - fj;
  auto at = [&](long long i, long long j) {
    i = ((i % n2) + n2) % n2;
    j = ((j % n1) + n1) % n1;
    return m(i, j);
  };
  const auto i0 = static_cast<long long>(fi);
  const auto j0 = static_cast<long long>(fj);
  return (1 - ti) * (1 - tj) * at(i0, j0) + ti * (1 - tj) * at(i0 + 1, j0) + (1 - ti) * tj * at(i0, j0 + 1) +
         ti * tj * at(i0 + 1, j0 + 1);
}

/// Semi-Lagrangian step for xi' = -v.grad(xi) + q: xi(s) <- xi(s - v) + q(s).
/// Cubic Catmull-Rom along x keeps numerical diffusion small for sub-pixel
/// shifts; v is along x only.
inline Eigen::MatrixXd semi_lagrangian_step(const Eigen::MatrixXd& xi, const Eigen::MatrixXd& q, double vx) {
  const auto n2 = xi.rows();
  const auto n1 = xi.cols();
  Eigen::MatrixXd out(n2, n1);
  const double shift = vx * n1;
  for (Eigen::Index j = 0; j < n1; ++j) {
    const double pj = j - shift;
    const double fj = std::floor(pj);
    const double t = pj - fj;
    const auto j0 = static_cast<long long>(fj);
    auto col = [&](long long jj) { return ((jj % n1) + n1) % n1; };
    const double w0 = ((-t + 2) * t - 1) * t / 2;
    const double w1 = ((3 * t - 5) * t * t + 2) / 2;
    const double w2 = ((-3 * t + 4) * t + 1) * t / 2;
    const double w3 = (t - 1) * t * t / 2;
    for (Eigen::Index i = 0; i < n2; ++i) {
      out(i, j) = w0 * xi(i, col(j0 - 1)) + w1 * xi(i, col(j0)) + w2 * xi(i, col(j0 + 1)) +
                  w3 * xi(i, col(j0 + 2)) + q(i, j);
    }
  }
  return out;
}

inline double mae_loop(const flipst::Field& a, const flipst::Field& b) {
  double s = 0.0;
  for (int j = 0; j < a.grid.n1; ++j)
    for (int i = 0; i < a.grid.n2; ++i) s += std::abs(a.at(i, j) - b.at(i, j));
  return s / a.grid.size();
}

} // namespace oracle
