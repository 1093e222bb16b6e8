#include "flipst/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "flipst/error.hpp"

namespace flipst {
namespace {

std::vector<int> block_origins(int n, int block, int radius, int stride) {
  std::vector<int> out;
  for (int p = radius; p + block + radius <= n; p += stride) out.push_back(p);
  return out;
}

double ncc(const Eigen::MatrixXd& a_centered, double a_norm, const Eigen::Ref<const Eigen::MatrixXd>& b) {
  const Eigen::MatrixXd bc = b.array() - b.mean();
  const double b_norm = bc.norm();
  if (b_norm <= 0.0 || a_norm <= 0.0) return -std::numeric_limits<double>::infinity();
  return (a_centered.cwiseProduct(bc)).sum() / (a_norm * b_norm);
}

double parabolic_offset(double left, double centre, double right) {
  const double denom = left - 2.0 * centre + right;
  if (!std::isfinite(left) || !std::isfinite(right) || denom >= 0.0) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

Eigen::MatrixXd gaussian_smooth(const Eigen::MatrixXd& m, double sigma) {
  if (sigma <= 0.0) return m;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * r + 1);
  for (int d = -r; d <= r; ++d) kernel[d + r] = std::exp(-0.5 * d * d / (sigma * sigma));
  auto pass = [&](const Eigen::MatrixXd& in, bool along_rows) {
    Eigen::MatrixXd out(in.rows(), in.cols());
    for (Eigen::Index i = 0; i < in.rows(); ++i) {
      for (Eigen::Index j = 0; j < in.cols(); ++j) {
        double acc = 0.0, wsum = 0.0;
        for (int d = -r; d <= r; ++d) {
          const Eigen::Index ii = along_rows ? i + d : i;
          const Eigen::Index jj = along_rows ? j : j + d;
          if (ii < 0 || jj < 0 || ii >= in.rows() || jj >= in.cols()) continue;
          acc += kernel[d + r] * in(ii, jj);
          wsum += kernel[d + r];
        }
        out(i, j) = acc / wsum;
      }
    }
    return out;
  };
  return pass(pass(m, true), false);
}

// Replace invalid entries by the mean of valid 8-neighbours until none remain.
bool fill_invalid(Eigen::MatrixXd& m, Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& valid) {
  if (!valid.any()) return false;
  while (!valid.all()) {
    auto next = valid;
    Eigen::MatrixXd filled = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (valid(i, j)) continue;
        double acc = 0.0;
        int count = 0;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            const Eigen::Index ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= m.rows() || jj >= m.cols() || !valid(ii, jj)) continue;
            acc += m(ii, jj);
            ++count;
          }
        }
        if (count > 0) {
          filled(i, j) = acc / count;
          next(i, j) = true;
        }
      }
    }
    m = filled;
    valid = next;
  }
  return true;
}

double bilinear(const Eigen::MatrixXd& m, double u, double v) {
  u = std::clamp(u, 0.0, static_cast<double>(m.rows() - 1));
  v = std::clamp(v, 0.0, static_cast<double>(m.cols() - 1));
  const Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(u));
  const Eigen::Index j0 = static_cast<Eigen::Index>(std::floor(v));
  const Eigen::Index i1 = std::min<Eigen::Index>(i0 + 1, m.rows() - 1);
  const Eigen::Index j1 = std::min<Eigen::Index>(j0 + 1, m.cols() - 1);
  const double fu = u - i0, fv = v - j0;
  return (1 - fu) * ((1 - fv) * m(i0, j0) + fv * m(i0, j1)) + fu * ((1 - fv) * m(i1, j0) + fv * m(i1, j1));
}

} // namespace

void MotionConfig::validate() const {
  if (block < 4) throw ConfigError("motion block must be >= 4 pixels");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("motion overlap must lie in [0, 1)");
  if (search_radius < 1) throw ConfigError("motion search radius must be >= 1");
  if (smooth_sigma < 0.0) throw ConfigError("motion smoothing sigma must be >= 0");
}

int MotionConfig::stride() const {
  return std::max(1, static_cast<int>(std::lround(block * (1.0 - overlap))));
}

MotionEstimate estimate_velocity(const Field& frame_a, const Field& frame_b, const MotionConfig& cfg) {
  cfg.validate();
  if (!(frame_a.grid == frame_b.grid)) throw ConfigError("estimate_velocity: frames on different grids");
  const GridSpec g = frame_a.grid;
  const int stride = cfg.stride();
  const int r = cfg.search_radius;
  const auto xs = block_origins(g.n1, cfg.block, r, stride);
  const auto ys = block_origins(g.n2, cfg.block, r, stride);
  if (xs.empty() || ys.empty()) {
    throw ConfigError("estimate_velocity: grid too small for block " + std::to_string(cfg.block) +
                      " with search radius " + std::to_string(r));
  }

  const Eigen::MatrixXd a = frame_a.image();
  const Eigen::MatrixXd b = frame_b.image();
  const Eigen::Index by = static_cast<Eigen::Index>(ys.size());
  const Eigen::Index bx = static_cast<Eigen::Index>(xs.size());
  MotionEstimate out;
  out.block_dx = Eigen::MatrixXd::Zero(by, bx);
  out.block_dy = Eigen::MatrixXd::Zero(by, bx);
  out.block_score = Eigen::MatrixXd::Zero(by, bx);
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> valid =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(by, bx, false);

  const int side = 2 * r + 1;
  Eigen::MatrixXd scores(side, side);
  for (Eigen::Index u = 0; u < by; ++u) {
    for (Eigen::Index v = 0; v < bx; ++v) {
      const int y0 = ys[u], x0 = xs[v];
      const Eigen::MatrixXd patch = a.block(y0, x0, cfg.block, cfg.block);
      const Eigen::MatrixXd centered = patch.array() - patch.mean();
      const double energy = centered.squaredNorm() / static_cast<double>(patch.size());
      if (energy < cfg.min_block_energy) continue;
      const double a_norm = centered.norm();

      double best = -std::numeric_limits<double>::infinity();
      int best_dy = 0, best_dx = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const double s = ncc(centered, a_norm, b.block(y0 + dy, x0 + dx, cfg.block, cfg.block));
          scores(dy + r, dx + r) = s;
          const bool closer = std::abs(dy) + std::abs(dx) < std::abs(best_dy) + std::abs(best_dx);
          if (s > best || (s == best && closer)) {
            best = s;
            best_dy = dy;
            best_dx = dx;
          }
        }
      }
      if (!std::isfinite(best)) continue;
      double sub_dy = 0.0, sub_dx = 0.0;
      const int cy = best_dy + r, cx = best_dx + r;
      // A perfect match is already exact at the integer shift.
      const bool exact = best >= 1.0 - 1e-12;
      if (!exact && cy > 0 && cy < side - 1) sub_dy = parabolic_offset(scores(cy - 1, cx), best, scores(cy + 1, cx));
      if (!exact && cx > 0 && cx < side - 1) sub_dx = parabolic_offset(scores(cy, cx - 1), best, scores(cy, cx + 1));
      out.block_dy(u, v) = best_dy + sub_dy;
      out.block_dx(u, v) = best_dx + sub_dx;
      out.block_score(u, v) = best;
      valid(u, v) = true;
    }
  }

  auto valid_y = valid;
  const bool any_x = fill_invalid(out.block_dx, valid);
  const bool any_y = fill_invalid(out.block_dy, valid_y);
  if (!any_x || !any_y) {
    out.velocity = VelocityField::zero(g);
    out.degenerate = true;
    out.warning = "no block had enough texture to match; velocity set to zero";
    return out;
  }

  const double sigma_blocks = cfg.smooth_sigma / stride;
  const Eigen::MatrixXd sdx = gaussian_smooth(out.block_dx, sigma_blocks);
  const Eigen::MatrixXd sdy = gaussian_smooth(out.block_dy, sigma_blocks);

  const double half = 0.5 * (cfg.block - 1);
  out.velocity = VelocityField::zero(g);
  for (int j = 0; j < g.n1; ++j) {
    const double v = (j - (xs.front() + half)) / stride;
    for (int i = 0; i < g.n2; ++i) {
      const double u = (i - (ys.front() + half)) / stride;
      const int p = j * g.n2 + i;
      out.velocity.vx[p] = bilinear(sdx, u, v) / g.n1;
      out.velocity.vy[p] = bilinear(sdy, u, v) / g.n2;
    }
  }
  return out;
}

Field deformation_diffusivity(const VelocityField& vel, double delta_x, double delta_y) {
  if (!(delta_x > 0.0 && delta_y > 0.0)) throw ConfigError("diffusivity resolution must be positive");
  const Gradient gx = finite_difference_gradient(Field(vel.grid, vel.vx), false);
  const Gradient gy = finite_difference_gradient(Field(vel.grid, vel.vy), false);
  const Eigen::ArrayXd tension = gx.dx.array() - gy.dy.array();
  const Eigen::ArrayXd shear = gx.dy.array() + gy.dx.array();
  Field d(vel.grid);
  d.values = 0.28 * delta_x * delta_y * (tension.square() + shear.square()).sqrt();
  return d;
}

DiffusivityField diffusivity_from_velocity(const VelocityField& vel, double delta_x, double delta_y) {
  return DiffusivityField::from_scalar(deformation_diffusivity(vel, delta_x, delta_y), false);
}

} // namespace flipst
