#include "flipst/galerkin.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

#include "flipst/error.hpp"

namespace flipst {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ConfigError(std::string(what) + ": grid mismatch");
}

struct ModeTerms {
  double vk;   // v . k~
  double kdk;  // k~^T D k~
  double divk; // (div D) . k~
};

ModeTerms terms_at(int p, Wavenumber k, const VelocityField& vel, const DiffusivityField& dif) {
  const double a = two_pi * k.k1;
  const double b = two_pi * k.k2;
  return {vel.vx[p] * a + vel.vy[p] * b,
          a * a * dif.dxx[p] + a * b * (dif.dxy[p] + dif.dyx[p]) + b * b * dif.dyy[p],
          dif.div_dx[p] * a + dif.div_dy[p] * b};
}

// A applied to cos_k (trial_sin = false) or sin_k (trial_sin = true) at one point.
double operator_image(bool trial_sin, const ModeTerms& t, double c, double s) {
  if (!trial_sin) return t.vk * s - t.kdk * c - t.divk * s;
  return -t.vk * c - t.kdk * s + t.divk * c;
}

} // namespace

VelocityField VelocityField::zero(GridSpec g) { return constant(g, 0.0, 0.0); }

VelocityField VelocityField::constant(GridSpec g, double vx, double vy) {
  return {g, Eigen::VectorXd::Constant(g.size(), vx), Eigen::VectorXd::Constant(g.size(), vy)};
}

DiffusivityField DiffusivityField::zero(GridSpec g) { return isotropic(g, 0.0); }

DiffusivityField DiffusivityField::isotropic(GridSpec g, double d) {
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(g.size());
  const Eigen::VectorXd dd = Eigen::VectorXd::Constant(g.size(), d);
  return {g, dd, z, z, dd, z, z};
}

Gradient finite_difference_gradient(const Field& f, bool periodic) {
  const GridSpec g = f.grid;
  Gradient out{Eigen::VectorXd(g.size()), Eigen::VectorXd(g.size())};
  const double hx = 1.0 / g.n1;
  const double hy = 1.0 / g.n2;
  for (int j = 0; j < g.n1; ++j) {
    for (int i = 0; i < g.n2; ++i) {
      const int p = j * g.n2 + i;
      if (periodic) {
        const int jp = (j + 1) % g.n1, jm = (j + g.n1 - 1) % g.n1;
        const int ip = (i + 1) % g.n2, im = (i + g.n2 - 1) % g.n2;
        out.dx[p] = (f.at(i, jp) - f.at(i, jm)) / (2 * hx);
        out.dy[p] = (f.at(ip, j) - f.at(im, j)) / (2 * hy);
        continue;
      }
      if (j == 0) out.dx[p] = (f.at(i, 1) - f.at(i, 0)) / hx;
      else if (j == g.n1 - 1) out.dx[p] = (f.at(i, j) - f.at(i, j - 1)) / hx;
      else out.dx[p] = (f.at(i, j + 1) - f.at(i, j - 1)) / (2 * hx);
      if (i == 0) out.dy[p] = (f.at(1, j) - f.at(0, j)) / hy;
      else if (i == g.n2 - 1) out.dy[p] = (f.at(i, j) - f.at(i - 1, j)) / hy;
      else out.dy[p] = (f.at(i + 1, j) - f.at(i - 1, j)) / (2 * hy);
    }
  }
  return out;
}

DiffusivityField DiffusivityField::from_tensor(GridSpec g, Eigen::VectorXd dxx, Eigen::VectorXd dxy,
                                               Eigen::VectorXd dyy, bool periodic) {
  const Gradient gxx = finite_difference_gradient(Field(g, dxx), periodic);
  const Gradient gxy = finite_difference_gradient(Field(g, dxy), periodic);
  const Gradient gyy = finite_difference_gradient(Field(g, dyy), periodic);
  DiffusivityField out;
  out.grid = g;
  out.div_dx = gxx.dx + gxy.dy;
  out.div_dy = gxy.dx + gyy.dy;
  out.dyx = dxy;
  out.dxx = std::move(dxx);
  out.dxy = std::move(dxy);
  out.dyy = std::move(dyy);
  return out;
}

DiffusivityField DiffusivityField::from_scalar(const Field& d, bool periodic) {
  return from_tensor(d.grid, d.values, Eigen::VectorXd::Zero(d.grid.size()), d.values, periodic);
}

double psi_entry(PsiKind kind, Wavenumber k, Wavenumber k_test, const VelocityField& vel,
                 const DiffusivityField& dif) {
  require_grid(vel.grid, dif.grid, "psi_entry");
  const GridSpec g = vel.grid;
  const bool advection = kind == PsiKind::A1 || kind == PsiKind::A2 || kind == PsiKind::A3 ||
                         kind == PsiKind::A4;
  const bool trial_sin = kind == PsiKind::A2 || kind == PsiKind::A4 || kind == PsiKind::D2 ||
                         kind == PsiKind::D4;
  const bool test_sin = kind == PsiKind::A3 || kind == PsiKind::A4 || kind == PsiKind::D3 ||
                        kind == PsiKind::D4;
  double acc = 0.0;
  for (int j = 0; j < g.n1; ++j) {
    for (int i = 0; i < g.n2; ++i) {
      const int p = j * g.n2 + i;
      ModeTerms t = terms_at(p, k, vel, dif);
      if (advection) t.kdk = t.divk = 0.0;
      else t.vk = 0.0;
      const double th = mode_phase(k, i, j, g);
      const double th_test = mode_phase(k_test, i, j, g);
      const double test = test_sin ? std::sin(th_test) : std::cos(th_test);
      acc += operator_image(trial_sin, t, std::cos(th), std::sin(th)) * test;
    }
  }
  return acc / g.size();
}

double normalization_c(Wavenumber k, GridSpec g) {
  double acc = 0.0;
  for (int j = 0; j < g.n1; ++j) {
    for (int i = 0; i < g.n2; ++i) {
      const double c = std::cos(mode_phase(k, i, j, g));
      acc += c * c;
    }
  }
  return acc / g.size();
}

TransitionGenerator assemble_transition(const ModeOrdering& ord, const VelocityField& vel,
                                        const DiffusivityField& dif) {
  const GridSpec g = ord.grid();
  require_grid(g, vel.grid, "assemble_transition");
  require_grid(g, dif.grid, "assemble_transition");
  const int n = g.size();
  const int kdim = ord.size();

  // Unweighted test functions and operator images of the trial functions.
  Eigen::MatrixXd test(n, kdim);
  Eigen::MatrixXd image(n, kdim);
  for (int c = 0; c < kdim; ++c) {
    const auto& coef = ord[c];
    const bool is_sin = coef.branch == Branch::sin;
    for (int j = 0; j < g.n1; ++j) {
      for (int i = 0; i < g.n2; ++i) {
        const int p = j * g.n2 + i;
        const double th = mode_phase(coef.k, i, j, g);
        const double cs = std::cos(th), sn = std::sin(th);
        test(p, c) = is_sin ? sn : cs;
        image(p, c) = operator_image(is_sin, terms_at(p, coef.k, vel, dif), cs, sn);
      }
    }
  }

  Eigen::MatrixXd psi = (test.transpose() * image) / static_cast<double>(n);

  Eigen::VectorXd w(kdim), scale(kdim);
  for (int c = 0; c < kdim; ++c) {
    const auto& coef = ord[c];
    w[c] = coef.weight();
    const double ck = normalization_c(coef.k, g);
    assert(ck > 0.0);
    scale[c] = 1.0 / (w[c] * ck);
  }
  TransitionGenerator out{ord, scale.asDiagonal() * psi * w.asDiagonal()};
  if (!out.matrix.allFinite()) throw NumericalError("assemble_transition: non-finite entries");
  return out;
}

} // namespace flipst
