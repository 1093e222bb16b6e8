#include <doctest.h>

#include <algorithm>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "flipst/dynamics.hpp"
#include "flipst/error.hpp"
#include "oracles.hpp"

using namespace flipst;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n, double norm) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(n, n);
  for (auto& v : a.reshaped()) v = n01(rng);
  return a * (norm / a.cwiseAbs().colwise().sum().maxCoeff());
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / b.norm();
}

struct SmoothPhysics {
  VelocityField vel;
  DiffusivityField dif;
};

SmoothPhysics random_physics(GridSpec g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), e = u(rng);
  VelocityField vel = VelocityField::zero(g);
  Field dscalar(g);
  for (int j = 0; j < g.n1; ++j) {
    for (int i = 0; i < g.n2; ++i) {
      const double x = g.x(j), y = g.y(i);
      const int p = j * g.n2 + i;
      vel.vx[p] = 0.02 * (a + 0.5 * std::sin(oracle::two_pi * y + b));
      vel.vy[p] = 0.02 * (c + 0.5 * std::cos(oracle::two_pi * x + d));
      dscalar.values[p] = 1e-3 * (1.5 + std::sin(oracle::two_pi * (x + y) + e));
    }
  }
  return {vel, DiffusivityField::from_scalar(dscalar, false)};
}

} // namespace

TEST_CASE("matrix exponential closed forms") {
  CHECK(matrix_exp(Eigen::MatrixXd::Zero(5, 5)).isIdentity(0.0));
  for (double w : {0.3, 2.0, 17.0}) {
    Eigen::MatrixXd a(2, 2);
    a << 0, -w, w, 0;
    Eigen::MatrixXd r(2, 2);
    r << std::cos(w), -std::sin(w), std::sin(w), std::cos(w);
    CHECK((matrix_exp(a) - r).cwiseAbs().maxCoeff() < 1e-12);
  }
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(matrix_exp(bad), NumericalError);
}

TEST_CASE("matrix exponential against the Taylor oracle") {
  std::mt19937_64 rng(17);
  for (int n : {1, 3, 8, 20}) {
    for (double norm : {0.01, 1.0, 5.0}) {
      const Eigen::MatrixXd a = random_matrix(rng, n, norm);
      CHECK(rel_err(matrix_exp(a), oracle::taylor_expm(a)) <= 1e-10);
    }
  }
}

TEST_CASE("matrix exponential semigroup") {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXd a = random_matrix(rng, 10, 3.0);
  const Eigen::MatrixXd lhs = matrix_exp(1.7 * a);
  const Eigen::MatrixXd rhs = matrix_exp(0.5 * a) * matrix_exp(1.2 * a);
  CHECK(rel_err(lhs, rhs) < 1e-9);
}

TEST_CASE("augmented transition") {
  const auto ord = ModeOrdering::full({4, 4});
  const TransitionGenerator zero{ord, Eigen::MatrixXd::Zero(16, 16)};
  const auto t = build_transition(zero, 3.0);
  const Eigen::MatrixXd g = t.augmented();
  CHECK(g.topLeftCorner(16, 16).isIdentity(0.0));
  CHECK(g.topRightCorner(16, 16).isIdentity(0.0));
  CHECK(g.bottomLeftCorner(16, 16).isZero(0.0));
  CHECK(g.bottomRightCorner(16, 16).isIdentity(0.0));

  std::mt19937_64 rng(4);
  const TransitionGenerator p{ord, random_matrix(rng, 16, 1.0)};
  const auto tp = build_transition(p, 0.5);
  const AugmentedState s{Eigen::VectorXd::LinSpaced(16, -1, 1), Eigen::VectorXd::Constant(16, 0.25)};
  const AugmentedState s1 = step(tp, s);
  CHECK((s1.alpha - (tp.phi * s.alpha + s.beta)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(s1.beta == s.beta);
  CHECK((g * s.stacked()).isApprox(step(t, s).stacked()));

  const AugmentedState z2 = step(t, step(t, s));
  CHECK((z2.alpha - (s.alpha + 2 * s.beta)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(build_transition(p, 1e-300).phi.isIdentity(1e-12));
}

TEST_CASE("flipped generator: evolving then flipping equals flipping then evolving") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n01;
  for (const GridSpec g : {GridSpec{4, 4}, GridSpec{8, 8}}) {
    const auto ph = random_physics(g, rng);
    const auto ord = ModeOrdering::full(g);
    const auto ords = ModeOrdering::full(g.doubled());
    const auto p = assemble_transition(ord, ph.vel, ph.dif);
    const auto h = flip_transfer(ord, ords);
    CHECK((h.h_pinv * h.h - Eigen::MatrixXd::Identity(ord.size(), ord.size())).cwiseAbs().maxCoeff() < 1e-10);
    const auto ps = flipped_generator(p, h);
    CHECK(ps.matrix.rows() == ords.size());

    const Eigen::MatrixXd phi = matrix_exp(p.matrix);
    const Eigen::MatrixXd phis = matrix_exp(ps.matrix);
    Eigen::VectorXd a(ord.size());
    for (auto& v : a) v = n01(rng);
    Eigen::VectorXd as = h.h * a;
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      a = phi * a;
      as = phis * as;
      worst = std::max(worst, (h.h * a - as).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("flipped generator shares the spectrum of P on range(H)") {
  std::mt19937_64 rng(41);
  const GridSpec g{4, 4};
  const auto ph = random_physics(g, rng);
  const auto ord = ModeOrdering::full(g);
  const auto h = flip_transfer(ord, ModeOrdering::full(g.doubled()));
  const auto p = assemble_transition(ord, ph.vel, ph.dif);
  const Eigen::MatrixXd ps = flipped_generator(p, h).matrix;
  // Restrict to range(H) with an orthonormal basis Q: Q^T (H P H^+) Q.
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(h.h).householderQ() *
                            Eigen::MatrixXd::Identity(h.h.rows(), h.h.cols());
  const Eigen::MatrixXd restricted = q.transpose() * ps * q;
  auto sorted = [](Eigen::VectorXcd v) {
    std::vector<std::complex<double>> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](auto x, auto y) {
      return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return out;
  };
  const auto e1 = sorted(Eigen::EigenSolver<Eigen::MatrixXd>(p.matrix).eigenvalues());
  const auto e2 = sorted(Eigen::EigenSolver<Eigen::MatrixXd>(restricted).eigenvalues());
  REQUIRE(e1.size() == e2.size());
  for (size_t i = 0; i < e1.size(); ++i) CHECK(std::abs(e1[i] - e2[i]) < 1e-8);
  CHECK_THROWS_AS(flipped_generator({ModeOrdering::full({6, 6}), Eigen::MatrixXd::Zero(36, 36)}, h), ConfigError);
}

TEST_CASE("truncated flipped dynamics approach the exact ones as K grows") {
  std::mt19937_64 rng(43);
  const GridSpec g{8, 8};
  const auto ph = random_physics(g, rng);
  const auto full = ModeOrdering::full(g);
  const auto fulls = ModeOrdering::full(g.doubled());
  const auto hf = flip_transfer(full, fulls);
  const Eigen::MatrixXd phi = matrix_exp(assemble_transition(full, ph.vel, ph.dif).matrix);

  // Smooth initial field, exact reference evolution on the full flipped domain.
  Field f0(g);
  for (int j = 0; j < g.n1; ++j)
    for (int i = 0; i < g.n2; ++i) f0.at(i, j) = std::exp(-8.0 * (std::pow(g.x(j) - 0.4, 2) + std::pow(g.y(i) - 0.6, 2)));
  Eigen::VectorXd a = analyze(f0, full).alpha;
  for (int s = 0; s < 5; ++s) a = phi * a;
  const Eigen::VectorXd exact = hf.h * a;

  double prev = std::numeric_limits<double>::infinity();
  for (int k : {16, 36, 64}) {
    const auto ord = ModeOrdering::truncated(g, k);
    const auto ords = ModeOrdering::truncated(g.doubled(), 4 * k);
    const auto h = flip_transfer(ord, ords);
    const Eigen::MatrixXd phis = matrix_exp(flipped_generator(assemble_transition(ord, ph.vel, ph.dif), h).matrix);
    Eigen::VectorXd as = analyze(flip_field(f0), ords).alpha;
    for (int s = 0; s < 5; ++s) as = phis * as;
    const double err = (restrict_coefficients(as, ords, fulls) - exact).norm();
    CHECK(err < prev);
    prev = err;
  }
}
