#include <doctest.h>

#include "flipst/error.hpp"
#include "flipst/kalman.hpp"
#include "flipst/preprocess.hpp"
#include "flipst/simulate.hpp"
#include "oracles.hpp"

using namespace flipst;

TEST_CASE("forcing field") {
  SimulationConfig cfg;
  const Field q = forcing_field(cfg);
  CHECK(q.at(0, 10) == doctest::Approx(3.0 / (2.0 * std::numbers::pi * 0.18 * 0.18)));
  CHECK(q.at(0, 10) == doctest::Approx(14.7366).epsilon(1e-4));
  CHECK(q.values.maxCoeff() == q.at(0, 10));
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 30; ++j) {
      const double x = cfg.grid.x(j) - 0.1, y = -cfg.grid.y(i);
      const double mirrored = cfg.source_amplitude * std::exp(-(x * x + y * y) / (2 * 0.18 * 0.18));
      CHECK(q.at(i, j) == doctest::Approx(mirrored).epsilon(1e-14));
    }
  }
  cfg.source_amplitude = 0.0;
  CHECK(forcing_field(cfg).values.isZero(0.0));
}

TEST_CASE("noiseless still source accumulates") {
  SimulationConfig cfg;
  cfg.grid = {16, 12};
  cfg.steps = 3;
  cfg.vx = 0.0;
  cfg.noise_alpha = cfg.noise_beta = 0.0;
  const auto sim = simulate_advection(cfg);
  const Field q = forcing_field(cfg);
  for (int t = 0; t < 3; ++t) CHECK((sim.frames[t].values - (t + 1) * q.values).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("noiseless advection against a semi-Lagrangian solver") {
  SimulationConfig cfg;
  cfg.grid = {32, 32};
  cfg.steps = 11;
  cfg.noise_alpha = cfg.noise_beta = 0.0;
  const auto sim = simulate_advection(cfg);
  const Eigen::MatrixXd q = forcing_field(cfg).image();
  Eigen::MatrixXd xi = q;
  for (int t = 1; t <= 10; ++t) xi = oracle::semi_lagrangian_step(xi, q, cfg.vx);
  const double peak = xi.cwiseAbs().maxCoeff();
  const double err = (sim.frames[10].image() - xi).cwiseAbs().mean();
  CHECK(err <= 0.02 * peak);
}

TEST_CASE("seeded runs are reproducible and noise only reaches the requested modes") {
  SimulationConfig cfg;
  cfg.grid = {16, 16};
  cfg.steps = 5;
  const auto a = simulate_advection(cfg);
  const auto b = simulate_advection(cfg);
  for (int t = 0; t < 5; ++t) CHECK(a.alpha[t] == b.alpha[t]);
  cfg.seed += 1;
  CHECK(simulate_advection(cfg).alpha[4] != a.alpha[4]);

  cfg.noise_modes = 10;
  const auto c = simulate_advection(cfg);
  cfg.noise_alpha = cfg.noise_beta = 0.0;
  const auto clean = simulate_advection(cfg);
  const auto kept = ModeOrdering::truncated(cfg.grid, 10);
  for (int idx = 0; idx < c.ordering.size(); ++idx) {
    const auto& coef = c.ordering[idx];
    const bool noisy = kept.index_of(coef.k, coef.branch).has_value();
    const double diff = std::abs(c.alpha[4][idx] - clean.alpha[4][idx]);
    if (noisy) CHECK(diff > 0.0);
    else CHECK(diff < 1e-12);
  }
  cfg.noise_modes = -1;
  CHECK_THROWS_AS(simulate_advection(cfg), ConfigError);
}

TEST_CASE("the filter with the generating model has vanishing innovations on clean data") {
  SimulationConfig cfg;
  cfg.grid = {12, 12};
  cfg.steps = 8;
  cfg.noise_alpha = cfg.noise_beta = 0.0;
  const auto sim = simulate_advection(cfg);
  const UniformPropagator prop(sim.ordering, cfg.vx, cfg.vy, 0.0, 1.0);
  const auto m = make_coefficient_model({1.0, prop.matrix()}, Eigen::MatrixXd(), {1e-14, 1e-14, 0.0});
  const auto r = kf_filter(m, sim.alpha, {sim.alpha[0], Eigen::VectorXd::Zero(sim.ordering.size())},
                           Eigen::MatrixXd::Identity(m.state_dim(), m.state_dim()));
  for (size_t t = 3; t < r.innovations.size(); ++t) CHECK(r.innovations[t].cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("Example-I mass drifts right along the bottom edge") {
  SimulationConfig cfg;
  cfg.noise_modes = 100;
  const auto sim = simulate_advection(cfg);
  CHECK(sim.frames.size() == 30);
  auto bottom_centroid = [&](const Field& f) {
    double m = 0.0, mx = 0.0;
    for (int j = 0; j < 100; ++j) {
      for (int i = 0; i < 20; ++i) {
        const double v = std::max(f.at(i, j), 0.0);
        m += v;
        mx += v * f.grid.x(j);
      }
    }
    return mx / m;
  };
  CHECK(bottom_centroid(sim.frames[10]) > bottom_centroid(sim.frames[0]));
  CHECK(bottom_centroid(sim.frames[29]) > bottom_centroid(sim.frames[10]));
}

TEST_CASE("storm stack enters from the low-x high-y corner") {
  StormConfig cfg;
  const auto frames = simulate_storm(cfg);
  CHECK(frames.size() == 8);
  auto rainy = [](const Field& f, bool upper_left) {
    int count = 0;
    for (int j = 0; j < f.grid.n1; ++j) {
      for (int i = 0; i < f.grid.n2; ++i) {
        const bool ul = f.grid.x(j) < 0.5 && f.grid.y(i) >= 0.5;
        if (ul == upper_left && reflectivity_to_rain(f.at(i, j)) > 0.5) ++count;
      }
    }
    return count;
  };
  CHECK(rainy(frames[0], true) > 0);
  CHECK(rainy(frames[7], true) > rainy(frames[0], true));
  for (const auto& f : frames) CHECK(f.finite());
  // The opposite quadrant stays dry.
  int wet = 0;
  for (const auto& f : frames)
    for (int j = 50; j < 100; ++j)
      for (int i = 0; i < 50; ++i) wet += reflectivity_to_rain(f.at(i, j)) > 0.5;
  CHECK(wet == 0);
}
