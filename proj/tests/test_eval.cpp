#include <doctest.h>

#include <random>
#include <sstream>

#include "flipst/error.hpp"
#include "flipst/eval.hpp"
#include "flipst/simulate.hpp"
#include "oracles.hpp"

using namespace flipst;

TEST_CASE("mae") {
  std::mt19937_64 rng(10);
  const GridSpec g{8, 8};
  const Field a = oracle::random_field(rng, g);
  const Field b = oracle::random_field(rng, g);
  CHECK(mae(a, a) == 0.0);
  CHECK(mae(a, Field(g, a.values.array() + 0.75)) == doctest::Approx(0.75));
  CHECK(std::abs(mae(a, b) - oracle::mae_loop(a, b)) <= 1e-12);

  // Inclusive bounds: x in {0.25, 0.375, 0.5}, y in {0.875}
  const Region r{"r", 0.25, 0.5, 0.875, 0.99};
  double s = 0.0;
  for (int j = 2; j <= 4; ++j) s += std::abs(a.at(7, j) - b.at(7, j));
  CHECK(mae(a, b, r) == doctest::Approx(s / 3.0));

  CHECK_THROWS_AS(mae(a, b, {"empty", 0.01, 0.1, 0.01, 0.1}), ConfigError);
  CHECK_THROWS_AS(mae(a, Field(GridSpec{4, 4})), ConfigError);
  CHECK_THROWS_AS(Region({"bad", 0.5, 0.4, 0.0, 1.0}).validate(), ConfigError);
}

TEST_CASE("flipping lowers the truncation error in a zero-signal boundary strip") {
  // Signal rests on the bottom edge and is zero along the top, so the
  // periodic extension jumps across the y seam.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridSpec g{32, 32};
  const Region strip{"top", 0.0, 0.99, 0.85, 0.99};
  for (int trial = 0; trial < 20; ++trial) {
    Field f(g);
    const double cx = u(rng), scale = 0.1 + 0.15 * u(rng), amp = 1.0 + 9.0 * u(rng), tilt = u(rng);
    for (int j = 0; j < g.n1; ++j) {
      for (int i = 0; i < g.n2; ++i) {
        const double x = g.x(j), y = g.y(i);
        if (y >= 0.8) continue;
        f.at(i, j) = amp * (std::exp(-std::pow(x - cx, 2) / (2 * scale * scale)) + tilt) * (0.8 - y);
      }
    }
    const int k = 20 + 10 * (trial % 5);
    const double direct = gibbs_energy(f, strip, k, false);
    const double flipped = gibbs_energy(f, strip, k, true);
    CHECK(flipped < direct);
  }
}

TEST_CASE("exact zero-noise models reproduce the data") {
  SimulationConfig cfg;
  cfg.grid = {8, 8};
  cfg.steps = 9;
  cfg.noise_alpha = cfg.noise_beta = 0.0;
  const auto sim = simulate_advection(cfg);
  const Physics phys = Physics::uniform(cfg.grid, cfg.vx, cfg.vy, 0.0);

  ComparisonOptions opts;
  opts.run.train_steps = 6;
  opts.run.estimate = false;
  opts.run.noise = {1e-12, 1.0, 1e-12};
  opts.eval_times = {2, 5, 6, 8};
  const std::vector<ModelSpec> specs{{.label = "NF64", .k = 64}, {.label = "F256", .flip = true, .k = 256}};
  const auto report = run_comparison(sim.frames, phys, specs, opts);
  CHECK(report.rows.size() == 8);
  for (const auto& row : report.rows) CHECK(row.mae <= 1e-6);
  CHECK(report.at("F256", "domain", 8) <= 1e-6);
  CHECK_THROWS_AS(report.at("F256", "domain", 7), ConfigError);

  std::ostringstream a, b;
  write_csv(a, report);
  write_csv(b, run_comparison(sim.frames, phys, specs, opts));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("model,region,time,mae\n", 0) == 0);

  opts.eval_times = {9};
  CHECK_THROWS_AS(run_comparison(sim.frames, phys, specs, opts), ConfigError);
  opts.eval_times = {3};
  try {
    run_comparison(sim.frames, phys, {{.label = "broken", .k = 0}}, opts);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
}

TEST_CASE("windowed models are scored against the unwindowed truth") {
  SimulationConfig cfg;
  cfg.grid = {16, 16};
  cfg.steps = 6;
  cfg.noise_alpha = cfg.noise_beta = 0.0;
  const auto sim = simulate_advection(cfg);
  ComparisonOptions opts;
  opts.run.train_steps = 5;
  opts.run.estimate = false;
  opts.run.noise = {1e-10, 1.0, 1e-10};
  opts.eval_times = {4};
  const Region bottom{"bottom", 0.0, 0.99, 0.0, 0.05};
  opts.regions = {bottom};
  const auto report = run_comparison(sim.frames, Physics::uniform(cfg.grid, cfg.vx, 0, 0),
                                     {{.label = "NF", .k = 256}, {.label = "HW", .window = true, .k = 256}}, opts);
  CHECK(report.at("NF", "bottom", 4) < 1e-6);
  // The window pulls the edge rows toward 0.08 of their value.
  CHECK(report.at("HW", "bottom", 4) > 0.05 * sim.frames[4].values.maxCoeff());
}
