#include "flipst/pipeline.hpp"

#include <string>

#include "flipst/dynamics.hpp"
#include "flipst/error.hpp"

namespace flipst {

void ModelSpec::validate() const {
  if (k < 1) throw ConfigError("model " + label + ": k must be positive");
  if (k_original < 0) throw ConfigError("model " + label + ": k_original must be >= 0");
  if (flip && original_budget() < 1) throw ConfigError("model " + label + ": original budget is empty");
}

Physics Physics::uniform(GridSpec g, double vx, double vy, double d, double delta) {
  return {VelocityField::constant(g, vx, vy), DiffusivityField::isotropic(g, d), delta};
}

BuiltModel build_model(const ModelSpec& spec, const Physics& physics, NoiseParams noise) {
  spec.validate();
  const GridSpec g = physics.velocity.grid;
  g.validate();
  BuiltModel out{spec, g, {}, std::nullopt, {}};
  if (!spec.flip) {
    out.obs_ordering = ModeOrdering::truncated(g, spec.k);
    const TransitionGenerator p = assemble_transition(out.obs_ordering, physics.velocity, physics.diffusivity);
    out.model = make_coefficient_model(build_transition(p, physics.delta), {}, noise, spec.diagonal_noise);
    return out;
  }
  const ModeOrdering original = ModeOrdering::truncated(g, spec.original_budget());
  out.obs_ordering = ModeOrdering::truncated(g.doubled(), spec.k);
  out.transfer = flip_transfer(original, out.obs_ordering, spec.variant);
  const TransitionGenerator p = assemble_transition(original, physics.velocity, physics.diffusivity);
  const TransitionGenerator p_star = flipped_generator(p, *out.transfer);
  out.model = make_coefficient_model(build_transition(p_star, physics.delta), out.transfer->h, noise,
                                     spec.diagonal_noise);
  return out;
}

Eigen::VectorXd observe(const BuiltModel& m, const Field& frame) {
  if (!(frame.grid == m.grid)) throw ConfigError("model " + m.spec.label + ": frame grid mismatch");
  Field f = m.spec.window ? apply_window(frame, hamming2d(m.grid, m.spec.window_form)) : frame;
  if (m.spec.flip) f = flip_field(f, m.spec.variant);
  return analyze(f, m.obs_ordering).alpha;
}

Field reconstruct(const BuiltModel& m, const Eigen::VectorXd& alpha) {
  const Field f = synthesize({m.obs_ordering, alpha});
  return m.spec.flip ? unflip(f, m.spec.variant) : f;
}

ModelRun run_model(const ModelSpec& spec, const Physics& physics, const std::vector<Field>& frames,
                   const RunOptions& opts) {
  auto tagged = [&](const std::string& what) { return "model " + spec.label + ": " + what; };
  if (opts.train_steps < 1 || static_cast<size_t>(opts.train_steps) > frames.size()) {
    throw ConfigError(tagged("train_steps " + std::to_string(opts.train_steps) + " exceeds the " +
                             std::to_string(frames.size()) + " available frames"));
  }
  if (opts.horizon < 0) throw ConfigError(tagged("horizon must be >= 0"));
  try {
    BuiltModel built = build_model(spec, physics, opts.noise);
    std::vector<Eigen::VectorXd> obs;
    obs.reserve(opts.train_steps);
    for (int t = 0; t < opts.train_steps; ++t) obs.push_back(observe(built, frames[t]));

    const Eigen::Index k = built.model.alpha_dim();
    const AugmentedState init{obs.front(), Eigen::VectorXd::Zero(k)};

    ModelRun run{spec, opts.noise, std::nullopt, 0.0, {}};
    if (opts.estimate) {
      run.estimate = estimate_variances(built.model, obs, init, opts.estimation);
      run.noise = run.estimate->params;
    }
    built.model.noise = run.noise;
    const double scale = opts.estimate ? opts.estimation.init_cov_scale : 10.0;
    const FilterResult fr = kf_filter(built.model, obs, init,
                                      initial_covariance(built.model.state_dim(), run.noise, scale),
                                      {.store_covariances = false, .store_innovations = false});
    run.loglik = fr.loglik;
    for (const auto& s : fr.means) run.fields.push_back(reconstruct(built, s.alpha));
    if (opts.horizon > 0) {
      const Forecast fc = kf_forecast(built.model, fr.last_mean, fr.last_cov, opts.horizon);
      for (const auto& s : fc.means) run.fields.push_back(reconstruct(built, s.alpha));
    }
    return run;
  } catch (const ConfigError& e) {
    throw ConfigError(tagged(e.what()));
  } catch (const NumericalError& e) {
    throw NumericalError(tagged(e.what()));
  }
}

} // namespace flipst
