#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flipst/config.hpp"
#include "flipst/error.hpp"
#include "flipst/eval.hpp"
#include "flipst/io.hpp"
#include "flipst/motion.hpp"
#include "flipst/pipeline.hpp"
#include "flipst/preprocess.hpp"
#include "flipst/simulate.hpp"

#ifndef FLIPST_VERSION
#define FLIPST_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flipst;

namespace {

struct Options {
  std::string command;
  std::string config = "exampleI";
  std::string out;
  std::string input;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<bool> flip;
  std::optional<bool> window;
  std::optional<int> steps;
  std::optional<int> horizon;
  std::string region;
  std::string scale;
};

struct Dataset {
  std::vector<Field> frames;
  std::string units;
  double delta = 1.0;
};

struct Context {
  Options opt;
  RunConfig cfg;
  std::string hash;
  fs::path out;
  json outputs = json::array();
  std::vector<std::string> warnings;
};

std::vector<double> split_numbers(const std::string& s, size_t expected, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": '" + cell + "' is not a number");
    }
  }
  if (v.size() != expected) {
    throw ConfigError(std::string(what) + " expects " + std::to_string(expected) + " comma-separated numbers");
  }
  return v;
}

RunConfig resolve_config(const Options& o) {
  RunConfig c = load_config(o.config);
  if (o.seed) {
    c.simulation.seed = *o.seed;
    c.storm.seed = *o.seed;
  }
  if (o.steps) {
    c.simulation.steps = *o.steps;
    c.storm.steps = *o.steps;
  }
  if (o.horizon) c.horizon = *o.horizon;
  if (o.k || o.flip || o.window) {
    // A single ad-hoc model replaces the configured list.
    ModelSpec m;
    m.flip = o.flip.value_or(false);
    m.window = o.window.value_or(false);
    m.k = o.k.value_or(m.flip ? 400 : 100);
    m.label = std::string(m.window ? "HW" : "") + (m.flip ? "F" : "NF") + std::to_string(m.k);
    c.models = {m};
  }
  if (!o.region.empty()) {
    const auto r = split_numbers(o.region, 4, "--region");
    c.regions = {{"region", r[0], r[1], r[2], r[3]}};
  }
  c.validate();
  return c;
}

Dataset load_dataset(Context& ctx) {
  Dataset d;
  const RunConfig& c = ctx.cfg;
  if (!ctx.opt.input.empty()) {
    GridStack s = load_stack(ctx.opt.input);
    d.frames = std::move(s.frames);
    d.units = s.manifest.units;
    d.delta = s.manifest.delta;
  } else if (c.dataset == DatasetKind::storm) {
    d.frames = simulate_storm(c.storm);
    d.units = "dBZ";
  } else {
    d.frames = simulate_advection(c.simulation).frames;
    d.units = "arbitrary";
    d.delta = c.simulation.delta;
  }
  return d;
}

// Model-ready frames: dBZ data are converted only when the config asks for it.
Dataset model_dataset(Context& ctx) {
  Dataset d = load_dataset(ctx);
  if (d.units == "dBZ") {
    if (ctx.cfg.to_rain) {
      for (auto& f : d.frames) f = reflectivity_to_rain(f);
      d.units = "mm/hr";
    } else {
      ctx.warnings.push_back("modelling dBZ values directly; set to_rain or run convert first");
    }
  }
  return d;
}

Physics physics_for(Context& ctx, const Dataset& d) {
  std::string warning;
  Physics p = resolve_physics(ctx.cfg, d.frames, &warning);
  if (!warning.empty()) ctx.warnings.push_back(warning);
  return p;
}

RunOptions run_options(const RunConfig& c) {
  RunOptions r;
  r.train_steps = c.train_steps;
  r.horizon = c.horizon;
  r.estimate = c.estimate;
  r.estimation = c.estimation;
  r.noise = c.noise;
  return r;
}

json noise_json(const NoiseParams& n) {
  return {{"sigma2_alpha", n.sigma2_alpha}, {"sigma2_beta", n.sigma2_beta}, {"sigma2_obs", n.sigma2_obs}};
}

void save(Context& ctx, const std::string& name, std::vector<Field> frames, const std::string& units,
          double delta) {
  const fs::path dir = ctx.out / (name + "_" + ctx.hash);
  GridStack s;
  s.manifest.units = units;
  s.manifest.delta = delta;
  s.manifest.config_hash = ctx.hash;
  s.frames = std::move(frames);
  save_stack(dir, std::move(s));
  ctx.outputs.push_back(dir.string());
}

void write_text(Context& ctx, const std::string& filename, const std::string& text) {
  const fs::path p = ctx.out / filename;
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
  ctx.outputs.push_back(p.string());
}

void cmd_simulate(Context& ctx) {
  Dataset d = load_dataset(ctx);
  save(ctx, "simulate", std::move(d.frames), d.units, d.delta);
}

void cmd_convert(Context& ctx) {
  Dataset d = load_dataset(ctx);
  if (d.units != "dBZ") throw ConfigError("convert expects a dBZ stack, got units '" + d.units + "'");
  for (auto& f : d.frames) f = reflectivity_to_rain(f);
  save(ctx, "rain", std::move(d.frames), "mm/hr", d.delta);
}

void cmd_flip(Context& ctx) {
  Dataset d = load_dataset(ctx);
  const FlipVariant v = ctx.cfg.models.empty() ? FlipVariant{} : ctx.cfg.models.front().variant;
  for (auto& f : d.frames) f = flip_field(f, v);
  save(ctx, "flip", std::move(d.frames), d.units, d.delta);
}

void cmd_velocity(Context& ctx) {
  Dataset d = model_dataset(ctx);
  const Physics p = physics_for(ctx, d);
  const GridSpec g = p.velocity.grid;
  std::vector<Field> frames{Field(g, p.velocity.vx), Field(g, p.velocity.vy), Field(g, p.diffusivity.dxx)};
  const Eigen::VectorXd speed = (p.velocity.vx.array().square() + p.velocity.vy.array().square()).sqrt();
  save(ctx, "velocity", std::move(frames), "vx,vy,diffusivity", p.delta);
  const json summary = {{"speed_min", speed.minCoeff()},
                        {"speed_max", speed.maxCoeff()},
                        {"diffusivity_max", p.diffusivity.dxx.maxCoeff()},
                        {"frames", {"vx", "vy", "diffusivity"}}};
  write_text(ctx, "velocity_" + ctx.hash + ".json", summary.dump(2) + "\n");
}

void cmd_fit(Context& ctx) {
  Dataset d = model_dataset(ctx);
  const Physics p = physics_for(ctx, d);
  json fits = json::array();
  for (const auto& spec : ctx.cfg.models) {
    RunOptions r = run_options(ctx.cfg);
    r.estimate = true;
    r.horizon = 0;
    const ModelRun run = run_model(spec, p, d.frames, r);
    if (!run.estimate->converged) ctx.warnings.push_back(spec.label + ": variance search hit its budget");
    fits.push_back({{"model", spec.label},
                    {"noise", noise_json(run.noise)},
                    {"loglik", run.estimate->loglik},
                    {"evaluations", run.estimate->evaluations},
                    {"converged", run.estimate->converged}});
  }
  write_text(ctx, "fit_" + ctx.hash + ".json", fits.dump(2) + "\n");
}

void cmd_filter_or_predict(Context& ctx, bool predict) {
  Dataset d = model_dataset(ctx);
  const Physics p = physics_for(ctx, d);
  RunOptions r = run_options(ctx.cfg);
  if (!predict) r.horizon = 0;
  if (predict && r.horizon < 1) throw ConfigError("predict needs --horizon >= 1");
  for (const auto& spec : ctx.cfg.models) {
    ModelRun run = run_model(spec, p, d.frames, r);
    std::vector<Field> fields(run.fields.begin() + (predict ? r.train_steps : 0), run.fields.end());
    save(ctx, std::string(predict ? "predict_" : "filter_") + spec.label, std::move(fields), d.units, d.delta);
  }
}

void cmd_evaluate(Context& ctx) {
  Dataset d = model_dataset(ctx);
  const Physics p = physics_for(ctx, d);
  ComparisonOptions co;
  co.run = run_options(ctx.cfg);
  co.eval_times = ctx.cfg.eval_times;
  co.regions = ctx.cfg.regions;
  if (co.eval_times.empty()) throw ConfigError("evaluate needs eval_times in the config");
  const ComparisonReport report = run_comparison(d.frames, p, ctx.cfg.models, co);
  std::ostringstream csv;
  write_csv(csv, report);
  write_text(ctx, "mae_" + ctx.hash + ".csv", csv.str());

  std::ostringstream summary;
  char buf[160];
  summary << "config " << ctx.hash << "\n";
  for (const auto& run : report.runs) {
    std::snprintf(buf, sizeof buf, "%-8s k=%-4d s2_alpha=%.4g s2_beta=%.4g s2_obs=%.4g loglik=%.6g\n",
                  run.spec.label.c_str(), run.spec.k, run.noise.sigma2_alpha, run.noise.sigma2_beta,
                  run.noise.sigma2_obs, run.loglik);
    summary << buf;
  }
  for (const auto& region : co.regions) {
    summary << "\nMAE region " << region.name << "\ntime";
    for (const auto& spec : ctx.cfg.models) summary << '\t' << spec.label;
    summary << '\n';
    for (int t : co.eval_times) {
      summary << t;
      for (const auto& spec : ctx.cfg.models) {
        std::snprintf(buf, sizeof buf, "\t%.4f", report.at(spec.label, region.name, t));
        summary << buf;
      }
      summary << '\n';
    }
  }
  write_text(ctx, "summary_" + ctx.hash + ".txt", summary.str());
  std::cout << summary.str();
}

void cmd_render(Context& ctx) {
  if (ctx.opt.input.empty()) throw ConfigError("render needs --input DIR");
  const GridStack s = load_stack(ctx.opt.input);
  ColorScale cs{};
  if (!ctx.opt.scale.empty()) {
    const auto v = split_numbers(ctx.opt.scale, 2, "--scale");
    cs = {v[0], v[1]};
  } else {
    cs = {s.frames.front().values.minCoeff(), s.frames.front().values.maxCoeff()};
    for (const auto& f : s.frames) {
      cs.min = std::min(cs.min, f.values.minCoeff());
      cs.max = std::max(cs.max, f.values.maxCoeff());
    }
  }
  const fs::path dir = ctx.out / ("render_" + ctx.hash);
  fs::create_directories(dir);
  for (size_t t = 0; t < s.frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.pgm", t);
    render_heatmap(s.frames[t], dir / name, cs);
  }
  ctx.outputs.push_back(dir.string());
}

int execute(const Options& o) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{o, resolve_config(o), {}, fs::path(o.out), json::array(), {}};
  ctx.hash = hash_hex(config_hash(ctx.cfg));
  fs::create_directories(ctx.out);

  if (o.command == "simulate") cmd_simulate(ctx);
  else if (o.command == "convert") cmd_convert(ctx);
  else if (o.command == "flip") cmd_flip(ctx);
  else if (o.command == "velocity") cmd_velocity(ctx);
  else if (o.command == "fit") cmd_fit(ctx);
  else if (o.command == "filter") cmd_filter_or_predict(ctx, false);
  else if (o.command == "predict") cmd_filter_or_predict(ctx, true);
  else if (o.command == "evaluate") cmd_evaluate(ctx);
  else if (o.command == "render") cmd_render(ctx);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& w : ctx.warnings) std::cerr << "warning: " << w << "\n";
  const json log = {{"command", o.command},
                    {"version", FLIPST_VERSION},
                    {"config_hash", ctx.hash},
                    {"config", config_to_json(ctx.cfg)},
                    {"input", o.input},
                    {"outputs", ctx.outputs},
                    {"warnings", ctx.warnings},
                    {"started", utc_now()},
                    {"wall_time_s", wall}};
  std::ofstream(ctx.out / ("run_" + o.command + "_" + ctx.hash + ".json")) << log.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral spatio-temporal modelling with mirror flipping"};
  app.set_version_flag("--version", FLIPST_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "preset name (exampleI, table1, fig9, storm) or JSON file");
  app.add_option("--out", o.out, "output directory")->required();
  app.add_option("--input", o.input, "GridStack directory to use instead of generated data");
  app.add_option("--seed", o.seed, "random seed for generated data");
  app.add_option("--k", o.k, "retained coefficients of a single ad-hoc model");
  app.add_option("--flip", o.flip, "ad-hoc model uses the flipped domain");
  app.add_option("--window", o.window, "ad-hoc model applies the Hamming window");
  app.add_option("--steps", o.steps, "generated time steps");
  app.add_option("--horizon", o.horizon, "forecast steps");
  app.add_option("--region", o.region, "evaluation region x0,x1,y0,y1");
  app.add_option("--scale", o.scale, "render colour range min,max");

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "generate the configured dataset as a GridStack"},
      {"convert", "dBZ stack to rain rate (mm/hr)"},
      {"flip", "double mirror extension of every frame"},
      {"velocity", "block-matching velocity and diffusivity fields"},
      {"fit", "maximum likelihood noise variances per model"},
      {"filter", "filtered fields over the training window"},
      {"predict", "forecast fields after the training window"},
      {"evaluate", "MAE comparison of the configured models"},
      {"render", "PGM heatmaps of a stack"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&o, n = name] { o.command = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    return execute(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
