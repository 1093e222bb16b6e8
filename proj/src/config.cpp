#include "flipst/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <set>

#include "flipst/error.hpp"

namespace flipst {
using nlohmann::json;

namespace {

// Reads keys of one JSON object into targets, rejecting anything unlisted.
class Reader {
public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  Reader& get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
    return *this;
  }

  template <typename F>
  Reader& with(const char* key, F&& f) {
    seen_.insert(key);
    if (j_.contains(key)) f(j_.at(key), where_ + "." + key);
    return *this;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename E>
E parse_enum(const json& j, const std::string& where, std::initializer_list<std::pair<const char*, E>> opts) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  const auto s = j.get<std::string>();
  std::string allowed;
  for (const auto& [name, value] : opts) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(where + ": '" + s + "' is not one of " + allowed);
}

const char* dataset_name(DatasetKind d) { return d == DatasetKind::storm ? "storm" : "simulation"; }

const char* physics_name(PhysicsSource p) {
  switch (p) {
  case PhysicsSource::uniform: return "uniform";
  case PhysicsSource::motion: return "motion";
  default: return "simulation";
  }
}

void read_grid(const json& j, const std::string& where, GridSpec& g) {
  Reader(j, where).get("n1", g.n1).get("n2", g.n2).finish();
}

void read_simulation(const json& j, const std::string& where, SimulationConfig& s) {
  Reader(j, where)
      .with("grid", [&](const json& v, const std::string& w) { read_grid(v, w, s.grid); })
      .get("steps", s.steps)
      .get("delta", s.delta)
      .get("vx", s.vx)
      .get("vy", s.vy)
      .get("diffusivity", s.diffusivity)
      .get("source_x", s.source_x)
      .get("source_y", s.source_y)
      .get("source_scale", s.source_scale)
      .get("source_amplitude", s.source_amplitude)
      .get("noise_alpha", s.noise_alpha)
      .get("noise_beta", s.noise_beta)
      .get("noise_modes", s.noise_modes)
      .get("seed", s.seed)
      .finish();
}

void read_storm(const json& j, const std::string& where, StormConfig& s) {
  Reader(j, where)
      .with("grid", [&](const json& v, const std::string& w) { read_grid(v, w, s.grid); })
      .get("steps", s.steps)
      .get("vx", s.vx)
      .get("vy", s.vy)
      .get("no_echo_dbz", s.no_echo_dbz)
      .get("noise_dbz", s.noise_dbz)
      .get("seed", s.seed)
      .finish();
}

FlipVariant read_variant(const json& j, const std::string& where) {
  FlipVariant v;
  Reader(j, where)
      .with("x", [&](const json& s, const std::string& w) {
        v.x = parse_enum<XAnchor>(s, w, {{"right", XAnchor::right}, {"left", XAnchor::left}});
      })
      .with("y", [&](const json& s, const std::string& w) {
        v.y = parse_enum<YAnchor>(s, w, {{"bottom", YAnchor::bottom}, {"top", YAnchor::top}});
      })
      .finish();
  return v;
}

ModelSpec read_model(const json& j, const std::string& where) {
  ModelSpec m;
  Reader(j, where)
      .get("label", m.label)
      .get("flip", m.flip)
      .get("window", m.window)
      .get("k", m.k)
      .get("k_original", m.k_original)
      .with("variant", [&](const json& v, const std::string& w) { m.variant = read_variant(v, w); })
      .with("window_form", [&](const json& v, const std::string& w) {
        m.window_form =
            parse_enum<HammingForm>(v, w, {{"printed", HammingForm::printed}, {"periodic", HammingForm::periodic}});
      })
      .get("diagonal_noise", m.diagonal_noise)
      .finish();
  if (m.label.empty()) throw ConfigError(where + ": label is required");
  return m;
}

Region read_region(const json& j, const std::string& where) {
  Region r;
  Reader(j, where).get("name", r.name).get("x0", r.x0).get("x1", r.x1).get("y0", r.y0).get("y1", r.y1).finish();
  return r;
}

std::vector<int> time_range(int first, int last) {
  std::vector<int> out;
  for (int t = first; t <= last; ++t) out.push_back(t);
  return out;
}

ModelSpec nf(int k) { return {.label = "NF" + std::to_string(k), .k = k}; }
ModelSpec hwnf(int k) { return {.label = "HWNF" + std::to_string(k), .window = true, .k = k}; }
ModelSpec flipped(int k_star) {
  return {.label = "F" + std::to_string(k_star), .flip = true, .k = k_star};
}

const Region top_strip{"top", 0.0, 0.99, 0.95, 0.99};

} // namespace

void RunConfig::validate() const {
  simulation.validate();
  storm.validate();
  motion.validate();
  noise.validate();
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (diffusivity < 0.0) throw ConfigError("diffusivity must be non-negative");
  if (motion_delta_x < 0.0 || motion_delta_y < 0.0) throw ConfigError("motion deltas must be >= 0");
  if (train_steps < 3) throw ConfigError("train_steps must be >= 3");
  if (horizon < 0) throw ConfigError("horizon must be >= 0");
  if (estimation.grid_log10.empty()) throw ConfigError("estimation.grid_log10 must not be empty");
  if (estimation.max_evaluations < 1) throw ConfigError("estimation.max_evaluations must be >= 1");
  if (!(estimation.floor > 0.0 && estimation.floor < estimation.ceiling)) {
    throw ConfigError("estimation bounds must satisfy 0 < floor < ceiling");
  }
  std::set<std::string> labels;
  for (const auto& m : models) {
    m.validate();
    if (!labels.insert(m.label).second) throw ConfigError("duplicate model label " + m.label);
  }
  std::set<std::string> names;
  for (const auto& r : regions) {
    r.validate();
    if (!names.insert(r.name).second) throw ConfigError("duplicate region name " + r.name);
  }
  for (int t : eval_times) {
    if (t < 0) throw ConfigError("eval_times must be >= 0");
  }
}

std::vector<std::string> preset_names() { return {"exampleI", "table1", "fig9", "storm"}; }

RunConfig preset(const std::string& name) {
  RunConfig c;
  // Example-I noise enters the K = 100 lowest coefficients.
  c.simulation.noise_modes = 100;
  if (name == "exampleI") {
    c.models = {nf(400), flipped(400)};
    c.eval_times = time_range(20, 29);
    c.regions = {Region::whole(), top_strip};
  } else if (name == "table1") {
    c.models = {hwnf(100), hwnf(196), hwnf(400), flipped(400)};
    c.eval_times = time_range(15, 20);
  } else if (name == "fig9") {
    c.models = {nf(100), nf(196), nf(400), flipped(400)};
    c.eval_times = time_range(11, 20);
    c.regions = {top_strip};
  } else if (name == "storm") {
    c.dataset = DatasetKind::storm;
    c.to_rain = true;
    c.physics = PhysicsSource::motion;
    c.models = {nf(100), flipped(400)};
    c.train_steps = 6;
    c.horizon = 2;
    c.eval_times = time_range(0, 7);
    c.regions = {{"quiet", 0.5, 0.99, 0.0, 0.49}};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return c;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig c = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : RunConfig{};
  Reader(j, "config")
      .with("preset", [](const json&, const std::string&) {})
      .with("dataset", [&](const json& v, const std::string& w) {
        c.dataset = parse_enum<DatasetKind>(v, w, {{"simulation", DatasetKind::simulation}, {"storm", DatasetKind::storm}});
      })
      .with("simulation", [&](const json& v, const std::string& w) { read_simulation(v, w, c.simulation); })
      .with("storm", [&](const json& v, const std::string& w) { read_storm(v, w, c.storm); })
      .get("to_rain", c.to_rain)
      .with("physics", [&](const json& v, const std::string& w) {
        c.physics = parse_enum<PhysicsSource>(
            v, w, {{"simulation", PhysicsSource::simulation}, {"uniform", PhysicsSource::uniform}, {"motion", PhysicsSource::motion}});
      })
      .get("vx", c.vx)
      .get("vy", c.vy)
      .get("diffusivity", c.diffusivity)
      .get("delta", c.delta)
      .with("motion", [&](const json& v, const std::string& w) {
        Reader(v, w)
            .get("block", c.motion.block)
            .get("overlap", c.motion.overlap)
            .get("search_radius", c.motion.search_radius)
            .get("min_block_energy", c.motion.min_block_energy)
            .get("smooth_sigma", c.motion.smooth_sigma)
            .get("delta_x", c.motion_delta_x)
            .get("delta_y", c.motion_delta_y)
            .finish();
      })
      .with("noise", [&](const json& v, const std::string& w) {
        Reader(v, w)
            .get("sigma2_alpha", c.noise.sigma2_alpha)
            .get("sigma2_beta", c.noise.sigma2_beta)
            .get("sigma2_obs", c.noise.sigma2_obs)
            .finish();
      })
      .get("estimate", c.estimate)
      .with("estimation", [&](const json& v, const std::string& w) {
        auto& e = c.estimation;
        Reader(v, w)
            .get("fit_obs_noise", e.fit_obs_noise)
            .get("grid_log10", e.grid_log10)
            .get("max_evaluations", e.max_evaluations)
            .get("floor", e.floor)
            .get("ceiling", e.ceiling)
            .get("tolerance", e.tolerance)
            .get("init_cov_scale", e.init_cov_scale)
            .finish();
      })
      .with("models", [&](const json& v, const std::string& w) {
        if (!v.is_array()) throw ConfigError(w + ": expected an array");
        c.models.clear();
        for (size_t i = 0; i < v.size(); ++i) c.models.push_back(read_model(v[i], w + "[" + std::to_string(i) + "]"));
      })
      .get("train_steps", c.train_steps)
      .get("horizon", c.horizon)
      .get("eval_times", c.eval_times)
      .with("regions", [&](const json& v, const std::string& w) {
        if (!v.is_array()) throw ConfigError(w + ": expected an array");
        c.regions.clear();
        for (size_t i = 0; i < v.size(); ++i) c.regions.push_back(read_region(v[i], w + "[" + std::to_string(i) + "]"));
      })
      .finish();
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  const auto& s = c.simulation;
  const auto& st = c.storm;
  json models = json::array();
  for (const auto& m : c.models) {
    models.push_back({{"label", m.label},
                      {"flip", m.flip},
                      {"window", m.window},
                      {"k", m.k},
                      {"k_original", m.k_original},
                      {"variant",
                       {{"x", m.variant.x == XAnchor::right ? "right" : "left"},
                        {"y", m.variant.y == YAnchor::bottom ? "bottom" : "top"}}},
                      {"window_form", m.window_form == HammingForm::printed ? "printed" : "periodic"},
                      {"diagonal_noise", m.diagonal_noise}});
  }
  json regions = json::array();
  for (const auto& r : c.regions) {
    regions.push_back({{"name", r.name}, {"x0", r.x0}, {"x1", r.x1}, {"y0", r.y0}, {"y1", r.y1}});
  }
  return {
      {"dataset", dataset_name(c.dataset)},
      {"simulation",
       {{"grid", {{"n1", s.grid.n1}, {"n2", s.grid.n2}}},
        {"steps", s.steps},
        {"delta", s.delta},
        {"vx", s.vx},
        {"vy", s.vy},
        {"diffusivity", s.diffusivity},
        {"source_x", s.source_x},
        {"source_y", s.source_y},
        {"source_scale", s.source_scale},
        {"source_amplitude", s.source_amplitude},
        {"noise_alpha", s.noise_alpha},
        {"noise_beta", s.noise_beta},
        {"noise_modes", s.noise_modes},
        {"seed", s.seed}}},
      {"storm",
       {{"grid", {{"n1", st.grid.n1}, {"n2", st.grid.n2}}},
        {"steps", st.steps},
        {"vx", st.vx},
        {"vy", st.vy},
        {"no_echo_dbz", st.no_echo_dbz},
        {"noise_dbz", st.noise_dbz},
        {"seed", st.seed}}},
      {"to_rain", c.to_rain},
      {"physics", physics_name(c.physics)},
      {"vx", c.vx},
      {"vy", c.vy},
      {"diffusivity", c.diffusivity},
      {"delta", c.delta},
      {"motion",
       {{"block", c.motion.block},
        {"overlap", c.motion.overlap},
        {"search_radius", c.motion.search_radius},
        {"min_block_energy", c.motion.min_block_energy},
        {"smooth_sigma", c.motion.smooth_sigma},
        {"delta_x", c.motion_delta_x},
        {"delta_y", c.motion_delta_y}}},
      {"noise",
       {{"sigma2_alpha", c.noise.sigma2_alpha},
        {"sigma2_beta", c.noise.sigma2_beta},
        {"sigma2_obs", c.noise.sigma2_obs}}},
      {"estimate", c.estimate},
      {"estimation",
       {{"fit_obs_noise", c.estimation.fit_obs_noise},
        {"grid_log10", c.estimation.grid_log10},
        {"max_evaluations", c.estimation.max_evaluations},
        {"floor", c.estimation.floor},
        {"ceiling", c.estimation.ceiling},
        {"tolerance", c.estimation.tolerance},
        {"init_cov_scale", c.estimation.init_cov_scale}}},
      {"models", models},
      {"train_steps", c.train_steps},
      {"horizon", c.horizon},
      {"eval_times", c.eval_times},
      {"regions", regions},
  };
}

RunConfig load_config(const std::string& arg) {
  for (const auto& n : preset_names()) {
    if (arg == n) return preset(arg);
  }
  if (!std::filesystem::exists(arg)) {
    throw ConfigError("config '" + arg + "' is neither a preset nor an existing file");
  }
  std::ifstream is(arg);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(arg + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<Field> config_frames(const RunConfig& c) {
  if (c.dataset == DatasetKind::simulation) return simulate_advection(c.simulation).frames;
  std::vector<Field> frames = simulate_storm(c.storm);
  if (c.to_rain) {
    for (auto& f : frames) f = reflectivity_to_rain(f);
  }
  return frames;
}

Physics resolve_physics(const RunConfig& c, const std::vector<Field>& frames, std::string* warning) {
  if (frames.empty()) throw ConfigError("resolve_physics: no frames");
  const GridSpec g = frames.front().grid;
  switch (c.physics) {
  case PhysicsSource::uniform:
    return Physics::uniform(g, c.vx, c.vy, c.diffusivity, c.delta);
  case PhysicsSource::motion: {
    const int last = std::min<int>(c.train_steps, static_cast<int>(frames.size())) - 1;
    if (last < 1) throw ConfigError("motion estimation needs two frames");
    const MotionEstimate est = estimate_velocity(frames[last - 1], frames[last], c.motion);
    if (est.degenerate && warning != nullptr) *warning = est.warning;
    const double dx = c.motion_delta_x > 0.0 ? c.motion_delta_x : static_cast<double>(c.motion.stride()) / g.n1;
    const double dy = c.motion_delta_y > 0.0 ? c.motion_delta_y : static_cast<double>(c.motion.stride()) / g.n2;
    return {est.velocity, diffusivity_from_velocity(est.velocity, dx, dy), c.delta};
  }
  default:
    return Physics::uniform(g, c.simulation.vx, c.simulation.vy, c.simulation.diffusivity, c.simulation.delta);
  }
}

std::uint64_t config_hash(const RunConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace flipst
