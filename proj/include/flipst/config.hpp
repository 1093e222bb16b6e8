#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "flipst/eval.hpp"
#include "flipst/kalman.hpp"
#include "flipst/motion.hpp"
#include "flipst/pipeline.hpp"
#include "flipst/simulate.hpp"

namespace flipst {

enum class DatasetKind { simulation, storm };
enum class PhysicsSource { simulation, uniform, motion };

/// Every parameter of a run. JSON keys mirror the field names; unknown keys
/// are rejected and a document may start from a named preset ("preset": ...).
struct RunConfig {
  DatasetKind dataset = DatasetKind::simulation;
  SimulationConfig simulation{};
  StormConfig storm{};
  /// Convert dBZ stacks to mm/hr before modelling.
  bool to_rain = false;

  PhysicsSource physics = PhysicsSource::simulation;
  double vx = 0.0;
  double vy = 0.0;
  double diffusivity = 0.0;
  double delta = 1.0;

  MotionConfig motion{};
  /// Velocity-field resolution for the diffusivity; 0 means stride / n.
  double motion_delta_x = 0.0;
  double motion_delta_y = 0.0;

  NoiseParams noise{};
  bool estimate = true;
  EstimateOptions estimation{};

  std::vector<ModelSpec> models;
  int train_steps = 20;
  int horizon = 10;
  std::vector<int> eval_times;
  std::vector<Region> regions{Region::whole()};

  void validate() const;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset(const std::string& name);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

/// `arg` names a preset or a JSON file.
RunConfig load_config(const std::string& arg);

/// Frames the config describes: the simulation or the storm stack, converted
/// to mm/hr when `to_rain` is set.
std::vector<Field> config_frames(const RunConfig& c);

/// Physics for model-ready frames. Motion physics track the last training
/// pair; `warning` receives the tracker's message for featureless frames.
Physics resolve_physics(const RunConfig& c, const std::vector<Field>& frames, std::string* warning = nullptr);

/// FNV-1a 64 over the canonical JSON (sorted keys, fixed number format).
std::uint64_t config_hash(const RunConfig& c);
std::string hash_hex(std::uint64_t h);

} // namespace flipst
