#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flipst/galerkin.hpp"
#include "flipst/kalman.hpp"
#include "flipst/preprocess.hpp"
#include "flipst/spectral.hpp"

namespace flipst {

/// One model of the comparison: NF (direct), F (flipped) and the Hamming
/// windowed NF variant. `k` is the budget on the domain where filtering
/// happens, so for flipped models it is K*; `k_original` (0 means k) is the
/// budget of the original-domain physics that H carries over.
struct ModelSpec {
  std::string label;
  bool flip = false;
  bool window = false;
  int k = 100;
  int k_original = 0;
  FlipVariant variant{};
  HammingForm window_form = HammingForm::printed;
  bool diagonal_noise = false;

  int original_budget() const { return k_original > 0 ? k_original : k; }
  void validate() const;
};

/// Physics on the original grid.
struct Physics {
  VelocityField velocity;
  DiffusivityField diffusivity;
  double delta = 1.0;

  static Physics uniform(GridSpec g, double vx, double vy, double d, double delta = 1.0);
};

/// Everything needed to filter one spec: the observation ordering (flipped
/// grid for F models), the state-space model and, for F models, H.
struct BuiltModel {
  ModelSpec spec;
  GridSpec grid;
  ModeOrdering obs_ordering;
  std::optional<FlipTransfer> transfer;
  StateSpaceModel model;
};

BuiltModel build_model(const ModelSpec& spec, const Physics& physics, NoiseParams noise = {});

/// Frame -> coefficient observation: optional window, optional flip, analyze.
Eigen::VectorXd observe(const BuiltModel& m, const Field& frame);

/// Coefficients -> field on the original grid (unflipped for F models).
Field reconstruct(const BuiltModel& m, const Eigen::VectorXd& alpha);

struct RunOptions {
  int train_steps = 20;
  int horizon = 10;
  bool estimate = true;
  EstimateOptions estimation{};
  /// Used when `estimate` is false.
  NoiseParams noise{};
};

struct ModelRun {
  ModelSpec spec;
  NoiseParams noise;
  std::optional<VarianceEstimate> estimate;
  double loglik = 0.0;
  /// Filtered fields for t < train_steps, then forecasts; index = time.
  std::vector<Field> fields;
};

/// Fit variances (optionally) on the first train_steps frames, filter them
/// and forecast `horizon` further steps. Errors carry the spec label.
ModelRun run_model(const ModelSpec& spec, const Physics& physics, const std::vector<Field>& frames,
                   const RunOptions& opts);

} // namespace flipst
