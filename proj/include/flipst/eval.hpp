#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "flipst/grid.hpp"
#include "flipst/pipeline.hpp"

namespace flipst {

/// Axis-aligned box in domain units; bounds are inclusive.
struct Region {
  std::string name = "domain";
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;

  static Region whole() { return {}; }
  bool contains(double x, double y) const;
  void validate() const;
};

/// Mean absolute difference over grid points inside the region.
double mae(const Field& truth, const Field& estimate, const Region& region = Region::whole());

struct MaeRow {
  std::string model;
  std::string region;
  int time = 0;
  double mae = 0.0;
};

struct ComparisonOptions {
  RunOptions run{};
  std::vector<int> eval_times;
  std::vector<Region> regions{Region::whole()};
};

struct ComparisonReport {
  std::vector<MaeRow> rows;
  std::vector<ModelRun> runs;
  std::uint64_t config_hash = 0;

  /// Looks up one cell; throws ConfigError when absent.
  double at(const std::string& model, const std::string& region, int time) const;
};

/// Runs every spec on the same frames and scores frames[t] against the model
/// field at t for each requested time and region. Times past the training
/// window are forecasts.
ComparisonReport run_comparison(const std::vector<Field>& frames, const Physics& physics,
                                const std::vector<ModelSpec>& specs, const ComparisonOptions& opts);

/// "model,region,time,mae" with 17 significant digits.
void write_csv(std::ostream& os, const ComparisonReport& report);

/// MAE inside `strip` of the truncated reconstruction of `f`: directly with
/// budget k, or through the flipped domain with budget 4k when `flipped`.
double gibbs_energy(const Field& f, const Region& strip, int k, bool flipped, FlipVariant v = {});

} // namespace flipst
