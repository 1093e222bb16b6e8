#include "flipst/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "flipst/error.hpp"

namespace flipst {
namespace {

constexpr double kEdge = 1e-9;

} // namespace

bool Region::contains(double x, double y) const {
  return x >= x0 - kEdge && x <= x1 + kEdge && y >= y0 - kEdge && y <= y1 + kEdge;
}

void Region::validate() const {
  if (!(x0 <= x1 && y0 <= y1) || x0 < 0.0 || y0 < 0.0 || x1 > 1.0 || y1 > 1.0) {
    throw ConfigError("region " + name + " must satisfy 0 <= lo <= hi <= 1");
  }
}

double mae(const Field& truth, const Field& estimate, const Region& region) {
  if (!(truth.grid == estimate.grid)) throw ConfigError("mae: grid mismatch");
  region.validate();
  const GridSpec g = truth.grid;
  double acc = 0.0;
  long count = 0;
  for (int j = 0; j < g.n1; ++j) {
    for (int i = 0; i < g.n2; ++i) {
      if (!region.contains(g.x(j), g.y(i))) continue;
      acc += std::abs(truth.at(i, j) - estimate.at(i, j));
      ++count;
    }
  }
  if (count == 0) throw ConfigError("mae: region " + region.name + " contains no grid points");
  return acc / static_cast<double>(count);
}

double ComparisonReport::at(const std::string& model, const std::string& region, int time) const {
  for (const auto& r : rows) {
    if (r.model == model && r.region == region && r.time == time) return r.mae;
  }
  throw ConfigError("no MAE row for " + model + "/" + region + " at time " + std::to_string(time));
}

ComparisonReport run_comparison(const std::vector<Field>& frames, const Physics& physics,
                                const std::vector<ModelSpec>& specs, const ComparisonOptions& opts) {
  for (const auto& r : opts.regions) r.validate();
  int last = 0;
  for (int t : opts.eval_times) {
    if (t < 0) throw ConfigError("evaluation times must be >= 0");
    last = std::max(last, t);
  }
  if (static_cast<size_t>(last) >= frames.size()) {
    throw ConfigError("evaluation time " + std::to_string(last) + " needs " + std::to_string(last + 1) +
                      " frames, dataset has " + std::to_string(frames.size()));
  }
  RunOptions run_opts = opts.run;
  run_opts.horizon = std::max(0, last + 1 - run_opts.train_steps);

  ComparisonReport report;
  for (const auto& spec : specs) {
    ModelRun run = run_model(spec, physics, frames, run_opts);
    for (const auto& region : opts.regions) {
      for (int t : opts.eval_times) {
        report.rows.push_back({spec.label, region.name, t, mae(frames[t], run.fields[t], region)});
      }
    }
    report.runs.push_back(std::move(run));
  }
  return report;
}

void write_csv(std::ostream& os, const ComparisonReport& report) {
  os << "model,region,time,mae\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.mae);
    os << r.model << ',' << r.region << ',' << r.time << ',' << buf << '\n';
  }
}

double gibbs_energy(const Field& f, const Region& strip, int k, bool flipped, FlipVariant v) {
  Field recon;
  if (flipped) {
    const Field fs = flip_field(f, v);
    const ModeOrdering ord = ModeOrdering::truncated(fs.grid, 4 * k);
    recon = unflip(synthesize(analyze(fs, ord)), v);
  } else {
    recon = synthesize(analyze(f, ModeOrdering::truncated(f.grid, k)));
  }
  return mae(f, recon, strip);
}

} // namespace flipst
