#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flipst/grid.hpp"

namespace flipst {

/// manifest.json of a stack directory.
struct StackManifest {
  int n1 = 0;
  int n2 = 0;
  int steps = 0;
  double delta = 1.0;
  std::string units = "arbitrary";
  std::string created;
  std::string config_hash;
};

/// Frames stored as frame_0000.csv, frame_0001.csv, ... next to the manifest:
/// n2 rows of n1 comma-separated values, row i is y index i.
struct GridStack {
  StackManifest manifest;
  std::vector<Field> frames;
};

std::string frame_filename(int t);

void write_field_csv(const std::filesystem::path& path, const Field& f);
Field read_field_csv(const std::filesystem::path& path, GridSpec expected);

/// Fills in n1/n2/steps from the frames; creates the directory.
void save_stack(const std::filesystem::path& dir, GridStack stack);
GridStack load_stack(const std::filesystem::path& dir);

struct ColorScale {
  double min = 0.0;
  double max = 1.0;
};

/// Binary PGM (P5) with a linear map of [min, max] onto 0..255; the scale used
/// is written to `path` + ".scale.txt". Without a scale the field range is used.
ColorScale render_heatmap(const Field& f, const std::filesystem::path& path,
                          std::optional<ColorScale> scale = std::nullopt);

/// UTC timestamp, ISO 8601.
std::string utc_now();

} // namespace flipst
