#include "flipst/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "flipst/error.hpp"

namespace flipst {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

double parse_number(std::string_view cell, const fs::path& path, int line, int col) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
    cell.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ConfigError(path.string() + ":" + std::to_string(line) + ": column " + std::to_string(col + 1) +
                      " is not a number: '" + std::string(cell) + "'");
  }
  return v;
}

template <typename T>
T manifest_get(const json& j, const char* key, const fs::path& path) {
  if (!j.contains(key)) throw ConfigError(path.string() + ": manifest missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": manifest key '" + key + "': " + e.what());
  }
}

} // namespace

std::string frame_filename(int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.csv", t);
  return buf;
}

void write_field_csv(const fs::path& path, const Field& f) {
  auto os = open_out(path);
  char buf[40];
  for (int i = 0; i < f.grid.n2; ++i) {
    for (int j = 0; j < f.grid.n1; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", f.at(i, j));
      if (j > 0) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

Field read_field_csv(const fs::path& path, GridSpec expected) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  Field f(expected);
  std::string line;
  int row = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    if (row >= expected.n2) {
      throw ConfigError(path.string() + ":" + std::to_string(row + 1) + ": more than " +
                        std::to_string(expected.n2) + " rows");
    }
    std::string_view rest(line);
    int col = 0;
    while (true) {
      const size_t comma = rest.find(',');
      if (col >= expected.n1) {
        throw ConfigError(path.string() + ":" + std::to_string(row + 1) + ": more than " +
                          std::to_string(expected.n1) + " columns");
      }
      f.at(row, col) = parse_number(rest.substr(0, comma), path, row + 1, col);
      ++col;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (col != expected.n1) {
      throw ConfigError(path.string() + ":" + std::to_string(row + 1) + ": expected " +
                        std::to_string(expected.n1) + " columns, found " + std::to_string(col));
    }
    ++row;
  }
  if (row != expected.n2) {
    throw ConfigError(path.string() + ": expected " + std::to_string(expected.n2) + " rows, found " +
                      std::to_string(row));
  }
  return f;
}

void save_stack(const fs::path& dir, GridStack stack) {
  if (stack.frames.empty()) throw ConfigError("save_stack: no frames");
  const GridSpec g = stack.frames.front().grid;
  for (const auto& f : stack.frames) {
    if (!(f.grid == g)) throw ConfigError("save_stack: frames on different grids");
  }
  auto& m = stack.manifest;
  m.n1 = g.n1;
  m.n2 = g.n2;
  m.steps = static_cast<int>(stack.frames.size());
  if (m.created.empty()) m.created = utc_now();
  fs::create_directories(dir);
  const json j = {{"n1", m.n1},       {"n2", m.n2},           {"steps", m.steps},
                  {"delta", m.delta}, {"units", m.units},     {"created", m.created},
                  {"config_hash", m.config_hash}};
  open_out(dir / "manifest.json") << j.dump(2) << '\n';
  for (int t = 0; t < m.steps; ++t) write_field_csv(dir / frame_filename(t), stack.frames[t]);
}

GridStack load_stack(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream is(mpath);
  if (!is) throw ConfigError("missing manifest " + mpath.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(mpath.string() + ": " + e.what());
  }
  GridStack s;
  auto& m = s.manifest;
  m.n1 = manifest_get<int>(j, "n1", mpath);
  m.n2 = manifest_get<int>(j, "n2", mpath);
  m.steps = manifest_get<int>(j, "steps", mpath);
  m.delta = manifest_get<double>(j, "delta", mpath);
  m.units = manifest_get<std::string>(j, "units", mpath);
  m.created = manifest_get<std::string>(j, "created", mpath);
  m.config_hash = manifest_get<std::string>(j, "config_hash", mpath);
  if (m.n1 < 1 || m.n2 < 1 || m.steps < 1) {
    throw ConfigError(mpath.string() + ": n1, n2 and steps must be positive");
  }
  const GridSpec g{m.n1, m.n2};
  for (int t = 0; t < m.steps; ++t) {
    const fs::path p = dir / frame_filename(t);
    if (!fs::exists(p)) {
      throw ConfigError(dir.string() + ": frame " + std::to_string(t) + " missing (" + p.filename().string() +
                        ")");
    }
    s.frames.push_back(read_field_csv(p, g));
  }
  return s;
}

ColorScale render_heatmap(const Field& f, const fs::path& path, std::optional<ColorScale> scale) {
  if (!f.finite()) throw NumericalError("render_heatmap: field has non-finite values");
  ColorScale cs = scale.value_or(ColorScale{f.values.minCoeff(), f.values.maxCoeff()});
  const double span = cs.max - cs.min;
  auto os = open_out(path, std::ios::out | std::ios::binary);
  os << "P5\n" << f.grid.n1 << ' ' << f.grid.n2 << "\n255\n";
  // Image rows top to bottom: highest y first.
  for (int i = f.grid.n2 - 1; i >= 0; --i) {
    for (int j = 0; j < f.grid.n1; ++j) {
      const double u = span > 0.0 ? (f.at(i, j) - cs.min) / span : 0.0;
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(u, 0.0, 1.0)))));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "min %.17g\nmax %.17g\n", cs.min, cs.max);
  open_out(fs::path(path.string() + ".scale.txt")) << buf;
  return cs;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace flipst
