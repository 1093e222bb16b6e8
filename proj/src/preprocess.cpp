#include "flipst/preprocess.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "flipst/error.hpp"

namespace flipst {

double reflectivity_to_rain(double dbz) { return std::pow(std::pow(10.0, dbz / 10.0) / 200.0, 0.625); }

Field reflectivity_to_rain(const Field& dbz) {
  if (!dbz.finite()) throw ConfigError("reflectivity field has non-finite values");
  Field out(dbz.grid);
  out.values = dbz.values.unaryExpr([](double z) { return reflectivity_to_rain(z); });
  return out;
}

double hamming(int i, int n, HammingForm form) {
  const double period = form == HammingForm::printed ? n - 1 : n;
  return 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / period);
}

WindowField hamming2d(GridSpec g, HammingForm form) {
  if (g.n1 < 2 || g.n2 < 2) {
    throw ConfigError("Hamming window needs at least 2 points per axis, got " + std::to_string(g.n1) +
                      "x" + std::to_string(g.n2));
  }
  Field w(g);
  for (int j = 0; j < g.n1; ++j) {
    const double wx = hamming(j, g.n1, form);
    for (int i = 0; i < g.n2; ++i) w.at(i, j) = hamming(i, g.n2, form) * wx;
  }
  return {g, std::move(w)};
}

Field apply_window(const Field& f, const WindowField& w) {
  if (!(f.grid == w.grid)) throw ConfigError("apply_window: grid mismatch");
  return Field(f.grid, f.values.cwiseProduct(w.weights.values));
}

} // namespace flipst
