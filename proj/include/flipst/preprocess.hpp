#pragma once

#include "flipst/grid.hpp"

namespace flipst {

/// Marshall-Palmer Z-R law: R = (10^(Z/10) / 200)^(5/8), Z in dBZ, R in mm/hr.
double reflectivity_to_rain(double dbz);
Field reflectivity_to_rain(const Field& dbz);

enum class HammingForm {
  /// 0.54 - 0.46 cos(2 pi i / (n - 1)): endpoints both at 0.08.
  printed,
  /// 0.54 - 0.46 cos(2 pi i / n): the DFT-even variant, a single 0.08 endpoint.
  periodic,
};

/// Separable 2-D Hamming weights on a grid.
struct WindowField {
  GridSpec grid;
  Field weights;
};

double hamming(int i, int n, HammingForm form = HammingForm::printed);
WindowField hamming2d(GridSpec g, HammingForm form = HammingForm::printed);

Field apply_window(const Field& f, const WindowField& w);

} // namespace flipst
