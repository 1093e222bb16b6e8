#include "flipst/grid.hpp"

#include <string>
#include <vector>

#include "flipst/error.hpp"

namespace flipst {

void GridSpec::validate() const {
  if (n1 < 2 || n2 < 2) {
    throw ConfigError("grid must be at least 2x2, got " + std::to_string(n1) + "x" +
                      std::to_string(n2));
  }
  if (n1 % 2 != 0 || n2 % 2 != 0) {
    throw ConfigError("grid sides must be even, got " + std::to_string(n1) + "x" +
                      std::to_string(n2));
  }
}

Field::Field(GridSpec g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw ConfigError("field length " + std::to_string(values.size()) +
                      " does not match grid size " + std::to_string(grid.size()));
  }
}

Field::Field(GridSpec g, double fill) : grid(g), values(Eigen::VectorXd::Constant(g.size(), fill)) {}

Field Field::from_image(const Eigen::Ref<const Eigen::MatrixXd>& image) {
  GridSpec g{static_cast<int>(image.cols()), static_cast<int>(image.rows())};
  Eigen::MatrixXd copy = image;
  return Field(g, Eigen::Map<const Eigen::VectorXd>(copy.data(), copy.size()));
}

Eigen::MatrixXd Field::image() const {
  return Eigen::Map<const Eigen::MatrixXd>(values.data(), grid.n2, grid.n1);
}

int reflect_row(int i_star, int n2, YAnchor anchor) {
  const bool upper = i_star >= n2;
  if (anchor == YAnchor::bottom) {
    return upper ? 2 * n2 - 1 - i_star : i_star;
  }
  return upper ? i_star - n2 : n2 - 1 - i_star;
}

int reflect_col(int j_star, int n1, XAnchor anchor) {
  const bool upper = j_star >= n1;
  if (anchor == XAnchor::right) {
    return upper ? 2 * n1 - 1 - j_star : j_star;
  }
  return upper ? j_star - n1 : n1 - 1 - j_star;
}

Field flip_field(const Field& f, FlipVariant v) {
  const GridSpec g = f.grid;
  Field out(g.doubled());
  for (int js = 0; js < 2 * g.n1; ++js) {
    const int j = reflect_col(js, g.n1, v.x);
    for (int is = 0; is < 2 * g.n2; ++is) {
      out.at(is, js) = f.at(reflect_row(is, g.n2, v.y), j);
    }
  }
  return out;
}

Eigen::SparseMatrix<double> flip_matrix(GridSpec g, FlipVariant v) {
  const GridSpec gs = g.doubled();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(gs.size());
  for (int js = 0; js < gs.n1; ++js) {
    const int j = reflect_col(js, g.n1, v.x);
    for (int is = 0; is < gs.n2; ++is) {
      const int i = reflect_row(is, g.n2, v.y);
      entries.emplace_back(js * gs.n2 + is, j * g.n2 + i, 1.0);
    }
  }
  Eigen::SparseMatrix<double> r(gs.size(), g.size());
  r.setFromTriplets(entries.begin(), entries.end());
  return r;
}

Field unflip(const Field& flipped, FlipVariant v) {
  const GridSpec gs = flipped.grid;
  if (gs.n1 % 2 != 0 || gs.n2 % 2 != 0) {
    throw ConfigError("unflip needs even dimensions, got " + std::to_string(gs.n1) + "x" +
                      std::to_string(gs.n2));
  }
  const GridSpec g{gs.n1 / 2, gs.n2 / 2};
  const int col0 = v.x == XAnchor::right ? 0 : g.n1;
  const int row0 = v.y == YAnchor::bottom ? 0 : g.n2;
  return Field::from_image(flipped.image().block(row0, col0, g.n2, g.n1));
}

} // namespace flipst
