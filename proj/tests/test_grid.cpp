#include <doctest.h>

#include <random>

#include "flipst/error.hpp"
#include "flipst/grid.hpp"
#include "oracles.hpp"

using namespace flipst;

TEST_CASE("grid validation and vectorization") {
  CHECK_THROWS_AS(GridSpec({3, 4}).validate(), ConfigError);
  CHECK_THROWS_AS(GridSpec({0, 4}).validate(), ConfigError);
  CHECK_NOTHROW(GridSpec({2, 2}).validate());

  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Field f = Field::from_image(m);
  CHECK(f.grid == GridSpec{3, 2});
  // values[j * n2 + i] == M(i, j)
  CHECK(f.values[0] == 1);
  CHECK(f.values[1] == 4);
  CHECK(f.values[2] == 2);
  CHECK(f.at(1, 2) == 6);
  CHECK(f.image() == m);
}

TEST_CASE("two by two worked example") {
  // M = [[y1, y3], [y2, y4]], y = (1, 2, 3, 4)
  Eigen::MatrixXd m(2, 2);
  m << 1, 3, 2, 4;
  const Field flipped = flip_field(Field::from_image(m));
  Eigen::VectorXd expected(16);
  expected << 1, 2, 2, 1, 3, 4, 4, 3, 3, 4, 4, 3, 1, 2, 2, 1;
  CHECK(flipped.values == expected);

  const Field back = unflip(flipped);
  CHECK(back.image() == m);

  // R is [I2, J2]^T kron [I2, J2]^T
  Eigen::MatrixXd ij(4, 2);
  ij << 1, 0, 0, 1, 0, 1, 1, 0;
  Eigen::MatrixXd kron(16, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 2; ++b) kron.block(4 * a, 2 * b, 4, 2) = ij(a, b) * ij;
  CHECK(Eigen::MatrixXd(flip_matrix({2, 2})) == kron);
}

TEST_CASE("flip of a constant and of a single pixel") {
  const Field c(GridSpec{6, 4}, 2.5);
  const Field fc = flip_field(c);
  CHECK(fc.grid == GridSpec{12, 8});
  CHECK((fc.values.array() == 2.5).all());

  Field spike(GridSpec{4, 4});
  spike.at(1, 2) = 1.0;
  const Field fs = flip_field(spike);
  CHECK((fs.values.array() != 0.0).count() == 4);
  for (int is : {1, 6})
    for (int js : {2, 5}) CHECK(fs.at(is, js) == 1.0);
}

TEST_CASE("flip matrix agrees with index reflection on random grids") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> side(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const GridSpec g{2 * side(rng), 2 * side(rng)};
    const Eigen::MatrixXd m = oracle::random_image(rng, g.n2, g.n1);
    const Field f = Field::from_image(m);
    const Eigen::MatrixXd ref = oracle::reflect_image(m);
    const Field ff = flip_field(f);
    REQUIRE(ff.image() == ref);

    const Eigen::SparseMatrix<double> r = flip_matrix(g);
    const Eigen::VectorXd rv = r * f.values;
    REQUIRE(rv == ff.values);
  }
}

TEST_CASE("flip matrix structure") {
  for (const GridSpec g : {GridSpec{2, 2}, GridSpec{4, 6}, GridSpec{8, 4}}) {
    for (auto xa : {XAnchor::right, XAnchor::left}) {
      for (auto ya : {YAnchor::bottom, YAnchor::top}) {
        const Eigen::MatrixXd r = flip_matrix(g, {xa, ya});
        CHECK(r.rows() == 4 * g.size());
        CHECK((r.rowwise().sum().array() == 1.0).all());
        CHECK((r.colwise().sum().array() == 4.0).all());
        CHECK(r.transpose() * r == 4.0 * Eigen::MatrixXd::Identity(g.size(), g.size()));
      }
    }
  }
}

TEST_CASE("every variant round trips and keeps the original quadrant verbatim") {
  std::mt19937_64 rng(3);
  const Field f = oracle::random_field(rng, {6, 4});
  for (auto xa : {XAnchor::right, XAnchor::left}) {
    for (auto ya : {YAnchor::bottom, YAnchor::top}) {
      const FlipVariant v{xa, ya};
      const Field ff = flip_field(f, v);
      CHECK(unflip(ff, v).values == f.values);
      const int r0 = ya == YAnchor::bottom ? 0 : 4;
      const int c0 = xa == XAnchor::right ? 0 : 6;
      CHECK(ff.image().block(r0, c0, 4, 6) == f.image());
      CHECK(ff.values.sum() == doctest::Approx(4.0 * f.values.sum()));
    }
  }
}

TEST_CASE("unflip extracts the designated quadrant of any field") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd m = oracle::random_image(rng, 4, 4);
  const Field f = Field::from_image(m);
  CHECK(unflip(f).image() == m.block(0, 0, 2, 2));
  CHECK(unflip(f, {XAnchor::left, YAnchor::top}).image() == m.block(2, 2, 2, 2));
  CHECK_THROWS_AS(unflip(Field::from_image(Eigen::MatrixXd::Zero(3, 4))), ConfigError);
}

TEST_CASE("seams of the flipped field are no rougher than the interior") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd m = oracle::random_image(rng, 6, 8);
  const Eigen::MatrixXd ff = flip_field(Field::from_image(m)).image();
  double interior = 0.0;
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i + 1 < 6; ++i) interior = std::max(interior, std::abs(m(i + 1, j) - m(i, j)));
  for (int j = 0; j + 1 < 8; ++j)
    for (int i = 0; i < 6; ++i) interior = std::max(interior, std::abs(m(i, j + 1) - m(i, j)));

  double seam = 0.0;
  const auto rows = ff.rows();
  const auto cols = ff.cols();
  for (Eigen::Index j = 0; j < cols; ++j) seam = std::max(seam, std::abs(ff(0, j) - ff(rows - 1, j)));
  for (Eigen::Index i = 0; i < rows; ++i) seam = std::max(seam, std::abs(ff(i, 0) - ff(i, cols - 1)));
  CHECK(seam <= interior);

  // Doubling again keeps the same structure.
  const Field twice = flip_field(flip_field(Field::from_image(m)));
  CHECK(twice.grid == GridSpec{32, 24});
  CHECK(unflip(unflip(twice)).image() == m);
}
