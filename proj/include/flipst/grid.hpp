#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace flipst {

/// Uniform n1 x n2 grid over [0,1)^2. x_j = j/n1, y_i = i/n2.
struct GridSpec {
  int n1 = 0;
  int n2 = 0;

  int size() const { return n1 * n2; }
  GridSpec doubled() const { return {2 * n1, 2 * n2}; }
  double x(int j) const { return static_cast<double>(j) / n1; }
  double y(int i) const { return static_cast<double>(i) / n2; }

  /// Throws ConfigError unless both sides are >= 2 and even.
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Scalar field on a grid.
///
/// Values are the column-stacking of the n2 x n1 pixel array M whose rows
/// index y and columns index x: values[j * n2 + i] == M(i, j). This is the
/// native storage order of a column-major Eigen matrix, so image() and
/// from_image() are plain reshapes.
struct Field {
  GridSpec grid;
  Eigen::VectorXd values;

  Field() = default;
  Field(GridSpec g, Eigen::VectorXd v);
  explicit Field(GridSpec g, double fill = 0.0);

  static Field from_image(const Eigen::Ref<const Eigen::MatrixXd>& image);

  Eigen::MatrixXd image() const;
  double& at(int i, int j) { return values[j * grid.n2 + i]; }
  double at(int i, int j) const { return values[j * grid.n2 + i]; }
  bool finite() const { return values.allFinite(); }
};

enum class XAnchor { right, left };
enum class YAnchor { bottom, top };

/// Which boundaries the two mirror images are attached to.
///
/// right/bottom keeps the original in the low-index quadrant and places the
/// reflections at higher column/row indices. left/top swap the I and J
/// blocks, placing the original in the high-index half along that axis.
struct FlipVariant {
  XAnchor x = XAnchor::right;
  YAnchor y = YAnchor::bottom;
  friend bool operator==(const FlipVariant&, const FlipVariant&) = default;
};

/// Source row of the original image for flipped row `i_star` (0 <= i_star < 2 n2).
int reflect_row(int i_star, int n2, YAnchor anchor);
/// Source column of the original image for flipped column `j_star`.
int reflect_col(int j_star, int n1, XAnchor anchor);

/// Double mirror extension onto the (2 n1, 2 n2) grid by index reflection.
Field flip_field(const Field& f, FlipVariant v = {});

/// Sparse 4N x N permutation-like matrix with flip_matrix(g) * f.values ==
/// flip_field(f).values.
///
/// Under the column-stacking above, vec(A M B) = (B^T kron A) vec(M) makes
/// the factor order [I_n1, J_n1]^T kron [I_n2, J_n2]^T: the x-axis factor is
/// on the left. For square grids both orders coincide.
Eigen::SparseMatrix<double> flip_matrix(GridSpec g, FlipVariant v = {});

/// Restriction of a flipped field to the quadrant holding the original.
Field unflip(const Field& flipped, FlipVariant v = {});

} // namespace flipst
