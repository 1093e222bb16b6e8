#pragma once

#include <Eigen/Dense>

namespace flipst::fft {

/// Unnormalized forward 2-D DFT of an n2 x n1 image:
/// X(k2, k1) = sum_{i,j} M(i, j) exp(-2 pi i (k1 j / n1 + k2 i / n2)).
Eigen::MatrixXcd forward2(const Eigen::MatrixXd& image);

/// Real part of the inverse 2-D DFT, scaled by 1/(n1 n2).
Eigen::MatrixXd inverse2_real(const Eigen::MatrixXcd& spectrum);

} // namespace flipst::fft
