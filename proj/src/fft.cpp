#include "flipst/fft.hpp"

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace flipst::fft {

Eigen::MatrixXcd forward2(const Eigen::MatrixXd& image) {
  const Eigen::Index rows = image.rows();
  const Eigen::Index cols = image.cols();
  Eigen::FFT<double> engine;
  Eigen::MatrixXcd out(rows, cols);

  std::vector<double> rin(rows);
  std::vector<std::complex<double>> cbuf;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) rin[r] = image(r, c);
    engine.fwd(cbuf, rin);
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = cbuf[r];
  }

  std::vector<std::complex<double>> cin(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) cin[c] = out(r, c);
    engine.fwd(cbuf, cin);
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = cbuf[c];
  }
  return out;
}

Eigen::MatrixXd inverse2_real(const Eigen::MatrixXcd& spectrum) {
  const Eigen::Index rows = spectrum.rows();
  const Eigen::Index cols = spectrum.cols();
  Eigen::FFT<double> engine;
  Eigen::MatrixXcd work(rows, cols);

  std::vector<std::complex<double>> cin(cols);
  std::vector<std::complex<double>> cbuf;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) cin[c] = spectrum(r, c);
    engine.inv(cbuf, cin);
    for (Eigen::Index c = 0; c < cols; ++c) work(r, c) = cbuf[c];
  }

  Eigen::MatrixXd out(rows, cols);
  std::vector<std::complex<double>> col(rows);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) col[r] = work(r, c);
    engine.inv(cbuf, col);
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = cbuf[r].real();
  }
  return out;
}

} // namespace flipst::fft
