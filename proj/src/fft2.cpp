#include "qdm/fft2.hpp"

#include <unsupported/Eigen/FFT>

namespace qdm {

Eigen::ArrayXXcd fft2(const Eigen::ArrayXXd& in) {
  const int nx = static_cast<int>(in.rows());
  const int ny = static_cast<int>(in.cols());
  Eigen::ArrayXXcd out(nx, ny);
  Eigen::FFT<double> fft;
  Eigen::VectorXcd tmp(nx), ftmp(nx);
  // columns first (contiguous in the column-major array)
  for (int j = 0; j < ny; ++j) {
    tmp = in.col(j).matrix().cast<std::complex<double>>();
    fft.fwd(ftmp, tmp);
    out.col(j) = ftmp.array();
  }
  Eigen::VectorXcd row(ny), frow(ny);
  for (int i = 0; i < nx; ++i) {
    row = out.row(i).matrix().transpose();
    fft.fwd(frow, row);
    out.row(i) = frow.array().transpose();
  }
  return out;
}

Eigen::ArrayXXd ifft2_real(const Eigen::ArrayXXcd& in) {
  const int nx = static_cast<int>(in.rows());
  const int ny = static_cast<int>(in.cols());
  Eigen::ArrayXXcd work(nx, ny);
  Eigen::FFT<double> fft;
  Eigen::VectorXcd row(ny), frow(ny);
  for (int i = 0; i < nx; ++i) {
    row = in.row(i).matrix().transpose();
    fft.inv(frow, row);
    work.row(i) = frow.array().transpose();
  }
  Eigen::VectorXcd col(nx), fcol(nx);
  for (int j = 0; j < ny; ++j) {
    col = work.col(j).matrix();
    fft.inv(fcol, col);
    work.col(j) = fcol.array();
  }
  return work.real();
}

std::vector<double> fft_freqs(int n, double pitch) {
  std::vector<double> k(n);
  const double dk = 2.0 * M_PI / (n * pitch);
  for (int i = 0; i < n; ++i) {
    const int m = (i <= (n - 1) / 2) ? i : i - n;
    k[i] = m * dk;
  }
  return k;
}

int good_fft_size(int n) {
  if (n < 1) return 1;
  for (int s = n;; ++s) {
    int m = s;
    for (int p : {2, 3, 5})
      while (m % p == 0) m /= p;
    if (m == 1) return s;
  }
}

}  // namespace qdm
