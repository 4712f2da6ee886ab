#ifndef QDM_FFT2_HPP
#define QDM_FFT2_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace qdm {

/// Unnormalized forward 2D FFT (row/column composition of 1D transforms).
Eigen::ArrayXXcd fft2(const Eigen::ArrayXXd& in);

/// Inverse 2D FFT with 1/N normalization; returns the real part.
Eigen::ArrayXXd ifft2_real(const Eigen::ArrayXXcd& in);

/// Angular spatial frequencies (rad/m) for an n-point axis of spacing
/// `pitch`, in FFT order (non-negative first, then negative).
std::vector<double> fft_freqs(int n, double pitch);

/// Smallest size >= n whose prime factors are all in {2, 3, 5}.
int good_fft_size(int n);

}  // namespace qdm

#endif
