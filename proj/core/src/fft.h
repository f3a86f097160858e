#ifndef STA_SRC_FFT_H_
#define STA_SRC_FFT_H_

#include <complex>
#include <span>

namespace sta::internal {

// Unnormalized 2-D DFT over a row-major rows x cols grid:
//   forward: X[k] = sum_n x[n] exp(-2*pi*i*k.n/N)
//   inverse: same with +i, no 1/N scaling.
// `in` and `out` must not alias.
void Dft2d(std::span<const std::complex<double>> in,
           std::span<std::complex<double>> out, int rows, int cols,
           bool inverse);

}  // namespace sta::internal

#endif  // STA_SRC_FFT_H_
