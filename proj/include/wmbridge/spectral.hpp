#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "wmbridge/grid.hpp"

namespace wmb {

using cplx = std::complex<double>;

enum class FftDirection { forward, backward };

/// Unnormalised in-place DFT of a 1-D array. Forward uses exp(-i...),
/// backward exp(+i...). Plans are cached and execution is thread-safe.
void fft(std::span<cplx> data, FftDirection direction);

/// Unnormalised in-place DFT along one axis of a row-major array of the
/// given shape (rank 1 to 4).
void fft_axis(std::span<cplx> data, std::span<const std::size_t> shape, std::size_t axis, FftDirection direction);

/// d^order f / dx^order on a periodic grid, by FFT. The Nyquist bin is
/// dropped for odd orders so real input stays real.
std::vector<cplx> spectral_derivative(std::span<const cplx> values, const Grid1D& grid, int order);
std::vector<double> spectral_derivative(std::span<const double> values, const Grid1D& grid, int order);

/// Samples f(x + shift) from samples of f(x) by band-limited interpolation.
std::vector<cplx> fourier_shift(std::span<const cplx> values, const Grid1D& grid, double shift);

/// Centred DFT: out[m] = sum_k in[k] * exp(sign * 2*pi*i*(k-n/2)*(m-n/2)/n).
/// `sign` is +1 or -1.
void centered_dft(std::span<const cplx> in, std::span<cplx> out, int sign);

/// Index i of a length-n periodic axis advanced by `offset` (may be negative).
inline std::size_t wrap_index(long long i, std::size_t n) {
  const auto len = static_cast<long long>(n);
  long long r = i % len;
  if (r < 0) r += len;
  return static_cast<std::size_t>(r);
}

}  // namespace wmb
