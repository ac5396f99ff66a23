#pragma once

#include <complex>
#include <vector>

namespace dsmt::fftx {

// In-place complex DFT of arbitrary length: iterative radix-2 when the size
// is a power of two, Bluestein's chirp-z otherwise. `inverse` includes the
// 1/n scaling.
void fft(std::vector<std::complex<double>>& a, bool inverse = false);

// One-sided periodogram of a real signal: the mean is removed, then
// P[k] = |X_k|^2 / n for k = 0..floor(n/2). No taper window.
std::vector<double> periodogram(const std::vector<double>& x);

} // namespace dsmt::fftx
