#include "dsmt/fft.hpp"

#include <cmath>
#include <numbers>

#include "dsmt/errors.hpp"

namespace dsmt::fftx {

namespace {

using cd = std::complex<double>;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// iterative radix-2 Cooley-Tukey, n must be a power of two
void fft_pow2(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    if (n < 2) return;
    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const cd wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                const cd u = a[i + j];
                const cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein's algorithm: express the length-n DFT as a convolution and
// evaluate it with power-of-two FFTs
void fft_bluestein(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    // chirp w[k] = exp(sign*i*pi*k^2/n); reduce k^2 mod 2n to keep the angle
    // argument small and exact
    std::vector<cd> w(n);
    for (size_t k = 0; k < n; ++k) {
        const size_t k2 = (k * k) % (2 * n);
        const double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        w[k] = cd(std::cos(ang), std::sin(ang));
    }
    const size_t m = next_pow2(2 * n - 1);
    std::vector<cd> fa(m), fb(m);
    for (size_t k = 0; k < n; ++k) fa[k] = a[k] * w[k];
    for (size_t k = 0; k < n; ++k) {
        fb[k] = std::conj(w[k]);
        if (k != 0) fb[m - k] = std::conj(w[k]);
    }
    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    fft_pow2(fa, true);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (size_t k = 0; k < n; ++k) a[k] = fa[k] * inv_m * w[k];
}

} // namespace

void fft(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    if (n < 2) return;
    if (is_pow2(n))
        fft_pow2(a, inverse);
    else
        fft_bluestein(a, inverse);
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (cd& v : a) v *= inv_n;
    }
}

std::vector<double> periodogram(const std::vector<double>& x) {
    const size_t n = x.size();
    if (n == 0) return {};
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<cd> a(n);
    for (size_t i = 0; i < n; ++i) a[i] = cd(x[i] - mean, 0.0);
    fft(a);
    std::vector<double> p(n / 2 + 1);
    for (size_t k = 0; k < p.size(); ++k) p[k] = std::norm(a[k]) / static_cast<double>(n);
    return p;
}

} // namespace dsmt::fftx
