#pragma once
// Iterative radix-2 complex FFT for power-of-two lengths.
// Natural-order input and output; bit reversal is internal.

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace qeig {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n)
{
    if (!is_pow2(n)) throw std::invalid_argument("log2_exact: not a power of two");
    int b = 0;
    while ((std::size_t{1} << b) < n) ++b;
    return b;
}

// sign = -1 applies the kernel exp(-2 pi i l m / n), sign = +1 its conjugate.
// No normalization; callers scale.
inline void fft_pow2(std::complex<double>* a, std::size_t n, int sign)
{
    if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = double(sign) * 2.0 * std::numbers::pi / double(len);
        const std::complex<double> wstep(std::cos(ang), std::sin(ang));
        for (std::size_t base = 0; base < n; base += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                // periodic resync keeps the accumulated twiddle error at the rounding level
                if ((k & 255u) == 0u && k != 0u)
                    w = std::polar(1.0, ang * double(k));
                const auto u = a[base + k];
                const auto v = a[base + k + len / 2] * w;
                a[base + k] = u + v;
                a[base + k + len / 2] = u - v;
                w *= wstep;
            }
        }
    }
}

}
