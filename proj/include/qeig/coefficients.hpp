#pragma once
// Periodic coefficient functions on the unit interval and their grid sampling.
//
// Three families are supported:
//   Constant       parameters {c}
//   FourierSeries  parameters {a0, a1, b1, a2, b2, ...}
//                  c(x) = a0 + sum_k [ a_k cos(2 pi k x) + b_k sin(2 pi k x) ]
//   Polynomial     parameters {p0, p1, ...},  c(x) = sum_j p_j x^j on [0,1),
//                  extended periodically; accepted only if the extension is
//                  C^s at the seam for the declared smoothness order s.
//
// Sampling modes: Spectral keeps the exact Fourier modes |k| <= N/2 of c and
// evaluates their sum on the grid (the default); Pointwise evaluates c(x) at
// the grid points directly. The two agree exactly when c is band-limited
// below the grid Nyquist.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qeig/fft.hpp"

namespace qeig {

enum class CoeffKind { Constant, FourierSeries, Polynomial };
enum class SamplingMode { Spectral, Pointwise };

namespace detail {

// integral of x^j exp(-2 pi i k x) over [0,1], by parts:
//   I_0(k) = 0 for k != 0, I_j(0) = 1/(j+1),
//   I_j(k) = (j I_{j-1}(k) - 1) / (2 pi i k)
inline std::complex<double> poly_mode_integral(int j, long k)
{
    if (k == 0) return {1.0 / double(j + 1), 0.0};
    const std::complex<double> den(0.0, 2.0 * std::numbers::pi * double(k));
    std::complex<double> acc(0.0, 0.0);
    for (int t = 1; t <= j; ++t)
        acc = (double(t) * acc - 1.0) / den;
    return acc;
}

}

struct CoefficientFn {
    static constexpr int unbounded_smoothness = 1 << 20;

    CoeffKind kind = CoeffKind::Constant;
    std::vector<double> parameters{0.0};
    int smoothness_order = unbounded_smoothness;

    static CoefficientFn constant(double c)
    {
        CoefficientFn f;
        f.kind = CoeffKind::Constant;
        f.parameters = {c};
        f.validate();
        return f;
    }

    // params = {a0, a1, b1, a2, b2, ...}
    static CoefficientFn fourier(std::vector<double> params)
    {
        CoefficientFn f;
        f.kind = CoeffKind::FourierSeries;
        f.parameters = std::move(params);
        f.validate();
        return f;
    }

    // params = {p0, p1, ...}; rejected unless periodic up to derivative order s
    static CoefficientFn polynomial(std::vector<double> params, int s)
    {
        CoefficientFn f;
        f.kind = CoeffKind::Polynomial;
        f.parameters = std::move(params);
        f.smoothness_order = s;
        f.validate();
        return f;
    }

    int harmonic_count() const
    {
        return kind == CoeffKind::FourierSeries ? int((parameters.size() - 1 + 1) / 2) : 0;
    }

    // largest |k| carrying a Fourier mode, or -1 when unbounded
    int band_limit() const
    {
        switch (kind) {
            case CoeffKind::Constant: return 0;
            case CoeffKind::FourierSeries: return harmonic_count();
            case CoeffKind::Polynomial:
                return parameters.size() <= 1 ? 0 : -1;
        }
        return -1;
    }

    double value(double x) const
    {
        switch (kind) {
            case CoeffKind::Constant:
                return parameters[0];
            case CoeffKind::FourierSeries: {
                double v = parameters[0];
                const int K = harmonic_count();
                for (int k = 1; k <= K; ++k) {
                    const double a = 2 * std::size_t(k) - 1 < parameters.size() ? parameters[2 * k - 1] : 0.0;
                    const double b = 2 * std::size_t(k) < parameters.size() ? parameters[2 * k] : 0.0;
                    v += a * std::cos(2.0 * std::numbers::pi * k * x) + b * std::sin(2.0 * std::numbers::pi * k * x);
                }
                return v;
            }
            case CoeffKind::Polynomial: {
                double v = 0.0;
                for (std::size_t j = parameters.size(); j-- > 0;)
                    v = v * x + parameters[j];
                return v;
            }
        }
        return 0.0;
    }

    // t-th derivative at x (used by the seam check)
    double derivative_value(double x, int t) const
    {
        switch (kind) {
            case CoeffKind::Constant:
                return t == 0 ? parameters[0] : 0.0;
            case CoeffKind::FourierSeries: {
                // term-by-term differentiation of a finite series
                double v = t == 0 ? parameters[0] : 0.0;
                const int K = harmonic_count();
                for (int k = 1; k <= K; ++k) {
                    const double a = 2 * std::size_t(k) - 1 < parameters.size() ? parameters[2 * k - 1] : 0.0;
                    const double b = 2 * std::size_t(k) < parameters.size() ? parameters[2 * k] : 0.0;
                    const double w = 2.0 * std::numbers::pi * k;
                    const double wt = std::pow(w, t);
                    const double ph = 0.5 * std::numbers::pi * t;
                    v += wt * (a * std::cos(w * x + ph) + b * std::sin(w * x + ph));
                }
                return v;
            }
            case CoeffKind::Polynomial: {
                double v = 0.0;
                for (std::size_t j = parameters.size(); j-- > std::size_t(t);) {
                    double c = parameters[j];
                    for (int r = 0; r < t; ++r) c *= double(j - r);
                    v = v * x + c;
                }
                return v;
            }
        }
        return 0.0;
    }

    // Fourier mode a~_k of the periodic extension
    std::complex<double> fourier_coefficient(long k) const
    {
        switch (kind) {
            case CoeffKind::Constant:
                return k == 0 ? std::complex<double>(parameters[0], 0.0) : 0.0;
            case CoeffKind::FourierSeries: {
                if (k == 0) return {parameters[0], 0.0};
                const long ak = std::labs(k);
                if (ak > harmonic_count()) return 0.0;
                const double a = 2 * std::size_t(ak) - 1 < parameters.size() ? parameters[2 * ak - 1] : 0.0;
                const double b = 2 * std::size_t(ak) < parameters.size() ? parameters[2 * ak] : 0.0;
                // a cos + b sin = (a - i b)/2 e^{i...} + (a + i b)/2 e^{-i...}
                return k > 0 ? std::complex<double>(a / 2.0, -b / 2.0)
                             : std::complex<double>(a / 2.0, b / 2.0);
            }
            case CoeffKind::Polynomial: {
                std::complex<double> acc(0.0, 0.0);
                for (std::size_t j = 0; j < parameters.size(); ++j)
                    if (parameters[j] != 0.0)
                        acc += parameters[j] * detail::poly_mode_integral(int(j), k);
                return acc;
            }
        }
        return 0.0;
    }

    void validate() const
    {
        if (parameters.empty())
            throw std::invalid_argument("coefficient: empty parameter list");
        for (double p : parameters)
            if (!std::isfinite(p))
                throw std::invalid_argument("coefficient: non-finite parameter");
        if (smoothness_order < 0)
            throw std::invalid_argument("coefficient: negative smoothness order");
        if (kind == CoeffKind::Polynomial) {
            // seam condition: c^{(t)}(0) = c^{(t)}(1) for t = 0..s
            const int tmax = std::min<int>(smoothness_order, int(parameters.size()));
            for (int t = 0; t <= tmax; ++t) {
                const double d = std::abs(derivative_value(0.0, t) - derivative_value(1.0, t));
                if (d > 1e-12)
                    throw std::invalid_argument(
                        "coefficient: polynomial is not periodic to derivative order " +
                        std::to_string(t) + " (seam mismatch " + std::to_string(d) + ")");
            }
        }
    }
};

// Grid samples a^{(N)} of a coefficient function, N a power of two.
inline Eigen::VectorXd sample_coefficients(const CoefficientFn& c, Eigen::Index N,
                                           SamplingMode mode = SamplingMode::Spectral)
{
    if (N < 2 || !is_pow2(std::size_t(N)))
        throw std::invalid_argument("sample_coefficients: N must be a power of two >= 2");
    Eigen::VectorXd out(N);
    if (mode == SamplingMode::Pointwise) {
        for (Eigen::Index i = 0; i < N; ++i)
            out[i] = c.value(double(i) / double(N));
    } else {
        // sum of the modes |k| <= N/2; the conjugate pair k and -k is folded into
        // a real term, and the Nyquist mode contributes its cosine part only
        // (its sine vanishes on the grid)
        const long half = long(N) / 2;
        const std::complex<double> a0 = c.fourier_coefficient(0);
        std::vector<std::complex<double>> modes(static_cast<std::size_t>(half));
        for (long k = 1; k <= half; ++k)
            modes[std::size_t(k - 1)] = c.fourier_coefficient(k);
        for (Eigen::Index i = 0; i < N; ++i) {
            double v = a0.real();
            for (long k = 1; k < half; ++k) {
                const double ang = 2.0 * std::numbers::pi * double(k) * double(i) / double(N);
                const auto m = modes[std::size_t(k - 1)];
                v += 2.0 * (m.real() * std::cos(ang) - m.imag() * std::sin(ang));
            }
            v += 2.0 * modes[std::size_t(half - 1)].real() * ((i % 2 == 0) ? 1.0 : -1.0);
            out[i] = v;
        }
    }
    for (Eigen::Index i = 0; i < N; ++i)
        if (!std::isfinite(out[i]))
            throw std::runtime_error("sample_coefficients: non-finite sample");
    return out;
}

}
