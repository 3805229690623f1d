#pragma once
// Register-level simulation of the eigenvalue-estimation circuit: an
// accumulator register holding the spatial state (N^D amplitudes) and an
// index register of M bins in the most significant position. The flattened
// state index is g = l * N^D + x for bin l and grid point x. The protocol is
// load -> uniform index superposition -> controlled step powers (bin l sees
// the step l times) -> index-register Fourier transform with kernel
// (1/sqrt(M)) exp(-2 pi i l m / M) -> measurement of the index register.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qeig/fft.hpp"
#include "qeig/splitting.hpp"

namespace qeig {

struct RegisterLayout {
    int dimension = 1;
    Eigen::Index points_per_axis = 0;
    Eigen::Index bins = 0;           // M, power of two
    Eigen::Index accumulator_dim = 0; // N^D

    static RegisterLayout make(int dimension, Eigen::Index points_per_axis, Eigen::Index bins)
    {
        if (dimension < 1) throw std::invalid_argument("RegisterLayout: dimension must be >= 1");
        require_grid_size(points_per_axis, "RegisterLayout");
        if (bins < 2 || !is_pow2(std::size_t(bins)))
            throw std::invalid_argument("RegisterLayout: bin count must be a power of two >= 2");
        RegisterLayout l;
        l.dimension = dimension;
        l.points_per_axis = points_per_axis;
        l.bins = bins;
        l.accumulator_dim = 1;
        for (int d = 0; d < dimension; ++d) {
            l.accumulator_dim *= points_per_axis;
            if (l.accumulator_dim > (Eigen::Index(1) << 24))
                throw std::invalid_argument("RegisterLayout: accumulator exceeds the desk-scale bound 2^24");
        }
        if (l.bins * l.accumulator_dim > (Eigen::Index(1) << 24))
            throw std::invalid_argument("RegisterLayout: total state exceeds the desk-scale bound 2^24");
        return l;
    }

    Eigen::Index total_dim() const { return bins * accumulator_dim; }
    int accumulator_qubits() const { return dimension * log2_exact(std::size_t(points_per_axis)); }
    int index_qubits() const { return log2_exact(std::size_t(bins)); }
};

enum class Stage { Loaded, Superposed, Powered, Transformed };

struct StateVector {
    RegisterLayout layout;
    Eigen::VectorXcd amplitudes;
    Stage stage = Stage::Loaded;

    Eigen::VectorXcd slice(Eigen::Index bin) const
    {
        return amplitudes.segment(bin * layout.accumulator_dim, layout.accumulator_dim);
    }
};

inline StateVector load_accumulator(const RegisterLayout& layout, const Eigen::VectorXcd& psi)
{
    if (psi.size() != layout.accumulator_dim)
        throw std::invalid_argument("load_accumulator: state length does not match the accumulator");
    if (std::abs(psi.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("load_accumulator: input state must be unit norm");
    StateVector s;
    s.layout = layout;
    s.amplitudes = Eigen::VectorXcd::Zero(layout.total_dim());
    s.amplitudes.head(layout.accumulator_dim) = psi;
    s.stage = Stage::Loaded;
    return s;
}

inline void index_superposition(StateVector& state)
{
    if (state.stage != Stage::Loaded)
        throw std::logic_error("index_superposition: state is not freshly loaded");
    const auto acc = state.layout.accumulator_dim;
    const double outside = state.amplitudes.tail(state.amplitudes.size() - acc).norm();
    if (outside > 1e-12)
        throw std::logic_error("index_superposition: index register is not in the zero state");
    const Eigen::VectorXcd psi = state.amplitudes.head(acc) / std::sqrt(double(state.layout.bins));
    for (Eigen::Index l = 0; l < state.layout.bins; ++l)
        state.amplitudes.segment(l * acc, acc) = psi;
    state.stage = Stage::Superposed;
}

// Bin l accumulates l applications of the step: sweep j' = 1..M-1 applying
// one step to every bin >= j'.
inline void controlled_powers(StateVector& state, const UnitaryStep& step)
{
    if (state.stage != Stage::Superposed)
        throw std::logic_error("controlled_powers: index register is not in superposition");
    if (step.plan.side != state.layout.accumulator_dim)
        throw std::invalid_argument("controlled_powers: step does not act on the accumulator");
    const auto acc = state.layout.accumulator_dim;
    const auto M = state.layout.bins;
    const double work = double(M) * double(M) * double(acc);
    if (work > double(Eigen::Index(1) << 36))
        throw std::invalid_argument("controlled_powers: M^2 N^D exceeds the desk-scale time bound 2^36");
    for (Eigen::Index jp = 1; jp < M; ++jp)
        for (Eigen::Index j = jp; j < M; ++j)
            step.apply(state.amplitudes.data() + j * acc);
    state.stage = Stage::Powered;
}

namespace detail {

inline void index_fourier(StateVector& state, int sign)
{
    const auto acc = state.layout.accumulator_dim;
    const auto M = state.layout.bins;
    std::vector<std::complex<double>> col(static_cast<std::size_t>(M));
    const double scale = 1.0 / std::sqrt(double(M));
    for (Eigen::Index x = 0; x < acc; ++x) {
        for (Eigen::Index j = 0; j < M; ++j) col[std::size_t(j)] = state.amplitudes[j * acc + x];
        fft_pow2(col.data(), std::size_t(M), sign);
        for (Eigen::Index j = 0; j < M; ++j) state.amplitudes[j * acc + x] = col[std::size_t(j)] * scale;
    }
}

}

inline void qft_index(StateVector& state)
{
    if (state.stage != Stage::Powered)
        throw std::logic_error("qft_index: controlled powers have not been applied");
    detail::index_fourier(state, -1);
    state.stage = Stage::Transformed;
}

inline void qft_index_inverse(StateVector& state)
{
    if (state.stage != Stage::Transformed)
        throw std::logic_error("qft_index_inverse: state is not transformed");
    detail::index_fourier(state, +1);
    state.stage = Stage::Powered;
}

// Closed-form bin distribution for a single eigenphase lambda tau:
// p_l = sin^2(M d/2) / (M^2 sin^2(d/2)) with d = 2 pi l / M - lambda tau.
inline std::vector<double> index_distribution_analytic(double lambda, double tau, Eigen::Index M)
{
    std::vector<double> p(static_cast<std::size_t>(M));
    const double phase = lambda * tau;
    for (Eigen::Index l = 0; l < M; ++l) {
        double d = 2.0 * std::numbers::pi * double(l) / double(M) - phase;
        d = std::remainder(d, 2.0 * std::numbers::pi);
        const double q = std::sin(d / 2.0);
        if (q == 0.0) {
            p[std::size_t(l)] = 1.0;
        } else {
            const double r = std::sin(double(M) * d / 2.0) / (double(M) * q);
            p[std::size_t(l)] = r * r;
        }
    }
    return p;
}

// minimal peak probability guaranteed for the best bin: 1 / (M^2 sin^2(pi / 2M))
inline double peak_probability_bound(Eigen::Index M)
{
    const double s = std::sin(std::numbers::pi / (2.0 * double(M)));
    return 1.0 / (double(M) * double(M) * s * s);
}

struct MeasurementRecord {
    std::vector<double> probabilities; // exact marginal over bins
    std::vector<std::int64_t> counts;  // empty when samples == 0
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

inline MeasurementRecord measure_index(const StateVector& state, std::int64_t samples = 0,
                                       std::uint64_t seed = 0)
{
    if (state.stage != Stage::Transformed)
        throw std::logic_error("measure_index: index register has not been transformed");
    const auto acc = state.layout.accumulator_dim;
    const auto M = state.layout.bins;
    MeasurementRecord rec;
    rec.samples = samples;
    rec.seed = seed;
    rec.probabilities.resize(std::size_t(M));
    for (Eigen::Index l = 0; l < M; ++l)
        rec.probabilities[std::size_t(l)] = state.amplitudes.segment(l * acc, acc).squaredNorm();
    if (samples > 0) {
        std::vector<double> cdf(static_cast<std::size_t>(M));
        double run = 0.0;
        for (Eigen::Index l = 0; l < M; ++l) {
            run += rec.probabilities[std::size_t(l)];
            cdf[std::size_t(l)] = run;
        }
        rec.counts.assign(std::size_t(M), 0);
        std::mt19937_64 rng(seed);
        for (std::int64_t s = 0; s < samples; ++s) {
            const double u = double(rng() >> 11) * 0x1.0p-53 * run;
            const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            const auto l = std::min<std::size_t>(std::size_t(it - cdf.begin()), std::size_t(M - 1));
            ++rec.counts[l];
        }
    }
    return rec;
}

struct DecodedPhase {
    Eigen::Index bin = 0;
    double theta = 0.0;       // principal-branch phase in (-pi, pi]
    double lambda = 0.0;      // theta / tau
    double half_width = 0.0;  // pi / (M tau), half of one bin in eigenvalue units
};

inline DecodedPhase decode_phase(Eigen::Index bin, Eigen::Index M, double tau)
{
    if (bin < 0 || bin >= M) throw std::invalid_argument("decode_phase: bin out of range");
    if (tau == 0.0) throw std::invalid_argument("decode_phase: tau must be nonzero");
    DecodedPhase d;
    d.bin = bin;
    d.theta = 2.0 * std::numbers::pi * double(bin) / double(M);
    if (bin > M / 2) d.theta -= 2.0 * std::numbers::pi;
    d.lambda = d.theta / tau;
    d.half_width = std::numbers::pi / (double(M) * tau);
    return d;
}

// accumulator state conditioned on observing a given index bin
inline Eigen::VectorXcd collapse_accumulator(const StateVector& state, Eigen::Index bin)
{
    if (state.stage != Stage::Transformed)
        throw std::logic_error("collapse_accumulator: index register has not been transformed");
    if (bin < 0 || bin >= state.layout.bins)
        throw std::invalid_argument("collapse_accumulator: bin out of range");
    Eigen::VectorXcd s = state.slice(bin);
    const double nrm = s.norm();
    if (nrm < 1e-150)
        throw std::invalid_argument("collapse_accumulator: the selected bin carries no probability");
    return s / nrm;
}

// overlap of a grid state with its spatial reflection x -> (N - x) mod N per axis
inline double reflection_overlap(const Eigen::VectorXcd& psi, Eigen::Index N, int D)
{
    Eigen::Index dim = 1;
    for (int d = 0; d < D; ++d) dim *= N;
    if (psi.size() != dim) throw std::invalid_argument("reflection_overlap: length mismatch");
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index g = 0; g < dim; ++g) {
        Eigen::Index rest = g, refl = 0;
        Eigen::Index stride = dim;
        for (int d = 0; d < D; ++d) {
            stride /= N;
            const Eigen::Index x = rest / stride;
            rest %= stride;
            refl += ((N - x) % N) * stride;
        }
        acc += std::conj(psi[refl]) * psi[g];
    }
    return std::abs(acc);
}

struct PhaseEstimationParams {
    Eigen::Index bins = 64;       // M
    double tau = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    double shift_mu = 0.0;        // diagonal shift folded into the step, removed on decode
    bool compute_reflection = false;
};

struct PhaseEstimateResult {
    std::vector<double> distribution;
    std::vector<std::int64_t> counts;
    Eigen::Index peak_bin = 0;
    double peak_probability = 0.0;
    DecodedPhase peak_decoded;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    double shift_mu = 0.0;
    double tau = 0.0;
    Eigen::Index bins = 0;
    int order_nu = 2;
    double reflection_overlap = -1.0; // negative when not requested
};

namespace detail {

inline SplitPlan shifted_plan(const SplitPlan& plan, double mu)
{
    if (mu == 0.0) return plan;
    SplitPlan out = plan;
    if (out.parts.empty() || out.parts.front().kind != SplitPart::Kind::Diagonal) {
        SplitPart d;
        d.kind = SplitPart::Kind::Diagonal;
        d.side = out.side;
        d.scale = out.scale;
        d.values = Eigen::VectorXd::Zero(out.side);
        out.parts.insert(out.parts.begin(), std::move(d));
    }
    out.parts.front().values.array() += mu / out.parts.front().scale;
    return out;
}

}

inline PhaseEstimateResult run_phase_estimation(const SplitPlan& plan, const Eigen::VectorXcd& psi,
                                                const PhaseEstimationParams& params)
{
    if (params.tau == 0.0) throw std::invalid_argument("run_phase_estimation: tau must be set");
    const RegisterLayout layout =
        RegisterLayout::make(plan.dimension, plan.points_per_axis, params.bins);
    if (layout.accumulator_dim != plan.side)
        throw std::invalid_argument("run_phase_estimation: plan does not act on the accumulator");

    const SplitPlan shifted = detail::shifted_plan(plan, params.shift_mu);
    const UnitaryStep step = make_step(shifted, params.tau);

    StateVector state = load_accumulator(layout, psi);
    index_superposition(state);
    controlled_powers(state, step);
    qft_index(state);

    const MeasurementRecord rec = measure_index(state, params.samples, params.seed);

    PhaseEstimateResult out;
    out.distribution = rec.probabilities;
    out.counts = rec.counts;
    out.samples = rec.samples;
    out.seed = rec.seed;
    out.shift_mu = params.shift_mu;
    out.tau = params.tau;
    out.bins = params.bins;
    out.order_nu = plan.order_nu;
    out.peak_bin = Eigen::Index(
        std::max_element(rec.probabilities.begin(), rec.probabilities.end()) - rec.probabilities.begin());
    out.peak_probability = rec.probabilities[std::size_t(out.peak_bin)];
    out.peak_decoded = decode_phase(out.peak_bin, params.bins, params.tau);
    out.peak_decoded.lambda -= params.shift_mu;
    if (params.compute_reflection) {
        const Eigen::VectorXcd collapsed = collapse_accumulator(state, out.peak_bin);
        out.reflection_overlap = reflection_overlap(collapsed, plan.points_per_axis, plan.dimension);
    }
    return out;
}

}
