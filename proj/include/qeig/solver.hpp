#pragma once
// Classical reference eigensolvers and coarse-to-fine state preparation.
//
// eig_dense: full dense diagonalization, the oracle for everything else.
// eig_lowest_krylov: shift-invert Lanczos with full reorthogonalization;
// iterate counts are recorded so the classical-baseline cost scaling can be
// measured rather than asserted. Masked operators are solved on their
// retained submatrix and re-embedded, so the eigenvalue-0 modes of deleted
// points never appear in results.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "qeig/discretize.hpp"
#include "qeig/fft.hpp"

namespace qeig {

struct EigenSystem {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXd vectors;   // columns, orthonormal, zero on deleted points
};

namespace detail {

inline std::vector<Eigen::Index> retained_indices(const DiscretizedOperator& op)
{
    std::vector<Eigen::Index> idx;
    idx.reserve(std::size_t(op.side()));
    for (Eigen::Index g = 0; g < op.side(); ++g)
        if (op.point_retained(g)) idx.push_back(g);
    return idx;
}

inline SparseMat retained_submatrix(const DiscretizedOperator& op, const std::vector<Eigen::Index>& idx)
{
    if (!op.has_mask()) return op.matrix;
    std::vector<Eigen::Index> pos(std::size_t(op.side()), -1);
    for (std::size_t i = 0; i < idx.size(); ++i) pos[std::size_t(idx[i])] = Eigen::Index(i);
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < op.matrix.outerSize(); ++k)
        for (SparseMat::InnerIterator it(op.matrix, k); it; ++it) {
            const Eigen::Index r = pos[std::size_t(it.row())];
            const Eigen::Index c = pos[std::size_t(it.col())];
            if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
        }
    SparseMat sub(Eigen::Index(idx.size()), Eigen::Index(idx.size()));
    sub.setFromTriplets(trip.begin(), trip.end());
    return sub;
}

}

inline EigenSystem eig_dense(const DiscretizedOperator& op)
{
    const auto idx = detail::retained_indices(op);
    const Eigen::MatrixXd sub = Eigen::MatrixXd(detail::retained_submatrix(op, idx));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_dense: dense eigensolver failed to converge");
    EigenSystem out;
    out.values = es.eigenvalues();
    if (!op.has_mask()) {
        out.vectors = es.eigenvectors();
    } else {
        out.vectors = Eigen::MatrixXd::Zero(op.side(), Eigen::Index(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            out.vectors.row(idx[i]) = es.eigenvectors().row(Eigen::Index(i));
    }
    return out;
}

struct KrylovOptions {
    double tolerance = 1e-10;
    int max_iterations = 500;
};

struct KrylovResult {
    double value = 0.0;
    Eigen::VectorXd vector;        // embedded, unit norm
    double shift_used = 0.0;
    bool shift_perturbed = false;  // the requested shift was singular and was nudged
    int iterations = 0;
    double residual = 0.0;
    std::uint64_t counted_ops = 0; // multiply-add level work in factorization and iteration
};

// Shift-invert Lanczos targeting the eigenpair closest to mu.
inline KrylovResult eig_lowest_krylov(const DiscretizedOperator& op, double mu,
                                      KrylovOptions opts = {})
{
    const auto idx = detail::retained_indices(op);
    const SparseMat sub = detail::retained_submatrix(op, idx);
    const Eigen::Index n = sub.rows();
    if (n == 0) throw std::invalid_argument("eig_lowest_krylov: empty operator");

    KrylovResult res;
    res.shift_used = mu;

    SparseMat ident(n, n);
    ident.setIdentity();

    Eigen::SparseLU<SparseMat> lu;
    double shift = mu;
    const double base_nudge = 1e-8 * (1.0 + std::abs(mu));
    for (int attempt = 0;; ++attempt) {
        SparseMat shifted = sub - shift * ident;
        shifted.makeCompressed();
        lu.compute(shifted);
        bool ok = (lu.info() == Eigen::Success);
        if (ok) {
            // a factorization that "succeeded" on a numerically singular matrix
            // still shows up as a garbage solve
            Eigen::VectorXd probe = Eigen::VectorXd::Ones(n).normalized();
            Eigen::VectorXd sol = lu.solve(probe);
            ok = sol.allFinite() && (shifted * sol - probe).norm() <= 1e-6;
        }
        if (ok) break;
        if (attempt >= 4)
            throw std::runtime_error("eig_lowest_krylov: shift remains singular after perturbation");
        shift = mu + base_nudge * std::pow(10.0, attempt);
        res.shift_perturbed = true;
    }
    res.shift_used = shift;
    res.counted_ops += std::uint64_t(lu.nnzL() + lu.nnzU());

    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = 1.0 + 0.25 * (double(rng() >> 11) * 0x1.0p-53 - 0.5);
    v.normalize();

    std::vector<Eigen::VectorXd> basis{v};
    std::vector<double> alpha, beta;
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);

    for (int j = 0; j < opts.max_iterations; ++j) {
        Eigen::VectorXd w = lu.solve(basis.back());
        res.counted_ops += std::uint64_t(2 * (lu.nnzL() + lu.nnzU()));
        if (!w.allFinite())
            throw std::runtime_error("eig_lowest_krylov: linear solve produced non-finite values");
        if (j > 0) w -= beta[std::size_t(j - 1)] * prev;
        const double a = basis.back().dot(w);
        w -= a * basis.back();
        alpha.push_back(a);
        // full reorthogonalization; the operation counter charges 2n per basis vector
        for (const auto& q : basis) w -= q.dot(w) * q;
        res.counted_ops += std::uint64_t((4 + 4 * basis.size()) * std::size_t(n));

        const double b = w.norm();

        // Ritz extraction from the tridiagonal section
        const int m = int(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha[std::size_t(i)];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[std::size_t(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(t);
        int best = 0;
        for (int i = 1; i < m; ++i)
            if (std::abs(tes.eigenvalues()[i]) > std::abs(tes.eigenvalues()[best])) best = i;
        const double theta = tes.eigenvalues()[best];
        if (theta != 0.0) {
            Eigen::VectorXd y = tes.eigenvectors().col(best);
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < m; ++i) x += y[i] * basis[std::size_t(i)];
            x.normalize();
            const double lam = shift + 1.0 / theta;
            const double rnorm = (sub * x - lam * x).norm();
            res.counted_ops += std::uint64_t(2 * sub.nonZeros()) + std::uint64_t(4 * n);
            if (rnorm <= opts.tolerance * std::max(1.0, std::abs(lam))) {
                res.value = lam;
                res.iterations = j + 1;
                res.residual = rnorm;
                if (!op.has_mask()) {
                    res.vector = x;
                } else {
                    res.vector = Eigen::VectorXd::Zero(op.side());
                    for (std::size_t i = 0; i < idx.size(); ++i) res.vector[idx[i]] = x[Eigen::Index(i)];
                }
                return res;
            }
        }

        if (b < 1e-14 || j + 1 >= opts.max_iterations || Eigen::Index(basis.size()) >= n) break;
        beta.push_back(b);
        prev = basis.back();
        basis.push_back(w / b);
    }
    throw std::runtime_error("eig_lowest_krylov: no convergence within the iteration cap");
}

inline double rayleigh_quotient(const DiscretizedOperator& op, const Eigen::VectorXd& x)
{
    const double nn = x.squaredNorm();
    if (nn <= 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
    return x.dot(op.matrix * x) / nn;
}

inline double rayleigh_quotient(const DiscretizedOperator& op, const Eigen::VectorXcd& x)
{
    const double nn = x.squaredNorm();
    if (nn <= 0.0) throw std::invalid_argument("rayleigh_quotient: zero vector");
    return (x.adjoint() * (op.matrix * x))(0).real() / nn;
}

inline double overlap(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    return std::abs((a.adjoint() * b)(0));
}

inline double overlap(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return std::abs(a.dot(b));
}

namespace detail {

// one-axis unitary-DFT zero-padding embed: length n0 -> n (both powers of two)
inline void prolong_axis(const std::vector<std::complex<double>>& in,
                         std::vector<std::complex<double>>& out)
{
    const std::size_t n0 = in.size(), n = out.size();
    std::vector<std::complex<double>> spec(in);
    fft_pow2(spec.data(), n0, -1);
    const double fwd = 1.0 / std::sqrt(double(n0));
    for (auto& c : spec) c *= fwd;
    std::vector<std::complex<double>> pad(n, {0.0, 0.0});
    for (std::size_t k = 0; k < n0 / 2; ++k) pad[k] = spec[k];
    for (std::size_t k = 1; k < n0 / 2; ++k) pad[n - k] = spec[n0 - k];
    // Nyquist mode split across +/- N0/2 keeps real inputs real
    pad[n0 / 2] += 0.5 * spec[n0 / 2];
    pad[n - n0 / 2] += 0.5 * spec[n0 / 2];
    fft_pow2(pad.data(), n, +1);
    const double inv = 1.0 / std::sqrt(double(n));
    for (std::size_t i = 0; i < n; ++i) out[i] = pad[i] * inv;
}

}

// Fourier zero-padding prolongation from an N0 grid to an N grid, axis by axis.
// Unit norm in, unit norm out.
inline Eigen::VectorXcd prolong_state(const Eigen::VectorXcd& coarse, int D,
                                      Eigen::Index N0, Eigen::Index N)
{
    require_grid_size(N0, "prolong_state");
    require_grid_size(N, "prolong_state");
    if (N < N0) throw std::invalid_argument("prolong_state: target grid is coarser than the source");
    Eigen::Index c_side = 1;
    for (int d = 0; d < D; ++d) c_side *= N0;
    if (coarse.size() != c_side)
        throw std::invalid_argument("prolong_state: state length is not N0^D");
    if (std::abs(coarse.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("prolong_state: input state must have unit norm");
    if (N == N0) return coarse;

    // expand one axis at a time, most significant first
    std::vector<std::complex<double>> cur(coarse.data(), coarse.data() + coarse.size());
    Eigen::Index done = 1;      // product of already-expanded axis sizes
    Eigen::Index todo = c_side; // product of not-yet-expanded sizes
    for (int axis = 0; axis < D; ++axis) {
        todo /= N0;
        std::vector<std::complex<double>> next(std::size_t(done * N * todo));
        std::vector<std::complex<double>> line0(static_cast<std::size_t>(N0));
        std::vector<std::complex<double>> line1(static_cast<std::size_t>(N));
        for (Eigen::Index hi = 0; hi < done; ++hi)
            for (Eigen::Index lo = 0; lo < todo; ++lo) {
                for (Eigen::Index x = 0; x < N0; ++x)
                    line0[std::size_t(x)] = cur[std::size_t((hi * N0 + x) * todo + lo)];
                detail::prolong_axis(line0, line1);
                for (Eigen::Index x = 0; x < N; ++x)
                    next[std::size_t((hi * N + x) * todo + lo)] = line1[std::size_t(x)];
            }
        cur.swap(next);
        done *= N;
    }
    Eigen::VectorXcd out = Eigen::Map<Eigen::VectorXcd>(cur.data(), Eigen::Index(cur.size()));
    out /= out.norm();
    return out;
}

inline Eigen::VectorXcd prolong_state(const Eigen::VectorXd& coarse, int D,
                                      Eigen::Index N0, Eigen::Index N)
{
    return prolong_state(Eigen::VectorXcd(coarse.cast<std::complex<double>>()), D, N0, N);
}

struct InitialGuess {
    Eigen::VectorXcd vector;
    Eigen::Index coarse_points = 0;   // N0
    double predicted_overlap = 0.0;   // squared-overlap estimate 1 - 1/N0^2
};

// Coarse-grid ground state (or excited state f) prolonged to the fine grid.
inline InitialGuess coarse_guess(const TensorOperatorSpec& spec, Eigen::Index N0, Eigen::Index N,
                                 Eigen::Index f = 0, SamplingMode mode = SamplingMode::Spectral)
{
    const DiscretizedOperator coarse_op = build_operator_tensor(spec, N0, mode);
    const EigenSystem sys = eig_dense(coarse_op);
    if (f < 0 || f >= sys.values.size())
        throw std::invalid_argument("coarse_guess: eigenpair index out of range");
    InitialGuess g;
    g.coarse_points = N0;
    g.vector = prolong_state(Eigen::VectorXd(sys.vectors.col(f)), spec.dimension, N0, N);
    g.predicted_overlap = std::max(0.0, 1.0 - 1.0 / (double(N0) * double(N0)));
    return g;
}

}
