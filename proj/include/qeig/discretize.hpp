#pragma once
// Grid discretization of periodic bilinear-form operators.
//
// The difference operator is the forward difference
//   (D psi)_x = N (psi_{x+1 mod N} - psi_x),   D_s = D^s,
// and a 1D factor of order S assembles to the real symmetric matrix
//   L = sum_{s=0..S} D_s^T diag(a_s^{(N)}) D_s,
// positive semidefinite whenever every a_s >= 0. Tensor terms are Kronecker
// products of their axis factors, axis 0 most significant, and sum over terms.
// All index arithmetic is modulo N per axis, so wraparound couplings appear in
// the matrix corners.

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include "qeig/operator_spec.hpp"

namespace qeig {

using SparseMat = Eigen::SparseMatrix<double>;

inline void require_grid_size(Eigen::Index N, const char* who)
{
    if (N < 2 || !is_pow2(std::size_t(N)))
        throw std::invalid_argument(std::string(who) + ": points per axis must be a power of two >= 2");
}

// forward-difference power D_s, an N x N circulant band matrix
inline SparseMat finite_difference_matrix(Eigen::Index N, int s)
{
    require_grid_size(N, "finite_difference_matrix");
    if (s < 0) throw std::invalid_argument("finite_difference_matrix: negative order");
    SparseMat id(N, N);
    id.setIdentity();
    if (s == 0) return id;
    SparseMat d1(N, N);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(2 * N));
        for (Eigen::Index i = 0; i < N; ++i) {
            trip.emplace_back(i, i, -double(N));
            trip.emplace_back(i, (i + 1) % N, double(N));
        }
        d1.setFromTriplets(trip.begin(), trip.end());
    }
    SparseMat out = d1;
    for (int k = 1; k < s; ++k) out = (out * d1).eval();
    return out;
}

struct DiscretizedOperator {
    int dimension = 1;                 // D
    Eigen::Index points_per_axis = 0;  // N
    int order = 0;                     // max summed S over terms (2S = differential order)
    SparseMat matrix;                  // side N^D, real symmetric
    double norm_bound = 0.0;           // Gershgorin bound on the spectral radius

    // per-term axis factors, kept when built as a tensor sum (empty otherwise);
    // splitting colors these per axis
    struct TensorTerm {
        std::vector<DiscretizedOperator> factors;
    };
    std::vector<TensorTerm> tensor_terms;

    // domain mask flags, empty when no mask is applied; retained[g] == 0 marks a
    // deleted grid point whose row and column are zero (an eigenvalue-0 mode
    // solvers must skip)
    std::vector<std::uint8_t> retained;

    Eigen::Index side() const { return matrix.rows(); }
    bool has_mask() const { return !retained.empty(); }

    Eigen::Index retained_count() const
    {
        if (!has_mask()) return side();
        Eigen::Index n = 0;
        for (auto r : retained) n += r ? 1 : 0;
        return n;
    }

    bool point_retained(Eigen::Index g) const
    {
        return !has_mask() || retained[std::size_t(g)] != 0;
    }
};

namespace detail {

inline double gershgorin_bound(const SparseMat& m)
{
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(m.rows());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it)
            rowsum[it.row()] += std::abs(it.value());
    return rowsum.size() ? rowsum.maxCoeff() : 0.0;
}

// exact symmetrization; assembly by sparse products is symmetric up to rounding
inline SparseMat symmetrize(const SparseMat& m)
{
    SparseMat mt = SparseMat(m.transpose());
    SparseMat out = 0.5 * (m + mt);
    out.prune(0.0, 0.0);
    return out;
}

}

inline DiscretizedOperator build_operator_1d(const OperatorSpec1D& spec, Eigen::Index N,
                                             SamplingMode mode = SamplingMode::Spectral)
{
    spec.validate();
    require_grid_size(N, "build_operator_1d");
    SparseMat acc(N, N);
    for (int s = 0; s <= spec.order; ++s) {
        const Eigen::VectorXd a = sample_coefficients(spec.coefficients[std::size_t(s)], N, mode);
        const SparseMat ds = finite_difference_matrix(N, s);
        const SparseMat term = ds.transpose() * a.asDiagonal() * ds;
        acc = (s == 0) ? term : SparseMat(acc + term);
    }
    DiscretizedOperator op;
    op.dimension = 1;
    op.points_per_axis = N;
    op.order = spec.order;
    op.matrix = detail::symmetrize(acc);
    op.norm_bound = detail::gershgorin_bound(op.matrix);
    return op;
}

inline DiscretizedOperator build_operator_tensor(const TensorOperatorSpec& spec, Eigen::Index N,
                                                 SamplingMode mode = SamplingMode::Spectral)
{
    spec.validate();
    require_grid_size(N, "build_operator_tensor");
    const int D = spec.dimension;
    double sideq = std::pow(double(N), D);
    if (sideq > double(Eigen::Index(1) << 24))
        throw std::invalid_argument("build_operator_tensor: N^D exceeds the desk-scale bound 2^24");

    DiscretizedOperator op;
    op.dimension = D;
    op.points_per_axis = N;
    op.order = spec.total_order2() / 2;

    SparseMat total;
    for (const auto& term : spec.terms) {
        DiscretizedOperator::TensorTerm built;
        for (const auto& f : term) built.factors.push_back(build_operator_1d(f, N, mode));
        SparseMat prod = built.factors[0].matrix;
        for (std::size_t axis = 1; axis < built.factors.size(); ++axis)
            prod = Eigen::kroneckerProduct(prod, built.factors[axis].matrix).eval();
        total = (total.size() == 0) ? prod : SparseMat(total + prod);
        op.tensor_terms.push_back(std::move(built));
    }
    total.prune(0.0, 0.0);
    op.matrix = total;
    op.norm_bound = detail::gershgorin_bound(op.matrix);
    return op;
}

struct DomainMask {
    int dimension = 1;
    Eigen::Index points_per_axis = 0;
    std::vector<std::uint8_t> keep;   // size N^D, flattened axis-0-major

    static DomainMask from_predicate(int D, Eigen::Index N,
                                     const std::function<bool(const std::vector<Eigen::Index>&)>& inside)
    {
        require_grid_size(N, "DomainMask");
        DomainMask m;
        m.dimension = D;
        m.points_per_axis = N;
        Eigen::Index side = 1;
        for (int d = 0; d < D; ++d) side *= N;
        m.keep.assign(std::size_t(side), 0);
        std::vector<Eigen::Index> idx(std::size_t(D), 0);
        for (Eigen::Index g = 0; g < side; ++g) {
            Eigen::Index rem = g;
            for (int d = D - 1; d >= 0; --d) {
                idx[std::size_t(d)] = rem % N;
                rem /= N;
            }
            m.keep[std::size_t(g)] = inside(idx) ? 1 : 0;
        }
        return m;
    }

    Eigen::Index retained_count() const
    {
        Eigen::Index n = 0;
        for (auto k : keep) n += k ? 1 : 0;
        return n;
    }
};

// Zeroes the rows and columns of deleted points; indices are not compacted.
inline DiscretizedOperator apply_domain_mask(const DiscretizedOperator& op, const DomainMask& mask)
{
    if (mask.dimension != op.dimension || mask.points_per_axis != op.points_per_axis)
        throw std::invalid_argument("apply_domain_mask: mask geometry does not match the operator");
    if (Eigen::Index(mask.keep.size()) != op.side())
        throw std::invalid_argument("apply_domain_mask: mask size does not match the operator side");
    if (mask.retained_count() == 0)
        throw std::invalid_argument("apply_domain_mask: mask deletes every grid point");

    DiscretizedOperator out;
    out.dimension = op.dimension;
    out.points_per_axis = op.points_per_axis;
    out.order = op.order;
    out.retained = mask.keep;

    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < op.matrix.outerSize(); ++k)
        for (SparseMat::InnerIterator it(op.matrix, k); it; ++it)
            if (mask.keep[std::size_t(it.row())] && mask.keep[std::size_t(it.col())])
                trip.emplace_back(it.row(), it.col(), it.value());
    SparseMat m(op.side(), op.side());
    m.setFromTriplets(trip.begin(), trip.end());
    out.matrix = m;
    out.norm_bound = detail::gershgorin_bound(out.matrix);
    return out;
}

// Reciprocal-space form of a 1D factor on the mode set -N/2 <= k < N/2:
//   L~_{k,k'} = sum_s conj((2 pi i k)^s) a~_{s,k-k'} (2 pi i k')^s,
// Hermitian, diagonal for constant coefficients. Row/column r maps to mode
// k = r - N/2.
inline Eigen::MatrixXcd reciprocal_matrix(const OperatorSpec1D& spec, Eigen::Index N)
{
    spec.validate();
    require_grid_size(N, "reciprocal_matrix");
    const long half = long(N) / 2;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(N, N);
    const std::complex<double> tpi(0.0, 2.0 * std::numbers::pi);
    for (long k = -half; k < half; ++k) {
        for (long kp = -half; kp < half; ++kp) {
            std::complex<double> acc(0.0, 0.0);
            for (int s = 0; s <= spec.order; ++s) {
                const auto at = spec.coefficients[std::size_t(s)].fourier_coefficient(k - kp);
                if (at == std::complex<double>(0.0, 0.0)) continue;
                const auto row = std::pow(tpi * double(k), s);
                const auto col = std::pow(tpi * double(kp), s);
                acc += std::conj(row) * at * col;
            }
            m(k + half, kp + half) = acc;
        }
    }
    return m;
}

inline long reciprocal_mode_of_row(Eigen::Index row, Eigen::Index N) { return long(row) - long(N) / 2; }
inline Eigen::Index reciprocal_row_of_mode(long k, Eigen::Index N) { return Eigen::Index(k + long(N) / 2); }

}
