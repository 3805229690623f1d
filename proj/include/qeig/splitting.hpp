#pragma once
// Splitting a discretized operator into directly exponentiable parts and
// applying symmetric product-formula steps.
//
// Every part is either diagonal or a set of vertex-disjoint symmetric pair
// couplings, so exp(i theta P) has a closed form (phases, or 2x2 rotations
// cos + i sin sigma_x on each pair). Banded 1D operators are colored per
// circulant offset by walking each coupling cycle and alternating two parts;
// offset 1 then yields the familiar structure [diagonal, even pairs, odd
// pairs] with the wraparound pair landing in the odd part. Tensor sums are
// colored per axis and the per-axis parts are crossed with Kronecker
// products (a product of diagonal/pair factors is again diagonal or
// vertex-disjoint pairs). Diagonal parts of all terms merge into part 0.
// The parts sum entrywise to the source matrix.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include "qeig/discretize.hpp"
#include "qeig/solver.hpp"

namespace qeig {

struct SplitPart {
    enum class Kind { Diagonal, Pairs };

    struct Pair {
        Eigen::Index i = 0, j = 0;
        double w = 0.0;           // stored in units of `scale`
    };

    Kind kind = Kind::Diagonal;
    Eigen::Index side = 0;
    double scale = 1.0;           // matrix entries are scale * stored value
    Eigen::VectorXd values;       // Diagonal only, length side
    std::vector<Pair> pairs;      // Pairs only, vertex-disjoint

    SparseMat to_matrix() const
    {
        std::vector<Eigen::Triplet<double>> trip;
        if (kind == Kind::Diagonal) {
            for (Eigen::Index i = 0; i < side; ++i)
                if (values[i] != 0.0) trip.emplace_back(i, i, values[i] * scale);
        } else {
            for (const auto& p : pairs) {
                trip.emplace_back(p.i, p.j, p.w * scale);
                trip.emplace_back(p.j, p.i, p.w * scale);
            }
        }
        SparseMat m(side, side);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }
};

struct QuantizationInfo {
    int bits_requested = 16;
    int bits_effective = 16;
    double delta = 0.0;            // resolution on stored (scale-free) values
    double eigenvalue_bound = 0.0; // Weyl bound on the induced eigenvalue shift
};

struct SplitPlan {
    std::vector<SplitPart> parts;
    int order_nu = 2;              // 2 = symmetric Strang, 4 = triple jump
    double tau = 0.0;              // recorded default step, informational
    int dimension = 1;
    Eigen::Index points_per_axis = 0;
    Eigen::Index side = 0;
    int order = 0;                 // S of the source operator
    double scale = 1.0;            // uniform N^{2S} prefactor on stored values
    double volume_bound = 1.0;     // v = max over terms of prod(2 S_axis + 1)
    int r_qubits = 0;              // ceil(log2 v)
    int max_term_parts = 0;        // largest per-term part count
    std::optional<QuantizationInfo> quantization;

    SparseMat to_matrix() const
    {
        SparseMat acc(side, side);
        for (const auto& p : parts) acc = SparseMat(acc + p.to_matrix());
        return acc;
    }
};

namespace detail {

// parts of one banded circulant block, entries read off the matrix itself
inline std::vector<SplitPart> split_banded(const SparseMat& m, double scale)
{
    const Eigen::Index n = m.rows();
    SplitPart diag;
    diag.kind = SplitPart::Kind::Diagonal;
    diag.side = n;
    diag.scale = scale;
    diag.values = Eigen::VectorXd::Zero(n);

    // weights[o][x] is the coupling between x and (x+o) mod n
    std::vector<std::vector<double>> weights(std::size_t(n / 2 + 1));
    std::vector<bool> offset_present(std::size_t(n / 2 + 1), false);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it) {
            if (it.row() == it.col()) {
                diag.values[it.row()] = it.value() / scale;
                continue;
            }
            if (it.row() > it.col()) continue;
            const Eigen::Index d = it.col() - it.row();
            const Eigen::Index o = d <= n / 2 ? d : n - d;
            const Eigen::Index left = d <= n / 2 ? it.row() : it.col();
            auto& w = weights[std::size_t(o)];
            if (w.empty()) w.assign(std::size_t(n), 0.0);
            w[std::size_t(left)] = it.value();
            offset_present[std::size_t(o)] = true;
        }

    std::vector<SplitPart> parts{diag};
    for (Eigen::Index o = 1; o <= n / 2; ++o) {
        if (!offset_present[std::size_t(o)]) continue;
        const auto& w = weights[std::size_t(o)];
        SplitPart a, b;
        a.kind = b.kind = SplitPart::Kind::Pairs;
        a.side = b.side = n;
        a.scale = b.scale = scale;
        if (o == n / 2) {
            // antipodal pairs are mutually disjoint already
            for (Eigen::Index x = 0; x < n / 2; ++x)
                if (w[std::size_t(x)] != 0.0)
                    a.pairs.push_back({x, x + n / 2, w[std::size_t(x)] / scale});
        } else {
            // walk each coupling cycle x -> x+o and alternate the two parts;
            // cycle lengths are even for power-of-two n, so the coloring closes
            std::vector<bool> visited(std::size_t(n), false);
            for (Eigen::Index s = 0; s < n; ++s) {
                if (visited[std::size_t(s)]) continue;
                Eigen::Index cur = s;
                Eigen::Index step = 0;
                do {
                    visited[std::size_t(cur)] = true;
                    const Eigen::Index nxt = (cur + o) % n;
                    if (w[std::size_t(cur)] != 0.0) {
                        auto& part = (step % 2 == 0) ? a : b;
                        part.pairs.push_back({cur, nxt, w[std::size_t(cur)] / scale});
                    }
                    cur = nxt;
                    ++step;
                } while (cur != s);
            }
        }
        if (!a.pairs.empty()) parts.push_back(std::move(a));
        if (!b.pairs.empty()) parts.push_back(std::move(b));
    }
    return parts;
}

// greedy first-fit disjoint-pair coloring for arbitrary symmetric patterns
inline std::vector<SplitPart> split_greedy(const SparseMat& m, double scale)
{
    const Eigen::Index n = m.rows();
    SplitPart diag;
    diag.kind = SplitPart::Kind::Diagonal;
    diag.side = n;
    diag.scale = scale;
    diag.values = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) diag.values[i] = m.coeff(i, i) / scale;

    std::vector<SplitPart> parts{diag};
    std::vector<std::vector<bool>> busy;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it) {
            if (it.row() >= it.col()) continue;
            std::size_t slot = 0;
            for (; slot < busy.size(); ++slot)
                if (!busy[slot][std::size_t(it.row())] && !busy[slot][std::size_t(it.col())]) break;
            if (slot == busy.size()) {
                busy.emplace_back(std::size_t(n), false);
                SplitPart p;
                p.kind = SplitPart::Kind::Pairs;
                p.side = n;
                p.scale = scale;
                parts.push_back(std::move(p));
            }
            busy[slot][std::size_t(it.row())] = true;
            busy[slot][std::size_t(it.col())] = true;
            parts[slot + 1].pairs.push_back({it.row(), it.col(), it.value() / scale});
        }
    return parts;
}

}

inline SplitPlan split_operator(const DiscretizedOperator& op, int nu = 2)
{
    if (nu != 2 && nu != 4)
        throw std::invalid_argument("split_operator: product order must be 2 or 4");
    SplitPlan plan;
    plan.order_nu = nu;
    plan.dimension = op.dimension;
    plan.points_per_axis = op.points_per_axis;
    plan.side = op.side();
    plan.order = op.order;
    plan.scale = std::pow(double(op.points_per_axis), 2 * op.order);
    if (plan.scale <= 0.0 || !std::isfinite(plan.scale)) plan.scale = 1.0;

    const auto merge_diag = [&](SplitPart& into, const SplitPart& from) {
        if (into.values.size() == 0) into.values = Eigen::VectorXd::Zero(from.side);
        into.values += from.values;
    };

    if (!op.tensor_terms.empty() && !op.has_mask() && op.dimension > 1) {
        // per-axis coloring crossed factor-wise
        SplitPart diag;
        diag.kind = SplitPart::Kind::Diagonal;
        diag.side = plan.side;
        diag.scale = plan.scale;
        diag.values = Eigen::VectorXd::Zero(plan.side);
        std::vector<SplitPart> pair_parts;
        int max_term = 0;
        for (const auto& term : op.tensor_terms) {
            std::vector<std::vector<SparseMat>> axis_parts;
            for (const auto& f : term.factors) {
                std::vector<SparseMat> mats;
                for (const auto& p : detail::split_banded(f.matrix, 1.0)) mats.push_back(p.to_matrix());
                axis_parts.push_back(std::move(mats));
            }
            // cross product of per-axis choices
            std::vector<std::size_t> pick(axis_parts.size(), 0);
            int term_parts = 0;
            for (;;) {
                SparseMat prod = axis_parts[0][pick[0]];
                for (std::size_t ax = 1; ax < axis_parts.size(); ++ax)
                    prod = Eigen::kroneckerProduct(prod, axis_parts[ax][pick[ax]]).eval();
                prod.prune(0.0, 0.0);
                if (prod.nonZeros() > 0) {
                    ++term_parts;
                    // a product of diagonal/pair factors is diagonal or disjoint pairs
                    bool is_diag = true;
                    for (int k = 0; k < prod.outerSize() && is_diag; ++k)
                        for (SparseMat::InnerIterator it(prod, k); it; ++it)
                            if (it.row() != it.col()) { is_diag = false; break; }
                    if (is_diag) {
                        SplitPart d;
                        d.kind = SplitPart::Kind::Diagonal;
                        d.side = plan.side;
                        d.scale = plan.scale;
                        d.values = Eigen::VectorXd(prod.diagonal()) / plan.scale;
                        merge_diag(diag, d);
                    } else {
                        SplitPart p;
                        p.kind = SplitPart::Kind::Pairs;
                        p.side = plan.side;
                        p.scale = plan.scale;
                        std::vector<bool> seen(std::size_t(plan.side), false);
                        for (int k = 0; k < prod.outerSize(); ++k)
                            for (SparseMat::InnerIterator it(prod, k); it; ++it) {
                                if (it.row() >= it.col()) continue;
                                if (seen[std::size_t(it.row())] || seen[std::size_t(it.col())])
                                    throw std::logic_error("split_operator: crossed part is not vertex-disjoint");
                                seen[std::size_t(it.row())] = true;
                                seen[std::size_t(it.col())] = true;
                                p.pairs.push_back({it.row(), it.col(), it.value() / plan.scale});
                            }
                        pair_parts.push_back(std::move(p));
                    }
                }
                std::size_t ax = 0;
                for (; ax < pick.size(); ++ax) {
                    if (++pick[ax] < axis_parts[ax].size()) break;
                    pick[ax] = 0;
                }
                if (ax == pick.size()) break;
            }
            max_term = std::max(max_term, term_parts);
        }
        plan.parts.push_back(std::move(diag));
        for (auto& p : pair_parts) plan.parts.push_back(std::move(p));
        plan.max_term_parts = max_term;
    } else if (op.dimension == 1) {
        plan.parts = detail::split_banded(op.matrix, plan.scale);
        plan.max_term_parts = int(plan.parts.size());
    } else {
        plan.parts = detail::split_greedy(op.matrix, plan.scale);
        plan.max_term_parts = int(plan.parts.size());
    }

    double v = 1.0;
    if (!op.tensor_terms.empty()) {
        for (const auto& term : op.tensor_terms) {
            double p = 1.0;
            for (const auto& f : term.factors) p *= double(2 * f.order + 1);
            v = std::max(v, p);
        }
    } else {
        v = double(2 * op.order + 1);
    }
    plan.volume_bound = v;
    plan.r_qubits = int(std::ceil(std::log2(std::max(1.0, v))));
    return plan;
}

// multiply amp (length part.side) by exp(i theta scale P)
inline void apply_exp_part(const SplitPart& part, double theta, std::complex<double>* amp)
{
    if (part.kind == SplitPart::Kind::Diagonal) {
        for (Eigen::Index x = 0; x < part.side; ++x) {
            const double v = part.values[x];
            if (v != 0.0) amp[x] *= std::polar(1.0, theta * part.scale * v);
        }
    } else {
        for (const auto& p : part.pairs) {
            const double phi = theta * part.scale * p.w;
            const double c = std::cos(phi);
            const std::complex<double> is(0.0, std::sin(phi));
            const auto ai = amp[p.i];
            const auto aj = amp[p.j];
            amp[p.i] = c * ai + is * aj;
            amp[p.j] = is * ai + c * aj;
        }
    }
}

inline void apply_exp_part(const SplitPart& part, double theta, Eigen::VectorXcd& amp)
{
    if (amp.size() != part.side) throw std::invalid_argument("apply_exp_part: size mismatch");
    apply_exp_part(part, theta, amp.data());
}

// tau bound for the product order: constant / N^{2 (S (1 + 1/nu) + 1/nu)}
inline double choose_tau(double N, int S, int nu, double constant = 1.0)
{
    if (N <= 0 || S < 0 || nu <= 0 || constant <= 0)
        throw std::invalid_argument("choose_tau: inputs must be positive");
    const double expo = 2.0 * (double(S) * (1.0 + 1.0 / double(nu)) + 1.0 / double(nu));
    return constant / std::pow(N, expo);
}

struct UnitaryStep {
    SplitPlan plan;
    double tau = 0.0;

    void apply(std::complex<double>* amp) const
    {
        if (plan.order_nu == 2) {
            apply_strang(tau, amp);
        } else {
            // triple jump: S2(g tau) S2((1-2g) tau) S2(g tau)
            const double g = 1.0 / (2.0 - std::cbrt(2.0));
            apply_strang(g * tau, amp);
            apply_strang((1.0 - 2.0 * g) * tau, amp);
            apply_strang(g * tau, amp);
        }
    }

    void apply(Eigen::VectorXcd& amp) const
    {
        if (amp.size() != plan.side) throw std::invalid_argument("UnitaryStep: size mismatch");
        apply(amp.data());
    }

private:
    void apply_strang(double t, std::complex<double>* amp) const
    {
        for (std::size_t p = 0; p < plan.parts.size(); ++p)
            apply_exp_part(plan.parts[p], t / 2.0, amp);
        for (std::size_t p = plan.parts.size(); p-- > 0;)
            apply_exp_part(plan.parts[p], t / 2.0, amp);
    }
};

inline UnitaryStep strang_step(const SplitPlan& plan, double tau)
{
    if (plan.order_nu != 2)
        throw std::invalid_argument("strang_step: plan was built for a different product order");
    return UnitaryStep{plan, tau};
}

inline UnitaryStep suzuki_step(const SplitPlan& plan, double tau)
{
    if (plan.order_nu != 4)
        throw std::invalid_argument("suzuki_step: plan was built for a different product order");
    return UnitaryStep{plan, tau};
}

inline UnitaryStep make_step(const SplitPlan& plan, double tau)
{
    return plan.order_nu == 2 ? strang_step(plan, tau) : suzuki_step(plan, tau);
}

// Rounds stored part values to multiples of delta. delta = 0 selects the
// automatic resolution 0.2 / (N^2 scale), which keeps the Weyl bound on the
// induced eigenvalue shift a decade under the truncation-error scale 1/N^2.
inline SplitPlan quantize_plan(const SplitPlan& plan, int bits = 16, double delta = 0.0)
{
    if (bits < 1) throw std::invalid_argument("quantize_plan: bits must be >= 1");
    SplitPlan out = plan;
    const double n2 = double(plan.points_per_axis) * double(plan.points_per_axis);
    double d = delta > 0.0 ? delta : 0.2 / (n2 * plan.scale);
    double max_raw = 0.0;
    for (const auto& part : plan.parts) {
        if (part.kind == SplitPart::Kind::Diagonal) {
            for (Eigen::Index i = 0; i < part.side; ++i) max_raw = std::max(max_raw, std::abs(part.values[i]));
        } else {
            for (const auto& p : part.pairs) max_raw = std::max(max_raw, std::abs(p.w));
        }
    }
    QuantizationInfo info;
    info.bits_requested = bits;
    info.delta = d;
    info.bits_effective = std::max(bits, int(std::ceil(std::log2(max_raw / d + 1.0))));
    info.eigenvalue_bound = 0.5 * d * plan.scale * double(plan.parts.size());
    for (auto& part : out.parts) {
        if (part.kind == SplitPart::Kind::Diagonal) {
            for (Eigen::Index i = 0; i < part.side; ++i)
                part.values[i] = std::round(part.values[i] / d) * d;
        } else {
            for (auto& p : part.pairs) p.w = std::round(p.w / d) * d;
        }
    }
    out.quantization = info;
    return out;
}

// accumulator permutation x -> x + direction (mod N) along one axis
inline void parity_shift(std::complex<double>* amp, Eigen::Index N, int D, int direction, int axis = -1)
{
    if (direction != 1 && direction != -1)
        throw std::invalid_argument("parity_shift: direction must be +1 or -1");
    if (axis < 0) axis = D - 1;
    if (axis >= D) throw std::invalid_argument("parity_shift: axis out of range");
    Eigen::Index lo_stride = 1;
    for (int d = D - 1; d > axis; --d) lo_stride *= N;
    Eigen::Index hi = 1;
    for (int d = 0; d < axis; ++d) hi *= N;
    std::vector<std::complex<double>> line(static_cast<std::size_t>(N));
    for (Eigen::Index h = 0; h < hi; ++h)
        for (Eigen::Index l = 0; l < lo_stride; ++l) {
            const Eigen::Index base = h * N * lo_stride + l;
            for (Eigen::Index x = 0; x < N; ++x) {
                const Eigen::Index dst = ((x + direction) % N + N) % N;
                line[std::size_t(dst)] = amp[base + x * lo_stride];
            }
            for (Eigen::Index x = 0; x < N; ++x) amp[base + x * lo_stride] = line[std::size_t(x)];
        }
}

inline void parity_shift(Eigen::VectorXcd& amp, Eigen::Index N, int D, int direction, int axis = -1)
{
    parity_shift(amp.data(), N, D, direction, axis);
}

// Dense assembly of one product step; columns are the step applied to basis vectors.
inline Eigen::MatrixXcd assemble_step_matrix(const UnitaryStep& step)
{
    const Eigen::Index n = step.plan.side;
    if (n > 512)
        throw std::invalid_argument("assemble_step_matrix: side exceeds the dense desk-scale bound 512");
    Eigen::MatrixXcd u(n, n);
    Eigen::VectorXcd col(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        col.setZero();
        col[j] = 1.0;
        step.apply(col.data());
        u.col(j) = col;
    }
    return u;
}

struct StepEigenSystem {
    Eigen::VectorXd phases;      // principal-branch eigenphases
    Eigen::MatrixXcd vectors;    // columns
};

// Eigenphases of a unitary step matrix. One Rayleigh-quotient pass through u
// scrubs the eigensolver noise off the phases.
inline StepEigenSystem step_eigensystem(const Eigen::MatrixXcd& u)
{
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(u);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("step_eigensystem: eigensolver failed");
    StepEigenSystem out;
    const Eigen::Index n = u.rows();
    out.phases.resize(n);
    out.vectors = es.eigenvectors();
    for (Eigen::Index g = 0; g < n; ++g) {
        const Eigen::VectorXcd w = out.vectors.col(g);
        const std::complex<double> r = (w.adjoint() * (u * w))(0) / w.squaredNorm();
        out.phases[g] = std::arg(r);
    }
    return out;
}

struct SplitDeviationReport {
    std::vector<double> deviations;   // |lambda_step - lambda_N| per retained eigenpair, ascending f
    std::vector<double> lambda_step;  // matched step eigenvalues theta/tau
    double max_deviation = 0.0;
};

// Deviation of the product-step eigenphases from the operator spectrum.
// Dense route: assemble the step, take its eigenphases, match to the
// operator's eigenvectors by maximal overlap.
inline SplitDeviationReport splitting_error(const DiscretizedOperator& op, const SplitPlan& plan,
                                            double tau)
{
    if (op.side() != plan.side) throw std::invalid_argument("splitting_error: plan/operator mismatch");
    const EigenSystem sys = eig_dense(op);
    const double radius = std::max(std::abs(sys.values[0]), std::abs(sys.values[sys.values.size() - 1]));
    if (radius * std::abs(tau) >= std::numbers::pi)
        throw std::invalid_argument("splitting_error: |lambda| tau reaches the principal branch edge; reduce tau");

    const UnitaryStep step = make_step(plan, tau);
    const Eigen::MatrixXcd u = assemble_step_matrix(step);
    const StepEigenSystem se = step_eigensystem(u);

    const Eigen::Index nf = sys.values.size();
    const Eigen::Index n = op.side();
    Eigen::MatrixXd ov(nf, n);
    for (Eigen::Index f = 0; f < nf; ++f) {
        const Eigen::VectorXcd vf = sys.vectors.col(f).cast<std::complex<double>>();
        for (Eigen::Index g = 0; g < n; ++g)
            ov(f, g) = std::abs(std::complex<double>(vf.adjoint() * se.vectors.col(g)));
    }

    // greedy maximal-overlap matching; degenerate clusters share their value, so
    // any within-cluster assignment leaves the deviations unchanged
    std::vector<Eigen::Index> match(std::size_t(nf), -1);
    std::vector<bool> row_done(std::size_t(nf), false), col_done(std::size_t(n), false);
    for (Eigen::Index pick = 0; pick < nf; ++pick) {
        double best = -1.0;
        Eigen::Index bf = -1, bg = -1;
        for (Eigen::Index f = 0; f < nf; ++f) {
            if (row_done[std::size_t(f)]) continue;
            for (Eigen::Index g = 0; g < n; ++g) {
                if (col_done[std::size_t(g)]) continue;
                if (ov(f, g) > best) { best = ov(f, g); bf = f; bg = g; }
            }
        }
        match[std::size_t(bf)] = bg;
        row_done[std::size_t(bf)] = true;
        col_done[std::size_t(bg)] = true;
    }

    SplitDeviationReport rep;
    rep.deviations.resize(std::size_t(nf));
    rep.lambda_step.resize(std::size_t(nf));
    for (Eigen::Index f = 0; f < nf; ++f) {
        const double lam_step = se.phases[match[std::size_t(f)]] / tau;
        rep.lambda_step[std::size_t(f)] = lam_step;
        rep.deviations[std::size_t(f)] = std::abs(lam_step - sys.values[f]);
        rep.max_deviation = std::max(rep.max_deviation, rep.deviations[std::size_t(f)]);
    }
    return rep;
}

}
