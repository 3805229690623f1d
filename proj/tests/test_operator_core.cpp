#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <qeig/coefficients.hpp>
#include <qeig/discretize.hpp>
#include <qeig/experiments.hpp>
#include <qeig/solver.hpp>

using namespace qeig;

namespace {

double circulant_eigenvalue(Eigen::Index N, Eigen::Index k)
{
    const double s = std::sin(std::numbers::pi * double(k) / double(N));
    return 4.0 * double(N) * double(N) * s * s;
}

double max_abs_asym(const SparseMat& m)
{
    const Eigen::MatrixXd d(m);
    return (d - d.transpose()).cwiseAbs().maxCoeff();
}

}

TEST_CASE("forward difference matrix matches the hand-built stencil", "[operator]")
{
    const SparseMat d1 = finite_difference_matrix(4, 1);
    Eigen::MatrixXd expect(4, 4);
    expect << -4, 4, 0, 0, 0, -4, 4, 0, 0, 0, -4, 4, 4, 0, 0, -4;
    REQUIRE((Eigen::MatrixXd(d1) - expect).cwiseAbs().maxCoeff() == 0.0);

    const SparseMat d0 = finite_difference_matrix(4, 0);
    REQUIRE((Eigen::MatrixXd(d0) - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

    const SparseMat d2 = finite_difference_matrix(4, 2);
    REQUIRE((Eigen::MatrixXd(d2) - expect * expect).cwiseAbs().maxCoeff() == 0.0);

    REQUIRE_THROWS_AS(finite_difference_matrix(6, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(finite_difference_matrix(8, -1), std::invalid_argument);
}

TEST_CASE("assembled second-order operator is the circulant stencil", "[operator]")
{
    const auto spec = OperatorSpec1D::second_order(CoefficientFn::constant(1.0));
    const DiscretizedOperator op = build_operator_1d(spec, 4);
    Eigen::MatrixXd expect(4, 4);
    const double n2 = 16.0;
    expect << 2 * n2, -n2, 0, -n2, -n2, 2 * n2, -n2, 0, 0, -n2, 2 * n2, -n2, -n2, 0, -n2, 2 * n2;
    REQUIRE((Eigen::MatrixXd(op.matrix) - expect).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE(op.order == 1);
    REQUIRE(op.norm_bound == Catch::Approx(4.0 * n2));
}

TEST_CASE("constant-coefficient eigenvalues follow 4 N^2 sin^2(pi k / N)", "[operator]")
{
    const auto spec = OperatorSpec1D::second_order(CoefficientFn::constant(1.0));
    for (Eigen::Index N : {4, 8, 16, 32}) {
        const EigenSystem sys = eig_dense(build_operator_1d(spec, N));
        std::vector<double> oracle;
        for (Eigen::Index k = 0; k < N; ++k) oracle.push_back(circulant_eigenvalue(N, k));
        std::sort(oracle.begin(), oracle.end());
        for (Eigen::Index i = 0; i < N; ++i)
            REQUIRE(std::abs(sys.values[i] - oracle[std::size_t(i)]) <=
                    1e-9 * (1.0 + oracle[std::size_t(i)]));
    }
}

TEST_CASE("operator matrices are symmetric and positive semidefinite", "[operator]")
{
    const auto a = CoefficientFn::fourier({2.0, 1.0, 0.0});
    for (int S : {1, 2}) {
        OperatorSpec1D spec;
        spec.order = S;
        spec.coefficients.assign(std::size_t(S + 1), CoefficientFn::constant(0.0));
        spec.coefficients[std::size_t(S)] = a;
        const DiscretizedOperator op = build_operator_1d(spec, 16);
        REQUIRE(max_abs_asym(op.matrix) <= 1e-13 * op.norm_bound);
        const EigenSystem sys = eig_dense(op);
        REQUIRE(sys.values.minCoeff() >= -1e-10 * op.norm_bound);
        REQUIRE(sys.values.maxCoeff() <= op.norm_bound * (1.0 + 1e-12));
    }
}

TEST_CASE("spectral radius scales like N^(2S)", "[operator]")
{
    for (int S : {1, 2}) {
        OperatorSpec1D spec;
        spec.order = S;
        spec.coefficients.assign(std::size_t(S + 1), CoefficientFn::constant(0.0));
        spec.coefficients[std::size_t(S)] = CoefficientFn::constant(1.0);
        std::vector<double> ns, radii;
        for (Eigen::Index N : {8, 16, 32, 64}) {
            const EigenSystem sys = eig_dense(build_operator_1d(spec, N));
            ns.push_back(double(N));
            radii.push_back(sys.values.maxCoeff());
        }
        const FitResult fit = fit_loglog(ns, radii);
        REQUIRE(fit.defined);
        REQUIRE(std::abs(fit.slope - 2.0 * S) <= 0.1);
    }
}

TEST_CASE("grid samples reproduce band-limited coefficients exactly", "[operator]")
{
    const auto a = CoefficientFn::fourier({2.0, 1.0, 0.5});
    for (auto mode : {SamplingMode::Spectral, SamplingMode::Pointwise}) {
        const Eigen::VectorXd v = sample_coefficients(a, 8, mode);
        for (Eigen::Index i = 0; i < 8; ++i) {
            const double x = double(i) / 8.0;
            const double expect = 2.0 + std::cos(2.0 * std::numbers::pi * x) +
                                  0.5 * std::sin(2.0 * std::numbers::pi * x);
            REQUIRE(std::abs(v[i] - expect) <= 1e-12);
        }
    }
}

TEST_CASE("spectral sampling of rough data differs by the aliased tail", "[operator]")
{
    // p(x) = x(1-x) closes the seam continuously but not differentiably, so its
    // Fourier tail decays like 1/k^2 and the band-limited samples drift from the
    // pointwise ones by an O(1/N) amount
    const auto p = CoefficientFn::polynomial({0.0, 1.0, -1.0}, 0);
    double prev = 0.0;
    for (Eigen::Index N : {8, 32}) {
        const Eigen::VectorXd sp = sample_coefficients(p, N, SamplingMode::Spectral);
        const Eigen::VectorXd pw = sample_coefficients(p, N, SamplingMode::Pointwise);
        for (Eigen::Index i = 0; i < N; ++i) {
            const double x = double(i) / double(N);
            REQUIRE(std::abs(pw[i] - x * (1.0 - x)) <= 1e-12);
        }
        const double diff = (sp - pw).cwiseAbs().maxCoeff();
        REQUIRE(diff > 0.0);
        REQUIRE(diff <= 1.0 / double(N));
        if (N > 8) REQUIRE(diff < prev);
        prev = diff;
    }
}

TEST_CASE("tensor assembly matches the explicit Kronecker sum", "[operator]")
{
    const auto spec1 = OperatorSpec1D::second_order(CoefficientFn::constant(1.0));
    const DiscretizedOperator a = build_operator_1d(spec1, 4);
    const DiscretizedOperator op =
        build_operator_tensor(TensorOperatorSpec::kronecker_sum(2, spec1), 4);
    REQUIRE(op.dimension == 2);
    REQUIRE(op.side() == 16);
    REQUIRE(op.order == 1);

    const Eigen::MatrixXd a1(a.matrix);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(16, 16);
    // axis 0 is the most significant index block
    expect += Eigen::kroneckerProduct(a1, id);
    expect += Eigen::kroneckerProduct(id, a1);
    REQUIRE((Eigen::MatrixXd(op.matrix) - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("eigenvalues of the 2-D sum are pairwise sums of the 1-D values", "[operator]")
{
    const auto spec1 = OperatorSpec1D::second_order(CoefficientFn::constant(1.0));
    const DiscretizedOperator op =
        build_operator_tensor(TensorOperatorSpec::kronecker_sum(2, spec1), 4);
    const EigenSystem sys = eig_dense(op);
    std::vector<double> oracle;
    for (Eigen::Index j = 0; j < 4; ++j)
        for (Eigen::Index k = 0; k < 4; ++k)
            oracle.push_back(circulant_eigenvalue(4, j) + circulant_eigenvalue(4, k));
    std::sort(oracle.begin(), oracle.end());
    for (Eigen::Index i = 0; i < 16; ++i)
        REQUIRE(std::abs(sys.values[i] - oracle[std::size_t(i)]) <=
                1e-9 * (1.0 + oracle[std::size_t(i)]));
}

TEST_CASE("domain mask zeroes deleted points and preserves the retained block", "[operator]")
{
    const auto spec1 = OperatorSpec1D::second_order(CoefficientFn::constant(1.0));
    const DiscretizedOperator full =
        build_operator_tensor(TensorOperatorSpec::kronecker_sum(2, spec1), 4);
    const DomainMask mask = DomainMask::from_predicate(
        2, 4, [](const std::vector<Eigen::Index>& x) { return x[0] < 3; });
    REQUIRE(mask.retained_count() == 12);

    const DiscretizedOperator cut = apply_domain_mask(full, mask);
    REQUIRE(cut.retained_count() == 12);
    const Eigen::MatrixXd fd(full.matrix), cd(cut.matrix);
    for (Eigen::Index g = 0; g < 16; ++g) {
        for (Eigen::Index h = 0; h < 16; ++h) {
            if (cut.point_retained(g) && cut.point_retained(h))
                REQUIRE(cd(g, h) == fd(g, h));
            else
                REQUIRE(cd(g, h) == 0.0);
        }
    }
}

TEST_CASE("masked 1-D chain solves like the open-boundary submatrix", "[operator]")
{
    const auto spec1 = OperatorSpec1D::second_order(CoefficientFn::constant(1.0));
    const DiscretizedOperator full = build_operator_1d(spec1, 8);
    const DomainMask mask = DomainMask::from_predicate(
        1, 8, [](const std::vector<Eigen::Index>& x) { return x[0] != 0; });
    const DiscretizedOperator cut = apply_domain_mask(full, mask);
    REQUIRE(cut.retained_count() == 7);

    const Eigen::MatrixXd sub = Eigen::MatrixXd(full.matrix).block(1, 1, 7, 7);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
    const EigenSystem sys = eig_dense(cut);
    REQUIRE(sys.values.size() == 7);
    for (Eigen::Index i = 0; i < 7; ++i)
        REQUIRE(std::abs(sys.values[i] - es.eigenvalues()[i]) <= 1e-10 * (1.0 + full.norm_bound));
}

TEST_CASE("reciprocal-space matrix is diagonal for constant coefficients", "[operator]")
{
    const auto spec = OperatorSpec1D::second_order(CoefficientFn::constant(1.0));
    const Eigen::MatrixXcd m = reciprocal_matrix(spec, 8);
    for (Eigen::Index r = 0; r < 8; ++r) {
        const double k = double(reciprocal_mode_of_row(r, 8));
        const double w = 2.0 * std::numbers::pi * k;
        REQUIRE(std::abs(m(r, r) - std::complex<double>(w * w, 0.0)) <= 1e-9);
        for (Eigen::Index c2 = 0; c2 < 8; ++c2)
            if (c2 != r) REQUIRE(std::abs(m(r, c2)) <= 1e-12);
    }
    REQUIRE(reciprocal_row_of_mode(-4, 8) == 0);
    REQUIRE(reciprocal_mode_of_row(reciprocal_row_of_mode(3, 8), 8) == 3);
}

TEST_CASE("variable-coefficient reciprocal matrix is Hermitian and spectrally convergent",
          "[operator]")
{
    const auto spec = OperatorSpec1D::second_order(CoefficientFn::fourier({2.0, 1.0, 0.0}));
    const Eigen::MatrixXcd m16 = reciprocal_matrix(spec, 16);
    REQUIRE((m16 - m16.adjoint()).cwiseAbs().maxCoeff() <= 1e-9);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e16(m16);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e32(reciprocal_matrix(spec, 32));
    // analytic coefficient, so the Galerkin truncation converges faster than any
    // power of N; the first nonzero eigenvalue must already be settled at N=16
    const double l16 = e16.eigenvalues()[1];
    const double l32 = e32.eigenvalues()[1];
    REQUIRE(std::abs(l16 - l32) <= 1e-8 * (1.0 + std::abs(l32)));

    // the grid operator approaches the same continuum value at second order
    const EigenSystem grid = eig_dense(build_operator_1d(spec, 256));
    REQUIRE(std::abs(grid.values[1] - l32) <= 0.01 * std::abs(l32));
}

TEST_CASE("polynomial coefficients must close the periodic seam", "[operator]")
{
    REQUIRE_THROWS_AS(CoefficientFn::polynomial({0.0, 1.0}, 0), std::invalid_argument);
    REQUIRE_NOTHROW(CoefficientFn::polynomial({0.0, 1.0, -1.0}, 0));
    REQUIRE_THROWS_AS(CoefficientFn::polynomial({0.0, 1.0, -1.0}, 1), std::invalid_argument);
    REQUIRE_NOTHROW(CoefficientFn::polynomial({3.0}, 4));
}

TEST_CASE("operator spec validation rejects malformed shapes", "[operator]")
{
    OperatorSpec1D bad;
    bad.order = 1;
    bad.coefficients = {CoefficientFn::constant(1.0)};
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);

    TensorOperatorSpec t;
    t.dimension = 2;
    t.terms.push_back({OperatorSpec1D::identity()});
    REQUIRE_THROWS_AS(t.validate(), std::invalid_argument);

    REQUIRE_THROWS_AS(build_operator_1d(OperatorSpec1D::second_order(CoefficientFn::constant(1.0)), 6),
                      std::invalid_argument);
}
