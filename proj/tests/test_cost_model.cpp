#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include <qeig/cost_model.hpp>

using namespace qeig;

TEST_CASE("advantage threshold follows 2(S+1)(1+1/nu)", "[cost]")
{
    REQUIRE(advantage_threshold(1, 2) == Catch::Approx(6.0));
    REQUIRE(advantage_threshold(1, 4) == Catch::Approx(5.0));
    REQUIRE(advantage_threshold(0, 2) == Catch::Approx(3.0));
    REQUIRE(advantage_threshold(2, 2) == Catch::Approx(9.0));
    REQUIRE(advantage_threshold(2, 4) == Catch::Approx(7.5));
    REQUIRE_THROWS_AS(advantage_threshold(-1, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(advantage_threshold(1, 3), std::invalid_argument);
}

TEST_CASE("bin count doubles with the constant and tracks the exponent", "[cost]")
{
    // S=1, nu=2 at N=10: M = nextpow2(10^6) = 2^20
    const DerivedM m = derive_M(10.0, 1, 2);
    REQUIRE(m.exponent == 20);
    REQUIRE(m.value() == (std::uint64_t(1) << 20));
    // S=1, nu=4 at N=10: M = nextpow2(10^5) = 2^17
    REQUIRE(derive_M(10.0, 1, 4).exponent == 17);
    // doubling the constant adds exactly one bit once the value is a power of two
    const DerivedM base = derive_M(16.0, 1, 2); // 16^6 = 2^24 exactly
    REQUIRE(base.exponent == 24);
    REQUIRE(derive_M(16.0, 1, 2, 2.0).exponent == 25);
    // powers of two stay exact, no spurious rounding up
    REQUIRE(derive_M(2.0, 1, 2).exponent == 6);
    REQUIRE(derive_M(1024.0, 1, 2).exponent == 60);
}

TEST_CASE("bin counts beyond 63 bits stay symbolic", "[cost]")
{
    const DerivedM m = derive_M(2048.0, 1, 2);
    REQUIRE(m.exponent == 66);
    REQUIRE_FALSE(m.representable());
    REQUIRE_THROWS_AS(m.value(), std::overflow_error);
    REQUIRE(m.count().to_string() == "2^66");
}

TEST_CASE("qubit budget separates accumulator, index, and ancillas", "[cost]")
{
    // six axes of 2^10 points with a 2^60 index register
    CostInputs in;
    in.N = 1024.0;
    in.D = 6;
    in.S = 1;
    in.nu = 2;
    const CostReport rep = cost_report(in);
    REQUIRE(rep.qubits.accumulator == 60);
    REQUIRE(rep.qubits.index == 60);
    REQUIRE(rep.qubits.total == 120);

    CostInputs small;
    small.N = 16.0;
    small.D = 1;
    small.S = 1;
    small.nu = 2;
    small.ancillas = 5;
    const CostReport r2 = cost_report(small);
    REQUIRE(r2.qubits.accumulator == 4);
    REQUIRE(r2.qubits.index == 24);
    REQUIRE(r2.qubits.total == 4 + 24 + 5);
}

TEST_CASE("advantage flips exactly where D crosses the threshold", "[cost]")
{
    for (int S : {0, 1, 2}) {
        for (int nu : {2, 4}) {
            const double th = advantage_threshold(S, nu);
            for (int D = 1; D <= 12; ++D) {
                CostInputs in;
                in.N = 64.0;
                in.D = D;
                in.S = S;
                in.nu = nu;
                const CostReport rep = cost_report(in);
                REQUIRE(rep.threshold_D == Catch::Approx(th));
                REQUIRE(rep.advantage == (double(D) > th));
            }
        }
    }
}

TEST_CASE("ratio identity never grants advantage at the threshold", "[cost]")
{
    // D exactly at an integer threshold: the unrounded gate ratio reduces to
    // (c-1) log2 log2 N <= 0 in favor of the classical side
    for (double N : {2.0, 4.0, 16.0, 1024.0}) {
        CostInputs in;
        in.N = N;
        in.D = 6;
        in.S = 1;
        in.nu = 2;
        in.c = 3.0;
        const CostReport rep = cost_report(in);
        REQUIRE_FALSE(rep.advantage);
        if (N == 2.0)
            REQUIRE(rep.ratio_log2 == Catch::Approx(0.0).margin(1e-12));
        else
            REQUIRE(rep.ratio_log2 < 0.0);
    }
}

TEST_CASE("three-dimensional particle statement appears for divisible thresholds", "[cost]")
{
    CostInputs in;
    in.N = 100.0;
    in.D = 9;
    in.S = 1;
    in.nu = 2;
    const CostReport rep = cost_report(in);
    REQUIRE(rep.advantage);
    REQUIRE(rep.advantage_statement.find("D/3 > 2") != std::string::npos);
}

TEST_CASE("rotation accuracies follow the pinned powers of N", "[cost]")
{
    const RotationAccuracy r = rotation_accuracy(100.0, 1);
    REQUIRE(r.absolute == Catch::Approx(1e-8));
    REQUIRE(r.phase_floor == Catch::Approx(1e-4));
    REQUIRE(r.relative_eigenvalue == Catch::Approx(1e-4));
    const RotationAccuracy r2 = rotation_accuracy(10.0, 2);
    REQUIRE(r2.absolute == Catch::Approx(1e-5));
    REQUIRE(r2.phase_floor == Catch::Approx(1e-3));
    REQUIRE(r2.relative_eigenvalue == Catch::Approx(1e-2));
}

TEST_CASE("second-order bin exponent for power-of-two grids is 3(S+1) bits", "[cost]")
{
    for (int S : {0, 1, 2, 3}) {
        const DerivedM m = derive_M(2.0, S, 2);
        REQUIRE(m.exponent == 3 * (S + 1));
    }
}

TEST_CASE("costs are monotone in the driving parameters", "[cost]")
{
    auto report = [](double N, int D, int S) {
        CostInputs in;
        in.N = N;
        in.D = D;
        in.S = S;
        return cost_report(in);
    };
    REQUIRE(report(64.0, 3, 1).gates_quantum.log2_value <
            report(128.0, 3, 1).gates_quantum.log2_value);
    REQUIRE(report(64.0, 3, 1).gates_classical.log2_value <
            report(64.0, 4, 1).gates_classical.log2_value);
    REQUIRE(report(64.0, 3, 1).m.exponent < report(64.0, 3, 2).m.exponent);
    // higher dimension favors the quantum side
    REQUIRE(report(64.0, 8, 1).ratio_log2 > report(64.0, 7, 1).ratio_log2);
}

TEST_CASE("supplied bin exponent short-circuits the derivation", "[cost]")
{
    CostInputs in;
    in.N = 1024.0;
    in.D = 2;
    in.S = 1;
    in.nu = 2;
    in.m_exponent = 12;
    const CostReport rep = cost_report(in);
    REQUIRE(rep.m_was_supplied);
    REQUIRE(rep.m.exponent == 12);
    REQUIRE(rep.qubits.index == 12);
}

TEST_CASE("big counts render as decimals until they overflow", "[cost]")
{
    REQUIRE(BigCount::from_value(1024.0).to_string() == "1024");
    REQUIRE(BigCount{10.0}.to_string() == "1024");
    const BigCount huge{200.0};
    REQUIRE(huge.to_string() == "2^200");
    REQUIRE_FALSE(huge.representable());
}

TEST_CASE("input validation rejects out-of-range parameters", "[cost]")
{
    CostInputs in;
    in.N = 1.0;
    REQUIRE_THROWS_AS(in.validate(), std::invalid_argument);
    in.N = 8.0;
    in.nu = 3;
    REQUIRE_THROWS_AS(in.validate(), std::invalid_argument);
    in.nu = 2;
    in.c = 0.5;
    REQUIRE_THROWS_AS(in.validate(), std::invalid_argument);
    in.c = 3.0;
    REQUIRE_NOTHROW(in.validate());
}
