#pragma once
// Closed-form resource model: qubit counts, gate-count formulas for the
// quantum estimator and the classical baseline, the dimension threshold for
// quantum advantage, and the rotation-accuracy requirements. Everything here
// instantiates formulas with unit constants; nothing is measured. Counts
// that can exceed 2^63 are carried in log2 form and printed symbolically.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qeig {

struct BigCount {
    double log2_value = 0.0;

    static BigCount from_value(double v)
    {
        if (v <= 0.0) throw std::invalid_argument("BigCount: value must be positive");
        return BigCount{std::log2(v)};
    }

    bool representable() const { return log2_value < 63.0; }
    double value() const { return std::pow(2.0, log2_value); }

    std::string to_string() const
    {
        std::ostringstream os;
        if (representable()) {
            os.precision(6);
            os << value();
        } else {
            os.precision(4);
            os << "2^" << log2_value;
        }
        return os.str();
    }
};

// advantage requires D strictly above this
inline double advantage_threshold(int S, int nu)
{
    if (S < 0 || (nu != 2 && nu != 4))
        throw std::invalid_argument("advantage_threshold: need S >= 0 and nu in {2,4}");
    return 2.0 * double(S + 1) * (1.0 + 1.0 / double(nu));
}

// bin count M = nextpow2(constant * N^{2(S+1)(1+1/nu)})
struct DerivedM {
    int exponent = 0;          // M = 2^exponent
    double log2_unrounded = 0; // log2 of the pre-rounding value, used in ratio identities

    BigCount count() const { return BigCount{double(exponent)}; }
    bool representable() const { return exponent < 63; }
    std::uint64_t value() const
    {
        if (!representable()) throw std::overflow_error("DerivedM: exceeds 2^63, use exponent form");
        return std::uint64_t(1) << exponent;
    }
};

inline DerivedM derive_M(double N, int S, int nu, double constant = 1.0)
{
    if (N < 2.0 || constant <= 0.0)
        throw std::invalid_argument("derive_M: need N >= 2 and a positive constant");
    DerivedM m;
    m.log2_unrounded = std::log2(constant) + advantage_threshold(S, nu) * std::log2(N);
    m.exponent = int(std::ceil(m.log2_unrounded - 1e-9));
    return m;
}

struct CostInputs {
    double N = 2.0;     // points per axis; formulas accept any N >= 2
    int D = 1;
    int S = 1;
    int nu = 2;
    double c = 3.0;     // polylog compilation exponent
    int m_exponent = 0; // 0 derives M, otherwise M = 2^m_exponent is taken as given
    double N0 = 8.0;    // coarse grid for the initial-guess line items
    int ancillas = 0;   // coefficient bits + threshold ancilla allowance
    double constant = 1.0;

    void validate() const
    {
        if (N < 2.0 || N0 < 2.0) throw std::invalid_argument("CostInputs: grids must be >= 2");
        if (D < 1) throw std::invalid_argument("CostInputs: dimension must be >= 1");
        if (S < 0) throw std::invalid_argument("CostInputs: order must be >= 0");
        if (nu != 2 && nu != 4) throw std::invalid_argument("CostInputs: product order must be 2 or 4");
        if (c < 1.0) throw std::invalid_argument("CostInputs: polylog exponent must be >= 1");
        if (m_exponent < 0 || ancillas < 0) throw std::invalid_argument("CostInputs: counts must be >= 0");
        if (constant <= 0.0) throw std::invalid_argument("CostInputs: constant must be positive");
    }
};

struct RotationAccuracy {
    double absolute = 0.0;            // 1 / N^{S+3}
    double phase_floor = 0.0;         // smallest phase magnitude that matters, 1 / N^{S+1}
    double relative_eigenvalue = 0.0; // 1 / N^2
};

inline RotationAccuracy rotation_accuracy(double N, int S)
{
    if (N < 2.0 || S < 0) throw std::invalid_argument("rotation_accuracy: need N >= 2 and S >= 0");
    RotationAccuracy r;
    r.absolute = 1.0 / std::pow(N, double(S + 3));
    r.phase_floor = 1.0 / std::pow(N, double(S + 1));
    r.relative_eigenvalue = 1.0 / (N * N);
    return r;
}

struct QubitBudget {
    int accumulator = 0; // ceil(D log2 N)
    int index = 0;       // log2 M
    int ancillas = 0;
    int total = 0;
};

struct CostReport {
    CostInputs inputs;
    DerivedM m;
    bool m_was_supplied = false;
    QubitBudget qubits;
    BigCount gates_quantum;        // M (log2 N)^c
    BigCount gates_classical;      // N^D log2 N
    BigCount memory_bits_classical; // N^D 64-bit words
    double ratio_log2 = 0.0;       // identity with the unrounded M: (D - th) log2 N - (c-1) log2 log2 N
    double threshold_D = 0.0;
    bool advantage = false;
    std::string advantage_statement;
    RotationAccuracy rotation;
    BigCount prep_classical;       // coarse solve, N0^D log2 N0
    BigCount prep_loading;         // accumulator loading, N0^D
};

inline CostReport cost_report(const CostInputs& in)
{
    in.validate();
    CostReport r;
    r.inputs = in;
    r.threshold_D = advantage_threshold(in.S, in.nu);
    if (in.m_exponent > 0) {
        r.m.exponent = in.m_exponent;
        r.m.log2_unrounded = double(in.m_exponent);
        r.m_was_supplied = true;
    } else {
        r.m = derive_M(in.N, in.S, in.nu, in.constant);
    }

    const double l2n = std::log2(in.N);
    const double l2l2n = std::log2(l2n); // 0 at N = 2, negative never (N >= 2)
    r.qubits.accumulator = int(std::ceil(double(in.D) * l2n - 1e-9));
    r.qubits.index = r.m.exponent;
    r.qubits.ancillas = in.ancillas;
    r.qubits.total = r.qubits.accumulator + r.qubits.index + r.qubits.ancillas;

    r.gates_quantum = BigCount{double(r.m.exponent) + in.c * l2l2n};
    r.gates_classical = BigCount{double(in.D) * l2n + l2l2n};
    r.memory_bits_classical = BigCount{double(in.D) * l2n + 6.0};
    r.ratio_log2 = (double(in.D) - r.threshold_D) * l2n - (in.c - 1.0) * l2l2n;
    r.advantage = double(in.D) > r.threshold_D;

    std::ostringstream st;
    const double t3 = r.threshold_D / 3.0;
    if (std::abs(t3 - std::round(t3)) < 1e-12) {
        st << "advantage requires D/3 > " << int(std::round(t3))
           << " particles in three dimensions";
    } else {
        st << "advantage requires D > " << r.threshold_D;
    }
    r.advantage_statement = st.str();

    r.rotation = rotation_accuracy(in.N, in.S);
    const double l2n0 = std::log2(in.N0);
    r.prep_classical = BigCount{double(in.D) * l2n0 + std::log2(std::max(1.0, l2n0))};
    r.prep_loading = BigCount{double(in.D) * l2n0};
    return r;
}

}
