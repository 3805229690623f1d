#pragma once
// Problem descriptions: sums of bilinear derivative terms with periodic
// coefficients. A 1D factor of order S stands for the form
//   sum_{s=0..S} integral( (d^s phi)* a_s(x) (d^s psi) ),
// differential order 2S. A D-dimensional problem is a sum of terms, each a
// tensor product of D such factors.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qeig/coefficients.hpp"

namespace qeig {

struct OperatorSpec1D {
    int order = 0;                              // S
    std::vector<CoefficientFn> coefficients;    // indexed by s = 0..S

    static OperatorSpec1D identity()
    {
        OperatorSpec1D f;
        f.order = 0;
        f.coefficients = {CoefficientFn::constant(1.0)};
        return f;
    }

    // the classic -d/dx a(x) d/dx form
    static OperatorSpec1D second_order(CoefficientFn a1, CoefficientFn a0 = CoefficientFn::constant(0.0))
    {
        OperatorSpec1D f;
        f.order = 1;
        f.coefficients = {std::move(a0), std::move(a1)};
        return f;
    }

    bool is_identity() const
    {
        return order == 0 && coefficients.size() == 1 &&
               coefficients[0].kind == CoeffKind::Constant && coefficients[0].parameters[0] == 1.0;
    }

    void validate() const
    {
        if (order < 0)
            throw std::invalid_argument("operator spec: negative order");
        if (coefficients.size() != std::size_t(order) + 1)
            throw std::invalid_argument("operator spec: need exactly order+1 coefficients (s = 0..S)");
        for (int s = 0; s <= order; ++s) {
            coefficients[std::size_t(s)].validate();
            if (coefficients[std::size_t(s)].smoothness_order < s)
                throw std::invalid_argument(
                    "operator spec: coefficient at s = " + std::to_string(s) +
                    " declares smoothness below its derivative order");
        }
    }
};

struct TensorOperatorSpec {
    int dimension = 1;                                  // D
    std::vector<std::vector<OperatorSpec1D>> terms;     // terms[b][axis], each size D

    static TensorOperatorSpec single(OperatorSpec1D factor)
    {
        TensorOperatorSpec t;
        t.dimension = 1;
        t.terms = {{std::move(factor)}};
        return t;
    }

    // sum over axes of a 1D factor acting on that axis (identity elsewhere)
    static TensorOperatorSpec kronecker_sum(int D, const OperatorSpec1D& factor)
    {
        TensorOperatorSpec t;
        t.dimension = D;
        for (int axis = 0; axis < D; ++axis) {
            std::vector<OperatorSpec1D> term(std::size_t(D), OperatorSpec1D::identity());
            term[std::size_t(axis)] = factor;
            t.terms.push_back(std::move(term));
        }
        return t;
    }

    void validate() const
    {
        if (dimension < 1)
            throw std::invalid_argument("tensor spec: dimension must be >= 1");
        if (terms.empty())
            throw std::invalid_argument("tensor spec: no terms");
        for (const auto& term : terms) {
            if (term.size() != std::size_t(dimension))
                throw std::invalid_argument("tensor spec: every term needs exactly D factors");
            for (const auto& f : term) f.validate();
        }
    }

    // 2S = max over terms of the summed factor differential orders
    int total_order2() const
    {
        int m = 0;
        for (const auto& term : terms) {
            int t = 0;
            for (const auto& f : term) t += 2 * f.order;
            m = std::max(m, t);
        }
        return m;
    }

    // v = max over terms of prod_axis (2 S_axis + 1)
    double volume_bound() const
    {
        double v = 1.0;
        for (const auto& term : terms) {
            double p = 1.0;
            for (const auto& f : term) p *= double(2 * f.order + 1);
            v = std::max(v, p);
        }
        return v;
    }

    bool all_constant_coefficients() const
    {
        for (const auto& term : terms)
            for (const auto& f : term)
                for (const auto& c : f.coefficients)
                    if (c.kind != CoeffKind::Constant) return false;
        return true;
    }
};

}
