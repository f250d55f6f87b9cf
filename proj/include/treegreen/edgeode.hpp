#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "treegreen/coeffs.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/graph.hpp"
#include "treegreen/ode.hpp"

namespace treegreen {

/// Pointwise state of an edge-local solution.  flux is g = p f', the second
/// component of the integrated system; fprime is recovered as g / p(x).
struct EdgeState {
    double f = 0.0;
    double fprime = 0.0;
    double flux = 0.0;
};

/// Dense-output solution of -(p f')' + q f = 0 on one edge, stored as the
/// first-order system f' = g/p, g' = q f over [0, l_e].
class EdgeSolution {
public:
    EdgeSolution(std::size_t edge, double length, EdgeFunction p, DenseOutput2 dense,
                 double tol)
        : edge_(edge), length_(length), p_(std::move(p)), dense_(std::move(dense)),
          tol_(tol) {}

    std::size_t edge() const noexcept { return edge_; }
    double length() const noexcept { return length_; }
    double tolerance() const noexcept { return tol_; }
    const DenseOutput2& dense() const noexcept { return dense_; }

    EdgeState eval(double x) const {
        if (!(x >= 0.0) || x > length_)
            throw OutOfDomain("evaluation at " + std::to_string(x) + " outside [0, " +
                              std::to_string(length_) + "]");
        State2 s = dense_.eval(x);
        return {s[0], s[1] / p_(x), s[1]};
    }

private:
    std::size_t edge_;
    double length_;
    EdgeFunction p_;
    DenseOutput2 dense_;
    double tol_;
};

/// Integrates the kernel equation on edge e from the state (f0, g0) at x = 0.
/// A finite opt.max_step is honored as given; the default (infinite) cap is
/// replaced by l_e/64 so the dense output stays fine enough for downstream
/// interpolation even where the solution is polynomial.
inline EdgeSolution integrate_edge(const TreeGraph& t, std::size_t e,
                                   const Coefficients& c, double f0, double g0,
                                   IntegratorOptions opt = {}) {
    double l = t.edge_length(e);
    if (std::isinf(opt.max_step)) opt.max_step = l / 64.0;
    const EdgeFunction& p = c.p(e);
    const EdgeFunction& q = c.q(e);
    auto rhs = [&](double x, const State2& y) -> State2 {
        return {y[1] / p(x), q(x) * y[0]};
    };
    DenseOutput2 dense = integrate_dp45(rhs, State2{f0, g0}, l, opt);
    return EdgeSolution(e, l, c.p(e), std::move(dense), opt.rtol);
}

/// The 2m edge-supported kernel solutions phi_1..phi_2m.  With j counted
/// from zero, basis function j lives on edge j/2 and vanishes elsewhere;
/// even j starts from (f, f')(0) = (1, 0), odd j from (0, 1).  The unit
/// initial slope is imposed through the flux variable as g(0) = p_e(0).
class FundamentalBasis {
public:
    FundamentalBasis(const TreeGraph& t, const Coefficients& c,
                     const IntegratorOptions& opt = {}) {
        solutions_.reserve(2 * t.num_edges());
        for (std::size_t e = 0; e < t.num_edges(); ++e) {
            solutions_.push_back(integrate_edge(t, e, c, 1.0, 0.0, opt));
            solutions_.push_back(integrate_edge(t, e, c, 0.0, c.p(e)(0.0), opt));
        }
    }

    std::size_t size() const noexcept { return solutions_.size(); }
    std::size_t support_edge(std::size_t j) const { return j / 2; }
    const EdgeSolution& on_support(std::size_t j) const { return solutions_.at(j); }

    /// Global evaluation: zero off the supporting edge.
    EdgeState eval(std::size_t j, const Point& pt) const {
        const EdgeSolution& s = solutions_.at(j);
        if (pt.edge != s.edge()) return {};
        return s.eval(pt.x);
    }

private:
    std::vector<EdgeSolution> solutions_;
};

inline FundamentalBasis fundamental_basis(const TreeGraph& t, const Coefficients& c,
                                          const IntegratorOptions& opt = {}) {
    return FundamentalBasis(t, c, opt);
}

} // namespace treegreen
