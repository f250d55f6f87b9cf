#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "treegreen/coeffs.hpp"
#include "treegreen/conditions.hpp"
#include "treegreen/edgeode.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/graph.hpp"
#include "treegreen/quadrature.hpp"

namespace treegreen {

struct GreenOptions {
    IntegratorOptions ode;
    double quad_rtol = 1e-9;
    /// Sample count per edge for functions produced by apply/solve.
    std::size_t apply_samples = 256;
};

/// Kernel solution psi = sum a_j phi_j that is nonzero at exactly one
/// boundary node n' (where its boundary functional evaluates to 1) and
/// satisfies every other node condition homogeneously.
struct GlobalKernelSolution {
    std::size_t node = 0;
    Eigen::VectorXd a;
};

/// Per-edge factor pair of the Green's function.  Both sides are references
/// into the psi cache; lambda_scale carries the -1/w normalization so that
/// p W[psi_gamma, lambda_scale * psi_lambda] = -1 on the edge.
struct PsiPair {
    std::size_t gamma_node = 0;
    std::size_t lambda_node = 0;
    double lambda_scale = 1.0;
    double normalized_w = -1.0;
};

/// Solution sampled on a uniform grid per edge with derivative values;
/// evaluation between samples is cubic Hermite.
class FunctionOnGraph {
public:
    FunctionOnGraph(const TreeGraph& t, std::size_t samples_per_edge)
        : lengths_(t.num_edges()), f_(t.num_edges()), fp_(t.num_edges()) {
        for (std::size_t e = 0; e < t.num_edges(); ++e) {
            lengths_[e] = t.edge_length(e);
            f_[e].assign(samples_per_edge + 1, 0.0);
            fp_[e].assign(samples_per_edge + 1, 0.0);
        }
    }

    std::size_t samples_per_edge() const { return f_.front().size() - 1; }
    double sample_x(std::size_t e, std::size_t k) const {
        return lengths_[e] * static_cast<double>(k) /
               static_cast<double>(samples_per_edge());
    }
    double& sample_value(std::size_t e, std::size_t k) { return f_.at(e).at(k); }
    double& sample_derivative(std::size_t e, std::size_t k) { return fp_.at(e).at(k); }
    double sample_value(std::size_t e, std::size_t k) const { return f_.at(e).at(k); }
    double sample_derivative(std::size_t e, std::size_t k) const {
        return fp_.at(e).at(k);
    }

    double value(std::size_t e, double x) const { return hermite(e, x, false); }
    double derivative(std::size_t e, double x) const { return hermite(e, x, true); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& edge : f_)
            for (double v : edge) m = std::max(m, std::fabs(v));
        return m;
    }

private:
    double hermite(std::size_t e, double x, bool deriv) const {
        double l = lengths_.at(e);
        if (!(x >= 0.0) || x > l)
            throw OutOfDomain("position " + std::to_string(x) + " outside [0, " +
                              std::to_string(l) + "]");
        std::size_t M = samples_per_edge();
        double t = x / l * static_cast<double>(M);
        std::size_t k = std::min(static_cast<std::size_t>(t), M - 1);
        double h = l / static_cast<double>(M);
        double s = (x - static_cast<double>(k) * h) / h;
        double y0 = f_[e][k], y1 = f_[e][k + 1];
        double d0 = fp_[e][k], d1 = fp_[e][k + 1];
        if (!deriv) {
            double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            double h10 = s * (1.0 - s) * (1.0 - s);
            double h01 = s * s * (3.0 - 2.0 * s);
            double h11 = s * s * (s - 1.0);
            return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        }
        double d00 = 6.0 * s * (s - 1.0) / h;
        double d10 = (3.0 * s - 1.0) * (s - 1.0);
        double d11 = s * (3.0 * s - 2.0);
        return d00 * y0 + d10 * d0 - d00 * y1 + d11 * d1;
    }

    std::vector<double> lengths_;
    std::vector<std::vector<double>> f_;
    std::vector<std::vector<double>> fp_;
};

/// Green's function of the node-condition problem, built edge by edge as a
/// product of two one-sided solutions.  Construction solves the Delta system
/// once per boundary node actually used (at most #boundary nodes);
/// evaluation afterwards performs no further solves.
class GreensFunction {
public:
    GreensFunction(TreeGraph t, Coefficients c, const BoundaryConditions& bc,
                   GreenOptions opt = {})
        : tree_(std::move(t)), coeffs_(std::move(c)), opt_(opt),
          basis_(tree_, coeffs_, opt.ode), fns_(standard_functionals(tree_, bc)),
          delta_(basis_, fns_, coeffs_) {
        check_p_continuity();
        if (!delta_.nondegenerate())
            throw DegenerateProblem("Delta matrix is degenerate (rcond = " +
                                    std::to_string(delta_.rcond()) + ")");
        boundary_ = tree_.boundary_nodes();
        build_pairs();
    }

    const TreeGraph& tree() const { return tree_; }
    const Coefficients& coefficients() const { return coeffs_; }
    const FundamentalBasis& basis() const { return basis_; }
    const std::vector<Functional>& functionals() const { return fns_; }
    const DeltaMatrix& delta() const { return delta_; }
    std::size_t solve_count() const { return solve_count_; }
    const PsiPair& psi_pair(std::size_t e) const { return pairs_.at(e); }

    const GlobalKernelSolution& psi_for_boundary_node(std::size_t n) const {
        auto it = psi_cache_.find(n);
        if (it == psi_cache_.end())
            throw OutOfDomain("no cached kernel solution for node index " +
                              std::to_string(n));
        return it->second;
    }

    /// State of the cached psi_n at a point (value, derivative, flux).
    EdgeState psi_state(std::size_t n, const Point& pt) const {
        const GlobalKernelSolution& psi = psi_for_boundary_node(n);
        auto j = static_cast<Eigen::Index>(2 * pt.edge);
        EdgeState s0 = basis_.eval(2 * pt.edge, pt);
        EdgeState s1 = basis_.eval(2 * pt.edge + 1, pt);
        double a0 = psi.a[j], a1 = psi.a[j + 1];
        return {a0 * s0.f + a1 * s1.f, a0 * s0.fprime + a1 * s1.fprime,
                a0 * s0.flux + a1 * s1.flux};
    }

    /// G(x, y) for x interior to its edge.  The kernel is continuous across
    /// y = x, so the coincident case is served by the tail-side branch.
    double eval(const Point& x, const Point& y) const {
        return eval_impl(x, y, false);
    }

    /// Partial derivative of G with respect to x along x's edge coordinate.
    /// One-sided at y = x (tail-side branch).
    double eval_dx(const Point& x, const Point& y) const {
        return eval_impl(x, y, true);
    }

    /// One-sided limit of G(., y) as x approaches the node at the given edge
    /// end, taken along that edge.  Defined for endpoint positions where
    /// eval() itself would refuse the node point.
    double eval_node_limit(const EdgeEnd& end, const Point& y) const {
        return node_limit_impl(end, y, false);
    }

    double eval_dx_node_limit(const EdgeEnd& end, const Point& y) const {
        return node_limit_impl(end, y, true);
    }

    /// f(x) = int G(x, y) h(y) drho(y), sampled on a per-edge grid.
    FunctionOnGraph apply(const std::vector<EdgeFunction>& h) const {
        return apply_impl(h, opt_.apply_samples);
    }

    FunctionOnGraph apply(const std::vector<EdgeFunction>& h,
                          std::size_t samples_per_edge) const {
        return apply_impl(h, samples_per_edge);
    }

    /// Solution of L[f] = h with l_i[f] = c_i: the Green term plus the kernel
    /// combination with coefficients from Delta a = c.
    FunctionOnGraph solve_general(const std::vector<EdgeFunction>& h,
                                  const std::vector<double>& c) const {
        if (c.size() != fns_.size())
            throw ConfigError("condition vector needs exactly " +
                              std::to_string(fns_.size()) + " entries");
        FunctionOnGraph f = apply(h);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i)
            rhs[static_cast<Eigen::Index>(i)] = c[i];
        Eigen::VectorXd a = delta_.solve(rhs);
        std::size_t M = f.samples_per_edge();
        for (std::size_t e = 0; e < tree_.num_edges(); ++e) {
            auto j = static_cast<Eigen::Index>(2 * e);
            if (a[j] == 0.0 && a[j + 1] == 0.0) continue;
            for (std::size_t k = 0; k <= M; ++k) {
                Point pt{e, f.sample_x(e, k)};
                EdgeState s0 = basis_.eval(2 * e, pt);
                EdgeState s1 = basis_.eval(2 * e + 1, pt);
                f.sample_value(e, k) += a[j] * s0.f + a[j + 1] * s1.f;
                f.sample_derivative(e, k) += a[j] * s0.fprime + a[j + 1] * s1.fprime;
            }
        }
        return f;
    }

    /// Alternative construction H - sum_i l_i[H(., y)] eta_i(x) from per-edge
    /// interval kernels; a cross-check, deliberately not sharing the psi
    /// path.  This kernel is taken with respect to plain length measure dy,
    /// so it equals rho_{e_y} times eval(x, y).
    double pokornyi(const Point& x, const Point& y) const {
        tree_.check_on_edge(x.edge, x.x);
        tree_.check_on_edge(y.edge, y.x);
        std::size_t a = y.edge;
        IntervalKernel kern = interval_kernel(a);
        double l = tree_.edge_length(a);

        EdgeState uly = interval_u_left(kern, y.x);
        EdgeState ury = interval_u_right(kern, y.x);

        // Endpoint data of H(., y) on edge a; H vanishes on other edges.
        double h_val_0 = 0.0; // u_left(0) = 0 by construction
        double h_d_0 = interval_u_left_d0(kern) * ury.f / kern.c;
        EdgeState url = interval_u_right(kern, l);
        double h_val_l = uly.f * url.f / kern.c;
        double h_d_l = uly.f * url.fprime / kern.c;

        Trace tr(tree_.num_edges());
        tr.fill_zero();
        double p0 = coeffs_.p(a)(0.0);
        double pl = coeffs_.p(a)(l);
        tr.set(a, true, h_val_0, h_d_0, p0 * h_d_0);
        tr.set(a, false, h_val_l, -h_d_l, -pl * h_d_l);

        Eigen::VectorXd v(static_cast<Eigen::Index>(fns_.size()));
        for (std::size_t i = 0; i < fns_.size(); ++i)
            v[static_cast<Eigen::Index>(i)] = treegreen::apply(fns_[i], tr, coeffs_);
        Eigen::VectorXd b = delta_.solve(v);

        auto j = static_cast<Eigen::Index>(2 * x.edge);
        EdgeState s0 = basis_.eval(2 * x.edge, x);
        EdgeState s1 = basis_.eval(2 * x.edge + 1, x);
        double corr = b[j] * s0.f + b[j + 1] * s1.f;

        double h_term = 0.0;
        if (x.edge == a) {
            EdgeState ulo = x.x <= y.x ? interval_u_left(kern, x.x) : uly;
            EdgeState uhi = x.x <= y.x ? ury : interval_u_right(kern, x.x);
            h_term = ulo.f * uhi.f / kern.c;
        }
        return h_term - corr;
    }

private:
    struct IntervalKernel {
        std::size_t edge = 0;
        // u_right = A * phi_even + B * phi_odd; u_left = phi_odd.
        double A = 0.0;
        double B = 0.0;
        double c = 1.0; // -p W[u_left, u_right], constant on the edge
    };

    /// The edge-wise Wronskian normalizations only glue into one global
    /// kernel when p agrees at each internal node, since the flux condition
    /// weights the bare derivative.  Reject inputs outside that class.
    void check_p_continuity() const {
        for (std::size_t nd = 0; nd < tree_.num_nodes(); ++nd) {
            if (tree_.is_boundary(nd)) continue;
            const std::vector<EdgeEnd>& ends = tree_.incident(nd);
            double p0 = p_at_end(ends[0]);
            for (std::size_t i = 1; i < ends.size(); ++i) {
                double pi = p_at_end(ends[i]);
                if (std::fabs(pi - p0) > 1e-8 * (1.0 + std::fabs(p0)))
                    throw ConfigError("p must be continuous at internal nodes: at "
                                      "node '" +
                                      tree_.node_id(nd) + "' edge '" +
                                      tree_.edge_id(ends[i].edge) + "' gives p = " +
                                      std::to_string(pi) + " but edge '" +
                                      tree_.edge_id(ends[0].edge) + "' gives p = " +
                                      std::to_string(p0));
            }
        }
    }

    double p_at_end(const EdgeEnd& end) const {
        return coeffs_.p(end.edge)(end.at_tail ? 0.0
                                               : tree_.edge_length(end.edge));
    }

    EdgeState interval_u_left(const IntervalKernel& k, double x) const {
        return basis_.on_support(2 * k.edge + 1).eval(x);
    }

    double interval_u_left_d0(const IntervalKernel&) const { return 1.0; }

    EdgeState interval_u_right(const IntervalKernel& k, double x) const {
        EdgeState even = basis_.on_support(2 * k.edge).eval(x);
        EdgeState odd = basis_.on_support(2 * k.edge + 1).eval(x);
        return {k.A * even.f + k.B * odd.f, k.A * even.fprime + k.B * odd.fprime,
                k.A * even.flux + k.B * odd.flux};
    }

    /// Interval kernel factors on one edge with homogeneous interval ends:
    /// Dirichlet-Dirichlet when solvable, else Dirichlet-Neumann (both
    /// cannot fail at once, since phi_odd(l) = phi_odd'(l) = 0 would force
    /// phi_odd = 0).  c follows from p W[phi_odd, phi_even] = -p(0).
    IntervalKernel interval_kernel(std::size_t e) const {
        double l = tree_.edge_length(e);
        EdgeState even_l = basis_.on_support(2 * e).eval(l);
        EdgeState odd_l = basis_.on_support(2 * e + 1).eval(l);
        double p0 = coeffs_.p(e)(0.0);
        IntervalKernel k;
        k.edge = e;
        if (std::fabs(odd_l.f) > 1e-10 * (1.0 + std::fabs(even_l.f))) {
            // u_right = phi_even * phi_odd(l) - phi_odd * phi_even(l)
            k.A = odd_l.f;
            k.B = -even_l.f;
            k.c = p0 * odd_l.f;
        } else {
            // u_right = phi_even * phi_odd'(l) - phi_odd * phi_even'(l)
            k.A = odd_l.fprime;
            k.B = -even_l.fprime;
            k.c = p0 * odd_l.fprime;
            if (std::fabs(k.c) <= 1e-300)
                throw IntervalDegenerate("interval kernel degenerate on edge '" +
                                         tree_.edge_id(e) + "'");
        }
        return k;
    }

    double psi_gamma_value(std::size_t e, const Point& pt) const {
        return psi_state(pairs_[e].gamma_node, pt).f;
    }

    double psi_lambda_value(std::size_t e, const Point& pt) const {
        return pairs_[e].lambda_scale * psi_state(pairs_[e].lambda_node, pt).f;
    }

    double eval_impl(const Point& x, const Point& y, bool deriv) const {
        tree_.check_on_edge(x.edge, x.x);
        tree_.check_on_edge(y.edge, y.x);
        double l = tree_.edge_length(x.edge);
        if (x.x == 0.0 || x.x == l)
            throw PointAtNode("eval requires x interior to its edge; use the node "
                              "limit helper at node positions");
        Side side = y.edge == x.edge
                        ? (y.x <= x.x ? Side::Gamma : Side::Lambda)
                        : tree_.edge_side(x.edge, y.edge);
        return branch_value(x.edge, x, y, side, deriv);
    }

    double node_limit_impl(const EdgeEnd& end, const Point& y, bool deriv) const {
        tree_.check_on_edge(y.edge, y.x);
        std::size_t e = end.edge;
        double xpos = end.at_tail ? 0.0 : tree_.edge_length(e);
        Side side;
        if (y.edge == e)
            side = y.x <= xpos ? Side::Gamma : Side::Lambda;
        else
            side = tree_.edge_side(e, y.edge);
        return branch_value(e, Point{e, xpos}, y, side, deriv);
    }

    double branch_value(std::size_t e, const Point& x, const Point& y, Side y_side,
                        bool deriv) const {
        const PsiPair& pair = pairs_[e];
        double inv_rho = 1.0 / coeffs_.rho(e);
        if (y_side == Side::Gamma) {
            double gy = psi_gamma_value(e, y);
            EdgeState lx = psi_state(pair.lambda_node, x);
            double fx = pair.lambda_scale * (deriv ? lx.fprime : lx.f);
            return inv_rho * gy * fx;
        }
        double ly = psi_lambda_value(e, y);
        EdgeState gx = psi_state(pair.gamma_node, x);
        double fx = deriv ? gx.fprime : gx.f;
        return inv_rho * ly * fx;
    }

    const GlobalKernelSolution& psi_cached(std::size_t n) {
        auto it = psi_cache_.find(n);
        if (it != psi_cache_.end()) return it->second;
        Eigen::VectorXd rhs =
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fns_.size()));
        rhs[static_cast<Eigen::Index>(boundary_functional_index(fns_, n))] = 1.0;
        GlobalKernelSolution psi{n, delta_.solve(rhs)};
        ++solve_count_;
        return psi_cache_.emplace(n, std::move(psi)).first->second;
    }

    /// Raw p W[psi_a, psi_b] on edge e at position x, from cached solutions.
    double raw_wronskian(std::size_t gamma_n, std::size_t lambda_n, std::size_t e,
                         double x) const {
        const GlobalKernelSolution& pg = psi_cache_.at(gamma_n);
        const GlobalKernelSolution& pl = psi_cache_.at(lambda_n);
        auto j = static_cast<Eigen::Index>(2 * e);
        EdgeState s0 = basis_.on_support(2 * e).eval(x);
        EdgeState s1 = basis_.on_support(2 * e + 1).eval(x);
        double fg = pg.a[j] * s0.f + pg.a[j + 1] * s1.f;
        double gg = pg.a[j] * s0.flux + pg.a[j + 1] * s1.flux;
        double fl = pl.a[j] * s0.f + pl.a[j + 1] * s1.f;
        double gl = pl.a[j] * s0.flux + pl.a[j + 1] * s1.flux;
        // p W[f, g] = f (p g') - (p f') g
        return fg * gl - gg * fl;
    }

    void build_pairs() {
        pairs_.resize(tree_.num_edges());
        for (std::size_t e = 0; e < tree_.num_edges(); ++e) {
            std::vector<std::size_t> gamma_cand, lambda_cand;
            for (std::size_t n : boundary_) {
                if (tree_.node_side(e, n) == Side::Lambda)
                    gamma_cand.push_back(n);
                else
                    lambda_cand.push_back(n);
            }
            double l = tree_.edge_length(e);
            const std::array<double, 3> probes{0.25 * l, 0.5 * l, 0.75 * l};
            bool found = false;
            for (std::size_t g : gamma_cand) {
                if (found) break;
                psi_cached(g);
                for (std::size_t lam : lambda_cand) {
                    psi_cached(lam);
                    std::array<double, 3> w{};
                    double mag = 0.0;
                    for (std::size_t i = 0; i < 3; ++i) {
                        w[i] = raw_wronskian(g, lam, e, probes[i]);
                        auto jj = static_cast<Eigen::Index>(2 * e);
                        const auto& ag = psi_cache_.at(g).a;
                        const auto& al = psi_cache_.at(lam).a;
                        mag = std::max(mag, (std::fabs(ag[jj]) + std::fabs(ag[jj + 1])) *
                                                (std::fabs(al[jj]) + std::fabs(al[jj + 1])));
                    }
                    double wmid = w[1];
                    if (std::fabs(wmid) <= 1e-12 * (1.0 + mag)) continue;
                    double spread =
                        std::max(std::fabs(w[0] - wmid), std::fabs(w[2] - wmid));
                    if (spread > 1e-8 * (1.0 + std::fabs(wmid)))
                        throw NonConstantWronskian(
                            "p W[psi_gamma, psi_lambda] varies by " +
                            std::to_string(spread) + " on edge '" + tree_.edge_id(e) +
                            "'");
                    double wbar = (w[0] + w[1] + w[2]) / 3.0;
                    pairs_[e] = PsiPair{g, lam, -1.0 / wbar, -1.0};
                    found = true;
                    break;
                }
            }
            if (!found)
                throw DegenerateProblem(
                    "no boundary-node pair yields a nonzero Wronskian on edge '" +
                    tree_.edge_id(e) + "'");
        }
    }

    FunctionOnGraph apply_impl(const std::vector<EdgeFunction>& h,
                               std::size_t samples) const {
        if (h.size() != tree_.num_edges())
            throw ConfigError("right-hand side needs one function per edge");
        if (samples < 2) throw ConfigError("need at least two samples per edge");

        // J(n, a) = rho_a * int_a psi_n h dy, for every cached psi and edge.
        std::map<std::pair<std::size_t, std::size_t>, double> J;
        auto j_integral = [&](std::size_t n, std::size_t a) {
            auto key = std::make_pair(n, a);
            auto it = J.find(key);
            if (it != J.end()) return it->second;
            auto integrand = [&](double y) {
                return psi_state(n, Point{a, y}).f * h[a](y);
            };
            double v = coeffs_.rho(a) *
                       integrate_adaptive(integrand, 0.0, tree_.edge_length(a),
                                          opt_.quad_rtol);
            J.emplace(key, v);
            return v;
        };

        FunctionOnGraph out(tree_, samples);
        for (std::size_t e = 0; e < tree_.num_edges(); ++e) {
            const PsiPair& pair = pairs_[e];
            double off_gamma = 0.0, off_lambda = 0.0;
            for (std::size_t a = 0; a < tree_.num_edges(); ++a) {
                if (a == e) continue;
                if (tree_.edge_side(e, a) == Side::Gamma)
                    off_gamma += j_integral(pair.gamma_node, a);
                else
                    off_lambda += pair.lambda_scale * j_integral(pair.lambda_node, a);
            }

            double rho = coeffs_.rho(e);
            std::size_t M = samples;
            std::vector<double> seg_gamma(M), seg_lambda(M);
            for (std::size_t k = 0; k < M; ++k) {
                double a0 = out.sample_x(e, k);
                double a1 = out.sample_x(e, k + 1);
                seg_gamma[k] = rho * integrate_adaptive(
                                         [&](double y) {
                                             return psi_state(pair.gamma_node,
                                                              Point{e, y})
                                                        .f *
                                                    h[e](y);
                                         },
                                         a0, a1, opt_.quad_rtol);
                seg_lambda[k] =
                    rho * pair.lambda_scale *
                    integrate_adaptive(
                        [&](double y) {
                            return psi_state(pair.lambda_node, Point{e, y}).f * h[e](y);
                        },
                        a0, a1, opt_.quad_rtol);
            }
            std::vector<double> pref(M + 1, 0.0), suff(M + 1, 0.0);
            for (std::size_t k = 0; k < M; ++k) pref[k + 1] = pref[k] + seg_gamma[k];
            for (std::size_t k = M; k-- > 0;) suff[k] = suff[k + 1] + seg_lambda[k];

            double inv_rho = 1.0 / rho;
            for (std::size_t k = 0; k <= M; ++k) {
                Point pt{e, out.sample_x(e, k)};
                EdgeState sg = psi_state(pair.gamma_node, pt);
                EdgeState sl = psi_state(pair.lambda_node, pt);
                double gamma_f = sg.f, gamma_d = sg.fprime;
                double lambda_f = pair.lambda_scale * sl.f;
                double lambda_d = pair.lambda_scale * sl.fprime;
                double left = off_gamma + pref[k];
                double right = off_lambda + suff[k];
                out.sample_value(e, k) = inv_rho * (lambda_f * left + gamma_f * right);
                out.sample_derivative(e, k) =
                    inv_rho * (lambda_d * left + gamma_d * right);
            }
        }
        return out;
    }

    TreeGraph tree_;
    Coefficients coeffs_;
    GreenOptions opt_;
    FundamentalBasis basis_;
    std::vector<Functional> fns_;
    DeltaMatrix delta_;
    std::vector<std::size_t> boundary_;
    std::map<std::size_t, GlobalKernelSolution> psi_cache_;
    std::vector<PsiPair> pairs_;
    std::size_t solve_count_ = 0;
};

} // namespace treegreen
