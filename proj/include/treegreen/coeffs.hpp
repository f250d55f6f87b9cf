#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "treegreen/edge_function.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/graph.hpp"

namespace treegreen {

/// Per-edge coefficients of L[f] = -(p f')' + q f together with the edge
/// weights rho of the measure d(rho) = rho_e dx.  rho is constant on each
/// edge and strictly positive.
class Coefficients {
public:
    Coefficients(std::vector<EdgeFunction> p, std::vector<EdgeFunction> q,
                 std::vector<double> rho)
        : p_(std::move(p)), q_(std::move(q)), rho_(std::move(rho)) {
        if (p_.size() != q_.size() || p_.size() != rho_.size())
            throw ConfigError("coefficient arrays must have one entry per edge");
        for (std::size_t e = 0; e < rho_.size(); ++e)
            if (!(rho_[e] > 0.0))
                throw NonPositiveRho("rho on edge index " + std::to_string(e) +
                                     " is " + std::to_string(rho_[e]));
    }

    std::size_t num_edges() const noexcept { return p_.size(); }
    const EdgeFunction& p(std::size_t e) const { return p_.at(e); }
    const EdgeFunction& q(std::size_t e) const { return q_.at(e); }
    double rho(std::size_t e) const { return rho_.at(e); }

private:
    std::vector<EdgeFunction> p_;
    std::vector<EdgeFunction> q_;
    std::vector<double> rho_;
};

/// Parameters of the river-network resolvent problem: per-edge diffusivity D
/// and flow velocity v, plus the global resolvent shift sigma.
struct RiverData {
    std::vector<double> D;
    std::vector<double> v;
    double sigma = 1.0;
};

/// Builds p(x) = exp(-int_root^x v/D) and q = sigma p / D for the river
/// preset.  The exponent accumulates over the unique path from the root:
/// walking an edge along its orientation adds (v_e/D_e) l_e, against it
/// subtracts.  Each edge then carries p_e(x) = exp(-Phi(tail_e)) *
/// exp(-(v_e/D_e) x), which is continuous across nodes by construction.
inline Coefficients river_coefficients(const TreeGraph& t, const RiverData& r,
                                       std::optional<std::vector<double>> rho =
                                           std::nullopt) {
    std::size_t m = t.num_edges();
    if (r.D.size() != m || r.v.size() != m)
        throw ConfigError("river data must have one D and one v per edge");
    for (std::size_t e = 0; e < m; ++e)
        if (!(r.D[e] > 0.0))
            throw ConfigError("river diffusivity on edge '" + t.edge_id(e) +
                              "' must be positive");
    if (!(r.sigma > 0.0))
        throw ConfigError("river sigma must be positive");

    std::size_t root = t.root(); // throws NoRootDesignated when unset

    std::vector<double> phi(t.num_nodes(), 0.0);
    std::vector<char> seen(t.num_nodes(), 0);
    seen[root] = 1;
    std::queue<std::size_t> work;
    work.push(root);
    while (!work.empty()) {
        std::size_t n = work.front();
        work.pop();
        for (const EdgeEnd& end : t.incident(n)) {
            std::size_t other = t.node_across(end);
            if (seen[other]) continue;
            seen[other] = 1;
            double step = r.v[end.edge] / r.D[end.edge] * t.edge_length(end.edge);
            phi[other] = phi[n] + (end.at_tail ? step : -step);
            work.push(other);
        }
    }

    std::vector<EdgeFunction> p, q;
    std::vector<double> weights = rho ? std::move(*rho) : std::vector<double>(m, 1.0);
    p.reserve(m);
    q.reserve(m);
    for (std::size_t e = 0; e < m; ++e) {
        double rate = -r.v[e] / r.D[e];
        double scale = std::exp(-phi[t.edge_tail(e)]);
        p.push_back(EdgeFunction::exp_linear(scale, rate));
        q.push_back(EdgeFunction::exp_linear(r.sigma / r.D[e] * scale, rate));
    }
    return Coefficients(std::move(p), std::move(q), std::move(weights));
}

struct CoefficientReport {
    double min_p = 0.0;
    double max_abs_q = 0.0;
    std::size_t min_p_edge = 0;
};

/// Samples p and q on every edge and reports the extremes.  Throws
/// NonPositiveP when the sampled minimum of p is not strictly positive and
/// NonPositiveRho for a bad weight.
inline CoefficientReport validate(const Coefficients& c, const TreeGraph& t,
                                  std::size_t n_samples) {
    if (n_samples < 2) throw ConfigError("validation needs at least two samples");
    CoefficientReport report;
    bool first = true;
    for (std::size_t e = 0; e < t.num_edges(); ++e) {
        if (!(c.rho(e) > 0.0))
            throw NonPositiveRho("rho on edge '" + t.edge_id(e) + "' is not positive");
        double l = t.edge_length(e);
        for (std::size_t k = 0; k < n_samples; ++k) {
            double x = l * static_cast<double>(k) / static_cast<double>(n_samples - 1);
            double pv = c.p(e)(x);
            double qv = c.q(e)(x);
            if (first || pv < report.min_p) {
                report.min_p = pv;
                report.min_p_edge = e;
            }
            report.max_abs_q = std::max(report.max_abs_q, std::fabs(qv));
            first = false;
        }
    }
    if (!(report.min_p > 0.0))
        throw NonPositiveP("sampled min of p on edge '" +
                           t.edge_id(report.min_p_edge) + "' is " +
                           std::to_string(report.min_p));
    return report;
}

} // namespace treegreen
