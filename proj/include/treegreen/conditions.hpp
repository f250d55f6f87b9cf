#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "treegreen/coeffs.hpp"
#include "treegreen/edgeode.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/graph.hpp"

namespace treegreen {

enum class BoundaryType { Dirichlet, Neumann, Robin };

struct BoundaryCondition {
    BoundaryType type = BoundaryType::Dirichlet;
    /// Robin parameters for alpha * f + beta * f'^b = value; unused otherwise.
    double alpha = 1.0;
    double beta = 0.0;
};

/// Per-boundary-node condition table.  Unlisted nodes fall back to Dirichlet
/// unless the table was created strict, in which case a missing entry is an
/// error.
class BoundaryConditions {
public:
    BoundaryConditions() : fallback_(BoundaryCondition{}) {}

    static BoundaryConditions strict() {
        BoundaryConditions bc;
        bc.fallback_.reset();
        return bc;
    }

    void set(std::size_t node, BoundaryCondition cond) {
        if (cond.type == BoundaryType::Robin && cond.alpha == 0.0 && cond.beta == 0.0)
            throw ConfigError("Robin condition needs (alpha, beta) != (0, 0)");
        table_[node] = cond;
    }

    BoundaryCondition at(std::size_t node) const {
        auto it = table_.find(node);
        if (it != table_.end()) return it->second;
        if (fallback_) return *fallback_;
        throw MissingBoundarySpec("no boundary condition for node index " +
                                  std::to_string(node));
    }

private:
    std::map<std::size_t, BoundaryCondition> table_;
    std::optional<BoundaryCondition> fallback_;
};

// -- node functionals -------------------------------------------------------

/// f at the shared node evaluated along edge b minus along edge a; a and b
/// are consecutive incident edges in edge-index order.
struct Continuity {
    std::size_t node = 0;
    EdgeEnd a, b;
};

/// Sum of rho_e f'^b over the edges incident to an internal node.
struct FluxSum {
    std::size_t node = 0;
    std::vector<EdgeEnd> ends;
};

struct DirichletBoundary {
    std::size_t node = 0;
    EdgeEnd end;
};

struct NeumannBoundary {
    std::size_t node = 0;
    EdgeEnd end;
};

struct RobinBoundary {
    std::size_t node = 0;
    EdgeEnd end;
    double alpha = 1.0;
    double beta = 0.0;
};

using Functional =
    std::variant<Continuity, FluxSum, DirichletBoundary, NeumannBoundary, RobinBoundary>;

/// Endpoint data of one global function: the value, the boundary derivative
/// f'^b (pointing out of the node into the edge: +f'(0) at the tail end,
/// -f'(l) at the head end), and the corresponding flux p f'^b.
struct EndpointTrace {
    double value = 0.0;
    double dvalue_b = 0.0;
    double flux_b = 0.0;
    bool present = false;
};

class Trace {
public:
    explicit Trace(std::size_t num_edges) : ends_(2 * num_edges) {}

    /// Marks every endpoint as a known zero; used for functions with small
    /// support before filling in the nonzero edge.
    void fill_zero() {
        for (EndpointTrace& t : ends_) t = EndpointTrace{0.0, 0.0, 0.0, true};
    }

    void set(std::size_t edge, bool at_tail, double value, double dvalue_b,
             double flux_b) {
        ends_.at(2 * edge + (at_tail ? 0 : 1)) = {value, dvalue_b, flux_b, true};
    }

    const EndpointTrace& at(const EdgeEnd& end) const {
        const EndpointTrace& t = ends_.at(2 * end.edge + (end.at_tail ? 0 : 1));
        if (!t.present)
            throw IncompleteTrace("trace missing endpoint of edge index " +
                                  std::to_string(end.edge));
        return t;
    }

private:
    std::vector<EndpointTrace> ends_;
};

/// Trace of an EdgeSolution viewed as a global function that vanishes off
/// its edge.
inline Trace trace_of_edge_solution(const EdgeSolution& s, std::size_t num_edges) {
    Trace tr(num_edges);
    tr.fill_zero();
    EdgeState at0 = s.eval(0.0);
    EdgeState atl = s.eval(s.length());
    tr.set(s.edge(), true, at0.f, at0.fprime, at0.flux);
    tr.set(s.edge(), false, atl.f, -atl.fprime, -atl.flux);
    return tr;
}

/// The 2m standard node functionals: per internal node of degree k, k-1
/// continuity differences over consecutive incident edges followed by the
/// weighted flux sum; per boundary node, its boundary condition functional.
/// Nodes are visited in id order, so the global ordering is deterministic.
inline std::vector<Functional> standard_functionals(const TreeGraph& t,
                                                    const BoundaryConditions& bc) {
    std::vector<Functional> out;
    out.reserve(2 * t.num_edges());
    for (std::size_t n = 0; n < t.num_nodes(); ++n) {
        const std::vector<EdgeEnd>& inc = t.incident(n);
        if (t.is_boundary(n)) {
            BoundaryCondition cond = bc.at(n);
            switch (cond.type) {
                case BoundaryType::Dirichlet:
                    out.push_back(DirichletBoundary{n, inc[0]});
                    break;
                case BoundaryType::Neumann:
                    out.push_back(NeumannBoundary{n, inc[0]});
                    break;
                case BoundaryType::Robin:
                    out.push_back(RobinBoundary{n, inc[0], cond.alpha, cond.beta});
                    break;
            }
        } else {
            for (std::size_t i = 0; i + 1 < inc.size(); ++i)
                out.push_back(Continuity{n, inc[i], inc[i + 1]});
            out.push_back(FluxSum{n, inc});
        }
    }
    return out;
}

inline double apply(const Functional& fn, const Trace& tr, const Coefficients& c) {
    if (const auto* cont = std::get_if<Continuity>(&fn))
        return tr.at(cont->b).value - tr.at(cont->a).value;
    if (const auto* flux = std::get_if<FluxSum>(&fn)) {
        double sum = 0.0;
        for (const EdgeEnd& end : flux->ends)
            sum += c.rho(end.edge) * tr.at(end).dvalue_b;
        return sum;
    }
    if (const auto* d = std::get_if<DirichletBoundary>(&fn)) return tr.at(d->end).value;
    if (const auto* nm = std::get_if<NeumannBoundary>(&fn))
        return tr.at(nm->end).dvalue_b;
    const auto& r = std::get<RobinBoundary>(fn);
    return r.alpha * tr.at(r.end).value + r.beta * tr.at(r.end).dvalue_b;
}

/// Index of the boundary functional belonging to a boundary node.
inline std::size_t boundary_functional_index(const std::vector<Functional>& fns,
                                             std::size_t node) {
    for (std::size_t i = 0; i < fns.size(); ++i) {
        bool match = std::visit(
            [&](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, DirichletBoundary> ||
                              std::is_same_v<T, NeumannBoundary> ||
                              std::is_same_v<T, RobinBoundary>)
                    return f.node == node;
                else
                    return false;
            },
            fns[i]);
        if (match) return i;
    }
    throw OutOfDomain("node index " + std::to_string(node) +
                      " has no boundary functional");
}

// -- Delta matrix -----------------------------------------------------------

struct NondegeneracyReport {
    double det = 0.0;
    double rcond = 0.0;
    bool nondegenerate = false;
};

/// Dense matrix Delta_{ij} = l_i[phi_j] with its LU factorization and a
/// reciprocal condition estimate.  The degeneracy decision uses rcond, not
/// the determinant, so it is robust to overall scaling.
class DeltaMatrix {
public:
    static constexpr double degeneracy_threshold = 1e-12;

    DeltaMatrix(const FundamentalBasis& basis, const std::vector<Functional>& fns,
                const Coefficients& c) {
        const auto n = static_cast<Eigen::Index>(fns.size());
        delta_.resize(n, n);
        std::size_t num_edges = basis.size() / 2;
        for (std::size_t j = 0; j < basis.size(); ++j) {
            Trace tr = trace_of_edge_solution(basis.on_support(j), num_edges);
            for (std::size_t i = 0; i < fns.size(); ++i)
                delta_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    apply(fns[i], tr, c);
        }
        lu_.compute(delta_);
        det_ = lu_.determinant();
        double norm = delta_.cwiseAbs().colwise().sum().maxCoeff();
        Eigen::MatrixXd inv = lu_.inverse();
        double inv_norm = inv.cwiseAbs().colwise().sum().maxCoeff();
        double rc = 1.0 / (norm * inv_norm);
        rcond_ = std::isfinite(rc) ? rc : 0.0;
    }

    const Eigen::MatrixXd& matrix() const { return delta_; }
    double det() const { return det_; }
    double rcond() const { return rcond_; }
    bool nondegenerate() const { return rcond_ > degeneracy_threshold; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }

private:
    Eigen::MatrixXd delta_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double det_ = 0.0;
    double rcond_ = 0.0;
};

inline NondegeneracyReport check_nondegenerate(const DeltaMatrix& d) {
    return {d.det(), d.rcond(), d.nondegenerate()};
}

} // namespace treegreen
