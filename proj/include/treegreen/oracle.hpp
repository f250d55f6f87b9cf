#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "treegreen/coeffs.hpp"
#include "treegreen/conditions.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/graph.hpp"
#include "treegreen/green.hpp"

namespace treegreen {

/// Second-order finite-difference discretization of the tree problem,
/// independent of the kernel-factorization path: shared unknowns at graph
/// nodes, conservative 3-point stencils in edge interiors, one-sided
/// second-order stencils for the node flux balance and derivative boundary
/// conditions.
///
/// Unknown layout: all edge-interior points first (edge by edge), then one
/// unknown per graph node.
class DiscreteSystem {
public:
    DiscreteSystem(const TreeGraph& t, const Coefficients& c,
                   const BoundaryConditions& bc, std::size_t n)
        : tree_(t), coeffs_(c), n_(n) {
        if (n < 8) throw ConfigError("oracle mesh needs at least 8 subintervals");

        std::size_t m = t.num_edges();
        edge_base_.resize(m);
        std::size_t next = 0;
        for (std::size_t e = 0; e < m; ++e) {
            edge_base_[e] = next;
            next += n_ - 1;
        }
        node_base_ = next;
        total_ = next + t.num_nodes();

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(m * (n_ + 8) * 3);

        for (std::size_t e = 0; e < m; ++e) {
            double dx = t.edge_length(e) / static_cast<double>(n_);
            double inv2 = 1.0 / (dx * dx);
            for (std::size_t j = 1; j < n_; ++j) {
                double x = static_cast<double>(j) * dx;
                double pm = coeffs_.p(e)(x - 0.5 * dx);
                double pp = coeffs_.p(e)(x + 0.5 * dx);
                auto row = static_cast<int>(index(e, j));
                trip.emplace_back(row, static_cast<int>(index(e, j - 1)), -pm * inv2);
                trip.emplace_back(row, static_cast<int>(index(e, j)),
                                  (pm + pp) * inv2 + coeffs_.q(e)(x));
                trip.emplace_back(row, static_cast<int>(index(e, j + 1)), -pp * inv2);
            }
        }

        for (std::size_t nd = 0; nd < t.num_nodes(); ++nd) {
            auto row = static_cast<int>(node_base_ + nd);
            if (t.is_boundary(nd)) {
                BoundaryCondition cond = bc.at(nd);
                if (cond.type == BoundaryType::Dirichlet) {
                    trip.emplace_back(row, row, 1.0);
                    continue;
                }
                double alpha = cond.type == BoundaryType::Neumann ? 0.0 : cond.alpha;
                double beta = cond.type == BoundaryType::Neumann ? 1.0 : cond.beta;
                if (alpha != 0.0) trip.emplace_back(row, row, alpha);
                add_boundary_derivative(trip, row, t.incident(nd)[0], beta);
            } else {
                for (const EdgeEnd& end : t.incident(nd)) {
                    double p_end =
                        coeffs_.p(end.edge)(end.at_tail ? 0.0
                                                        : t.edge_length(end.edge));
                    add_boundary_derivative(trip, row, end,
                                            coeffs_.rho(end.edge) * p_end);
                }
            }
        }

        A_.resize(static_cast<int>(total_), static_cast<int>(total_));
        A_.setFromTriplets(trip.begin(), trip.end());
        A_.makeCompressed();
        lu_.compute(A_);
        factored_ = lu_.info() == Eigen::Success;
        if (factored_) estimate_condition();
    }

    std::size_t mesh() const noexcept { return n_; }
    std::size_t unknowns() const noexcept { return total_; }

    /// Global unknown index of mesh point j (0..n) on edge e; endpoints map
    /// to the shared node unknowns.
    std::size_t index(std::size_t e, std::size_t j) const {
        if (j == 0) return node_base_ + tree_.edge_tail(e);
        if (j == n_) return node_base_ + tree_.edge_head(e);
        return edge_base_[e] + j - 1;
    }

    /// rho-weighted trapezoid weight of mesh point j on edge e.
    double weight(std::size_t e, std::size_t j) const {
        double dx = tree_.edge_length(e) / static_cast<double>(n_);
        double w = coeffs_.rho(e) * dx;
        return (j == 0 || j == n_) ? 0.5 * w : w;
    }

    /// Reciprocal condition estimate from one probe solve; the threshold
    /// matches the Delta-matrix degeneracy rule so both paths agree on what
    /// counts as degenerate.
    double rcond_estimate() const noexcept { return rcond_est_; }

    Eigen::VectorXd apply_inverse(const Eigen::VectorXd& rhs) const {
        if (!factored_)
            throw SingularSystem("sparse factorization failed (degenerate problem?)");
        if (rcond_est_ <= 1e-12)
            throw SingularSystem("discrete system is numerically singular (rcond ~ " +
                                 std::to_string(rcond_est_) + ")");
        Eigen::VectorXd f = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success || !f.allFinite())
            throw SingularSystem("sparse solve failed (degenerate problem?)");
        return f;
    }

    /// Direct solve of the discretized semi-homogeneous problem L[f] = h.
    FunctionOnGraph solve(const std::vector<EdgeFunction>& h) const {
        if (h.size() != tree_.num_edges())
            throw ConfigError("right-hand side needs one function per edge");
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total_));
        for (std::size_t e = 0; e < tree_.num_edges(); ++e) {
            double dx = tree_.edge_length(e) / static_cast<double>(n_);
            for (std::size_t j = 1; j < n_; ++j)
                rhs[static_cast<Eigen::Index>(index(e, j))] =
                    h[e](static_cast<double>(j) * dx);
        }
        return to_function(apply_inverse(rhs));
    }

    /// Snaps y to its nearest interior mesh point.
    Point snap(const Point& y) const {
        double dx = tree_.edge_length(y.edge) / static_cast<double>(n_);
        auto j = static_cast<long>(std::lround(y.x / dx));
        j = std::max<long>(1, std::min<long>(static_cast<long>(n_) - 1, j));
        return Point{y.edge, static_cast<double>(j) * dx};
    }

    /// Sampled kernel column x -> G(x, y) with respect to the rho-weighted
    /// measure: unit discrete mass at the snapped source point.
    FunctionOnGraph green_column(const Point& y) const {
        Point ys = snap(y);
        double dx = tree_.edge_length(y.edge) / static_cast<double>(n_);
        auto j = static_cast<std::size_t>(std::lround(ys.x / dx));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total_));
        rhs[static_cast<Eigen::Index>(index(y.edge, j))] = 1.0 / weight(y.edge, j);
        return to_function(apply_inverse(rhs));
    }

private:
    /// Adds scale * f'^b at the given edge end to a matrix row, using the
    /// second-order one-sided 3-point stencil.
    void add_boundary_derivative(std::vector<Eigen::Triplet<double>>& trip, int row,
                                 const EdgeEnd& end, double scale) const {
        double dx = tree_.edge_length(end.edge) / static_cast<double>(n_);
        double c0 = scale * -3.0 / (2.0 * dx);
        double c1 = scale * 4.0 / (2.0 * dx);
        double c2 = scale * -1.0 / (2.0 * dx);
        if (end.at_tail) {
            trip.emplace_back(row, static_cast<int>(index(end.edge, 0)), c0);
            trip.emplace_back(row, static_cast<int>(index(end.edge, 1)), c1);
            trip.emplace_back(row, static_cast<int>(index(end.edge, 2)), c2);
        } else {
            trip.emplace_back(row, static_cast<int>(index(end.edge, n_)), c0);
            trip.emplace_back(row, static_cast<int>(index(end.edge, n_ - 1)), c1);
            trip.emplace_back(row, static_cast<int>(index(end.edge, n_ - 2)), c2);
        }
    }

    void estimate_condition() {
        // One-sample norm estimate of A^{-1}: solve against a fixed
        // pseudo-random right-hand side with nonzero overlap against any
        // candidate null vector.
        Eigen::VectorXd probe(static_cast<Eigen::Index>(total_));
        std::uint64_t state = 0x243f6a8885a308d3ull;
        for (Eigen::Index i = 0; i < probe.size(); ++i) {
            state = state * 6364136223846793005ull + 1442695040888963407ull;
            probe[i] = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
        }
        Eigen::VectorXd sol = lu_.solve(probe);
        if (lu_.info() != Eigen::Success || !sol.allFinite()) {
            rcond_est_ = 0.0;
            return;
        }
        double norm_a = 0.0;
        for (int k = 0; k < A_.outerSize(); ++k) {
            double colsum = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it)
                colsum += std::fabs(it.value());
            norm_a = std::max(norm_a, colsum);
        }
        double inv_gain = sol.lpNorm<1>() / probe.lpNorm<1>();
        double rc = 1.0 / (norm_a * inv_gain);
        rcond_est_ = std::isfinite(rc) ? rc : 0.0;
    }

    FunctionOnGraph to_function(const Eigen::VectorXd& f) const {
        FunctionOnGraph out(tree_, n_);
        for (std::size_t e = 0; e < tree_.num_edges(); ++e) {
            double dx = tree_.edge_length(e) / static_cast<double>(n_);
            for (std::size_t j = 0; j <= n_; ++j)
                out.sample_value(e, j) = f[static_cast<Eigen::Index>(index(e, j))];
            for (std::size_t j = 0; j <= n_; ++j) {
                double d;
                if (j == 0)
                    d = (-3.0 * out.sample_value(e, 0) + 4.0 * out.sample_value(e, 1) -
                         out.sample_value(e, 2)) /
                        (2.0 * dx);
                else if (j == n_)
                    d = (3.0 * out.sample_value(e, n_) -
                         4.0 * out.sample_value(e, n_ - 1) +
                         out.sample_value(e, n_ - 2)) /
                        (2.0 * dx);
                else
                    d = (out.sample_value(e, j + 1) - out.sample_value(e, j - 1)) /
                        (2.0 * dx);
                out.sample_derivative(e, j) = d;
            }
        }
        return out;
    }

    TreeGraph tree_;
    Coefficients coeffs_;
    std::size_t n_;
    std::vector<std::size_t> edge_base_;
    std::size_t node_base_ = 0;
    std::size_t total_ = 0;
    Eigen::SparseMatrix<double> A_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool factored_ = false;
    double rcond_est_ = 0.0;
};

inline DiscreteSystem discretize(const TreeGraph& t, const Coefficients& c,
                                 const BoundaryConditions& bc, std::size_t n) {
    return DiscreteSystem(t, c, bc, n);
}

} // namespace treegreen
