#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "treegreen/errors.hpp"

namespace treegreen {

/// Edge description as supplied by the caller.  Orientation is part of the
/// problem statement: the edge is parametrized from `tail` (x = 0) to `head`
/// (x = length).
struct EdgeSpec {
    std::string id;
    std::string tail;
    std::string head;
    double length = 0.0;

    friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

/// A point (edge, position) in the metric graph, with 0 <= x <= length.
struct Point {
    std::size_t edge = 0;
    double x = 0.0;
};

/// Which component of T \ {cut point} a point or edge falls in.  Gamma is the
/// component containing the tail end (e, 0) of the cut edge, Lambda the one
/// containing the head end (e, l_e).
enum class Side { Gamma, Lambda };

/// One attachment of an edge to a node.  `at_tail` tells which end of the
/// edge meets the node.
struct EdgeEnd {
    std::size_t edge = 0;
    bool at_tail = false;
};

/// Finite metric tree with directed, lexicographically ordered edges and
/// nodes.  Indices are positions in the sorted id lists, so they are stable
/// across runs for the same input.
///
/// Construction validates the tree property eagerly: positive lengths, no
/// dangling endpoint references, acyclicity, and connectivity, in that order.
class TreeGraph {
public:
    TreeGraph(std::vector<std::string> nodes, std::vector<EdgeSpec> edges,
              std::optional<std::string> root = std::nullopt) {
        std::sort(nodes.begin(), nodes.end());
        node_ids_ = std::move(nodes);
        for (std::size_t i = 1; i < node_ids_.size(); ++i)
            if (node_ids_[i] == node_ids_[i - 1])
                throw ConfigError("duplicate node id '" + node_ids_[i] + "'");

        std::sort(edges.begin(), edges.end(),
                  [](const EdgeSpec& a, const EdgeSpec& b) { return a.id < b.id; });
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (edges[i].id == edges[i - 1].id)
                throw ConfigError("duplicate edge id '" + edges[i].id + "'");

        for (const EdgeSpec& e : edges)
            if (!(e.length > 0.0))
                throw NonPositiveLength("edge '" + e.id + "' has length " +
                                        std::to_string(e.length));

        edge_ids_.reserve(edges.size());
        tail_.reserve(edges.size());
        head_.reserve(edges.size());
        length_.reserve(edges.size());
        for (const EdgeSpec& e : edges) {
            auto t = find_node(e.tail);
            auto h = find_node(e.head);
            if (!t)
                throw DanglingEndpoint("edge '" + e.id + "' references unknown node '" +
                                       e.tail + "'");
            if (!h)
                throw DanglingEndpoint("edge '" + e.id + "' references unknown node '" +
                                       e.head + "'");
            if (*t == *h)
                throw CycleDetected("edge '" + e.id + "' is a self-loop at node '" +
                                    e.tail + "'");
            edge_ids_.push_back(e.id);
            tail_.push_back(*t);
            head_.push_back(*h);
            length_.push_back(e.length);
        }

        if (node_ids_.empty())
            throw ConfigError("graph has no nodes");
        if (edge_ids_.size() + 1 != node_ids_.size()) {
            if (edge_ids_.size() + 1 > node_ids_.size())
                throw CycleDetected("graph has " + std::to_string(edge_ids_.size()) +
                                    " edges for " + std::to_string(node_ids_.size()) +
                                    " nodes");
            throw Disconnected("graph has " + std::to_string(edge_ids_.size()) +
                               " edges for " + std::to_string(node_ids_.size()) +
                               " nodes");
        }

        incident_.assign(node_ids_.size(), {});
        for (std::size_t e = 0; e < edge_ids_.size(); ++e) {
            incident_[tail_[e]].push_back({e, true});
            incident_[head_[e]].push_back({e, false});
        }
        // Edge ids are already sorted, so incident lists are too.

        check_tree();
        build_side_tables();

        if (root) {
            auto r = find_node(*root);
            if (!r)
                throw DanglingEndpoint("root references unknown node '" + *root + "'");
            root_ = *r;
        }
    }

    std::size_t num_nodes() const noexcept { return node_ids_.size(); }
    std::size_t num_edges() const noexcept { return edge_ids_.size(); }

    const std::string& node_id(std::size_t n) const { return node_ids_.at(n); }
    const std::string& edge_id(std::size_t e) const { return edge_ids_.at(e); }

    /// Index lookups; nullopt when the id is unknown.
    std::optional<std::size_t> find_node(const std::string& id) const {
        auto it = std::lower_bound(node_ids_.begin(), node_ids_.end(), id);
        if (it == node_ids_.end() || *it != id) return std::nullopt;
        return static_cast<std::size_t>(it - node_ids_.begin());
    }
    std::optional<std::size_t> find_edge(const std::string& id) const {
        auto it = std::lower_bound(edge_ids_.begin(), edge_ids_.end(), id);
        if (it == edge_ids_.end() || *it != id) return std::nullopt;
        return static_cast<std::size_t>(it - edge_ids_.begin());
    }

    std::size_t node_index(const std::string& id) const {
        auto n = find_node(id);
        if (!n) throw OutOfDomain("unknown node '" + id + "'");
        return *n;
    }
    std::size_t edge_index(const std::string& id) const {
        auto e = find_edge(id);
        if (!e) throw OutOfDomain("unknown edge '" + id + "'");
        return *e;
    }

    std::size_t edge_tail(std::size_t e) const { return tail_.at(e); }
    std::size_t edge_head(std::size_t e) const { return head_.at(e); }
    double edge_length(std::size_t e) const { return length_.at(e); }

    /// Incident edges of a node, ordered by edge index.
    const std::vector<EdgeEnd>& incident(std::size_t n) const { return incident_.at(n); }

    std::size_t degree(std::size_t n) const { return incident_.at(n).size(); }
    bool is_boundary(std::size_t n) const { return degree(n) == 1; }

    /// Boundary (degree one) node indices in increasing order.
    std::vector<std::size_t> boundary_nodes() const {
        std::vector<std::size_t> out;
        for (std::size_t n = 0; n < num_nodes(); ++n)
            if (is_boundary(n)) out.push_back(n);
        return out;
    }

    bool has_root() const noexcept { return root_.has_value(); }
    std::size_t root() const {
        if (!root_) throw NoRootDesignated("no root node designated");
        return *root_;
    }

    /// Opposite endpoint of an edge end.
    std::size_t node_at(const EdgeEnd& end) const {
        return end.at_tail ? tail_[end.edge] : head_[end.edge];
    }
    std::size_t node_across(const EdgeEnd& end) const {
        return end.at_tail ? head_[end.edge] : tail_[end.edge];
    }

    void check_on_edge(std::size_t e, double x) const {
        if (e >= num_edges())
            throw OutOfDomain("edge index " + std::to_string(e) + " out of range");
        if (!(x >= 0.0) || !(x <= length_[e]))
            throw OutOfDomain("position " + std::to_string(x) + " outside [0, " +
                              std::to_string(length_[e]) + "] on edge '" +
                              edge_ids_[e] + "'");
    }

    /// Side of a whole edge a != cut relative to the cut edge.  Which side a
    /// non-cut edge lands on does not depend on the cut position, so this is
    /// precomputed.
    Side edge_side(std::size_t cut, std::size_t a) const {
        if (cut == a)
            throw OutOfDomain("edge_side queried for the cut edge itself");
        return edge_on_gamma_.at(cut).at(a) ? Side::Gamma : Side::Lambda;
    }

    /// Side of a node relative to a cut of the given edge at an interior
    /// point.  tail(cut) lies on Gamma, head(cut) on Lambda.
    Side node_side(std::size_t cut, std::size_t n) const {
        return node_on_gamma_.at(cut).at(n) ? Side::Gamma : Side::Lambda;
    }

    /// Side of point (a, y) relative to the cut of edge `cut` at interior
    /// position x.  Throws CoincidentPoints when the two points agree and
    /// PointAtNode when the cut position is an endpoint of the cut edge.
    Side side(std::size_t cut, double x, const Point& p) const {
        check_on_edge(cut, x);
        check_on_edge(p.edge, p.x);
        if (x == 0.0 || x == length_[cut])
            throw PointAtNode("cut position coincides with a node of edge '" +
                              edge_ids_[cut] + "'");
        if (p.edge == cut) {
            if (p.x == x)
                throw CoincidentPoints("evaluation points coincide on edge '" +
                                       edge_ids_[cut] + "'");
            return p.x < x ? Side::Gamma : Side::Lambda;
        }
        return edge_side(cut, p.edge);
    }

private:
    void check_tree() {
        // Edge count already matches a tree; BFS certifies connectivity and
        // the absence of cycles in one pass.
        std::vector<char> node_seen(num_nodes(), 0);
        std::vector<char> edge_seen(num_edges(), 0);
        std::queue<std::size_t> work;
        work.push(0);
        node_seen[0] = 1;
        std::size_t reached = 1;
        while (!work.empty()) {
            std::size_t n = work.front();
            work.pop();
            for (const EdgeEnd& end : incident_[n]) {
                if (edge_seen[end.edge]) continue;
                edge_seen[end.edge] = 1;
                std::size_t other = node_across(end);
                if (node_seen[other])
                    throw CycleDetected("cycle through edge '" + edge_ids_[end.edge] +
                                        "'");
                node_seen[other] = 1;
                ++reached;
                work.push(other);
            }
        }
        if (reached != num_nodes()) {
            for (std::size_t n = 0; n < num_nodes(); ++n)
                if (!node_seen[n])
                    throw Disconnected("node '" + node_ids_[n] +
                                       "' is not reachable from node '" + node_ids_[0] +
                                       "'");
        }
    }

    void build_side_tables() {
        node_on_gamma_.assign(num_edges(), {});
        edge_on_gamma_.assign(num_edges(), {});
        for (std::size_t cut = 0; cut < num_edges(); ++cut) {
            std::vector<char> on_gamma(num_nodes(), 0);
            on_gamma[tail_[cut]] = 1;
            std::queue<std::size_t> work;
            work.push(tail_[cut]);
            while (!work.empty()) {
                std::size_t n = work.front();
                work.pop();
                for (const EdgeEnd& end : incident_[n]) {
                    if (end.edge == cut) continue;
                    std::size_t other = node_across(end);
                    if (on_gamma[other]) continue;
                    on_gamma[other] = 1;
                    work.push(other);
                }
            }
            node_on_gamma_[cut].assign(on_gamma.begin(), on_gamma.end());
            std::vector<char> edge_gamma(num_edges(), 0);
            for (std::size_t a = 0; a < num_edges(); ++a) {
                if (a == cut) continue;
                // Both endpoints of a non-cut edge share a side.
                edge_gamma[a] = on_gamma[tail_[a]];
            }
            edge_on_gamma_[cut].assign(edge_gamma.begin(), edge_gamma.end());
        }
    }

    std::vector<std::string> node_ids_;
    std::vector<std::string> edge_ids_;
    std::vector<std::size_t> tail_;
    std::vector<std::size_t> head_;
    std::vector<double> length_;
    std::vector<std::vector<EdgeEnd>> incident_;
    std::vector<std::vector<char>> node_on_gamma_;
    std::vector<std::vector<char>> edge_on_gamma_;
    std::optional<std::size_t> root_;
};

} // namespace treegreen
