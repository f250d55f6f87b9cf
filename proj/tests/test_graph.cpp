#include <catch2/catch_amalgamated.hpp>

#include "treegreen/graph.hpp"

using namespace treegreen;

namespace {

TreeGraph ytree() {
    return TreeGraph({"b1", "b2", "b3", "n"},
                     {{"e0", "b1", "n", 1.0}, {"e1", "n", "b2", 1.0},
                      {"e2", "n", "b3", 1.0}});
}

} // namespace

TEST_CASE("ids are sorted and indexed deterministically") {
    TreeGraph t({"n", "b2", "b1", "b3"},
                {{"e1", "n", "b2", 1.0}, {"e0", "b1", "n", 1.0},
                 {"e2", "n", "b3", 1.0}});
    REQUIRE(t.num_nodes() == 4);
    REQUIRE(t.num_edges() == 3);
    REQUIRE(t.node_id(0) == "b1");
    REQUIRE(t.node_id(3) == "n");
    REQUIRE(t.edge_id(0) == "e0");
    REQUIRE(t.edge_index("e2") == 2);
    REQUIRE(t.node_index("b2") == 1);
    REQUIRE(!t.find_edge("nope").has_value());
    REQUIRE_THROWS_AS(t.node_index("nope"), OutOfDomain);
}

TEST_CASE("edge endpoints and lengths") {
    TreeGraph t = ytree();
    std::size_t e0 = t.edge_index("e0");
    REQUIRE(t.edge_tail(e0) == t.node_index("b1"));
    REQUIRE(t.edge_head(e0) == t.node_index("n"));
    REQUIRE(t.edge_length(e0) == 1.0);
}

TEST_CASE("boundary classification") {
    TreeGraph t = ytree();
    REQUIRE(t.is_boundary(t.node_index("b1")));
    REQUIRE(t.is_boundary(t.node_index("b3")));
    REQUIRE(!t.is_boundary(t.node_index("n")));
    REQUIRE(t.degree(t.node_index("n")) == 3);
    auto b = t.boundary_nodes();
    REQUIRE(b == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("incident edges are ordered by edge index") {
    TreeGraph t = ytree();
    const auto& inc = t.incident(t.node_index("n"));
    REQUIRE(inc.size() == 3);
    REQUIRE(inc[0].edge == 0);
    REQUIRE(!inc[0].at_tail); // n is the head of e0
    REQUIRE(inc[1].edge == 1);
    REQUIRE(inc[1].at_tail);
    REQUIRE(t.node_across(inc[0]) == t.node_index("b1"));
}

TEST_CASE("validation rejects nonpositive lengths first") {
    REQUIRE_THROWS_AS(TreeGraph({"a", "b"}, {{"e", "a", "b", 0.0}}),
                      NonPositiveLength);
    REQUIRE_THROWS_AS(TreeGraph({"a", "b"}, {{"e", "a", "missing", -1.0}}),
                      NonPositiveLength);
}

TEST_CASE("validation rejects dangling endpoints") {
    REQUIRE_THROWS_AS(TreeGraph({"a", "b"}, {{"e", "a", "c", 1.0}}),
                      DanglingEndpoint);
}

TEST_CASE("validation rejects cycles") {
    REQUIRE_THROWS_AS(TreeGraph({"a", "b"}, {{"e", "a", "a", 1.0}}), CycleDetected);
    REQUIRE_THROWS_AS(TreeGraph({"a", "b", "c"},
                                {{"e0", "a", "b", 1.0}, {"e1", "b", "c", 1.0},
                                 {"e2", "c", "a", 1.0}}),
                      CycleDetected);
    // Parallel edges: right edge count for a tree, still cyclic.
    REQUIRE_THROWS_AS(TreeGraph({"a", "b", "c"},
                                {{"e0", "a", "b", 1.0}, {"e1", "b", "a", 1.0}}),
                      CycleDetected);
}

TEST_CASE("validation rejects disconnected graphs") {
    REQUIRE_THROWS_AS(TreeGraph({"a", "b", "c"}, {{"e", "a", "b", 1.0}}),
                      Disconnected);
}

TEST_CASE("duplicate ids are rejected") {
    REQUIRE_THROWS_AS(TreeGraph({"a", "a", "b"}, {{"e", "a", "b", 1.0}}), ConfigError);
    REQUIRE_THROWS_AS(TreeGraph({"a", "b", "c"},
                                {{"e", "a", "b", 1.0}, {"e", "b", "c", 1.0}}),
                      ConfigError);
}

TEST_CASE("single edge graph is a valid tree") {
    TreeGraph t({"a", "b"}, {{"e", "a", "b", 2.0}});
    REQUIRE(t.num_edges() == 1);
    REQUIRE(t.boundary_nodes().size() == 2);
}

TEST_CASE("root designation") {
    TreeGraph with({"a", "b"}, {{"e", "a", "b", 1.0}}, "a");
    REQUIRE(with.has_root());
    REQUIRE(with.root() == with.node_index("a"));
    TreeGraph without({"a", "b"}, {{"e", "a", "b", 1.0}});
    REQUIRE_THROWS_AS(without.root(), NoRootDesignated);
    REQUIRE_THROWS_AS(TreeGraph({"a", "b"}, {{"e", "a", "b", 1.0}}, "zz"),
                      DanglingEndpoint);
}

TEST_CASE("side of nodes and edges relative to a cut") {
    TreeGraph t = ytree();
    std::size_t e0 = 0;
    REQUIRE(t.node_side(e0, t.node_index("b1")) == Side::Gamma);
    REQUIRE(t.node_side(e0, t.node_index("n")) == Side::Lambda);
    REQUIRE(t.node_side(e0, t.node_index("b3")) == Side::Lambda);
    REQUIRE(t.edge_side(e0, 1) == Side::Lambda);
    REQUIRE(t.edge_side(e0, 2) == Side::Lambda);
    // Cutting a leaf-side edge puts the rest of the tree on the tail side.
    REQUIRE(t.edge_side(1, 0) == Side::Gamma);
    REQUIRE(t.edge_side(1, 2) == Side::Gamma);
    REQUIRE_THROWS_AS(t.edge_side(0, 0), OutOfDomain);
}

TEST_CASE("side of points on the cut edge itself") {
    TreeGraph t = ytree();
    REQUIRE(t.side(0, 0.5, Point{0, 0.25}) == Side::Gamma);
    REQUIRE(t.side(0, 0.5, Point{0, 0.75}) == Side::Lambda);
    REQUIRE(t.side(0, 0.5, Point{1, 0.1}) == Side::Lambda);
    REQUIRE_THROWS_AS(t.side(0, 0.5, Point{0, 0.5}), CoincidentPoints);
    REQUIRE_THROWS_AS(t.side(0, 0.0, Point{1, 0.5}), PointAtNode);
    REQUIRE_THROWS_AS(t.side(0, 1.0, Point{1, 0.5}), PointAtNode);
    REQUIRE_THROWS_AS(t.side(0, 0.5, Point{0, 1.5}), OutOfDomain);
}

TEST_CASE("check_on_edge validates the domain") {
    TreeGraph t({"a", "b"}, {{"e", "a", "b", 2.0}});
    REQUIRE_NOTHROW(t.check_on_edge(0, 0.0));
    REQUIRE_NOTHROW(t.check_on_edge(0, 2.0));
    REQUIRE_THROWS_AS(t.check_on_edge(0, -0.1), OutOfDomain);
    REQUIRE_THROWS_AS(t.check_on_edge(0, 2.1), OutOfDomain);
    REQUIRE_THROWS_AS(t.check_on_edge(5, 0.5), OutOfDomain);
}
