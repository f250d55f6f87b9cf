#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "treegreen/conditions.hpp"

using namespace treegreen;
using Catch::Approx;

namespace {

TreeGraph ytree() {
    return TreeGraph({"b1", "b2", "b3", "n"},
                     {{"e0", "b1", "n", 1.0}, {"e1", "n", "b2", 1.0},
                      {"e2", "n", "b3", 1.0}});
}

Coefficients unit_coeffs(std::size_t m, double q = 0.0) {
    std::vector<EdgeFunction> p(m, EdgeFunction::constant(1.0));
    std::vector<EdgeFunction> qs(m, EdgeFunction::constant(q));
    return Coefficients(p, qs, std::vector<double>(m, 1.0));
}

} // namespace

TEST_CASE("boundary condition table fallback and strict mode") {
    BoundaryConditions lenient;
    REQUIRE(lenient.at(7).type == BoundaryType::Dirichlet);
    BoundaryConditions strict = BoundaryConditions::strict();
    REQUIRE_THROWS_AS(strict.at(0), MissingBoundarySpec);
    strict.set(0, {BoundaryType::Neumann});
    REQUIRE(strict.at(0).type == BoundaryType::Neumann);
    REQUIRE_THROWS_AS(strict.set(1, {BoundaryType::Robin, 0.0, 0.0}), ConfigError);
    REQUIRE_NOTHROW(strict.set(1, {BoundaryType::Robin, 1.0, -2.0}));
}

TEST_CASE("standard functionals count twice the edges") {
    BoundaryConditions bc;
    TreeGraph y = ytree();
    REQUIRE(standard_functionals(y, bc).size() == 6);
    TreeGraph single({"a", "b"}, {{"e", "a", "b", 1.0}});
    REQUIRE(standard_functionals(single, bc).size() == 2);
    TreeGraph path({"a", "b", "c"}, {{"e0", "a", "b", 1.0}, {"e1", "b", "c", 1.0}});
    REQUIRE(standard_functionals(path, bc).size() == 4);
}

TEST_CASE("functional layout follows node id order") {
    TreeGraph t = ytree();
    BoundaryConditions bc;
    bc.set(t.node_index("b2"), {BoundaryType::Neumann});
    bc.set(t.node_index("b3"), {BoundaryType::Robin, 2.0, 1.0});
    auto fns = standard_functionals(t, bc);
    REQUIRE(std::holds_alternative<DirichletBoundary>(fns[0]));
    REQUIRE(std::holds_alternative<NeumannBoundary>(fns[1]));
    REQUIRE(std::holds_alternative<RobinBoundary>(fns[2]));
    REQUIRE(std::holds_alternative<Continuity>(fns[3]));
    REQUIRE(std::holds_alternative<Continuity>(fns[4]));
    REQUIRE(std::holds_alternative<FluxSum>(fns[5]));
    // Continuity pairs walk consecutive incident edges in edge-index order.
    const auto& c0 = std::get<Continuity>(fns[3]);
    REQUIRE(c0.a.edge == 0);
    REQUIRE(c0.b.edge == 1);
    REQUIRE(boundary_functional_index(fns, 1) == 1);
    REQUIRE_THROWS_AS(boundary_functional_index(fns, 3), OutOfDomain);
}

TEST_CASE("applying functionals to hand-built traces") {
    TreeGraph t = ytree();
    Coefficients c = unit_coeffs(3);
    BoundaryConditions bc;
    auto fns = standard_functionals(t, bc);

    // Globally continuous, value 1 at n; slopes out of n are -1, 2, -1.
    Trace tr(3);
    tr.fill_zero();
    tr.set(0, false, 1.0, -1.0, -1.0);
    tr.set(1, true, 1.0, 2.0, 2.0);
    tr.set(2, true, 1.0, -1.0, -1.0);
    REQUIRE(apply(fns[3], tr, c) == 0.0); // continuity e0 vs e1
    REQUIRE(apply(fns[4], tr, c) == 0.0);
    REQUIRE(apply(fns[5], tr, c) == 0.0); // -1 + 2 - 1

    // Unequal weights break the balance: 1*(-1) + 2*2 + 3*(-1) = 0 would be a
    // coincidence, so use slopes 1, 1, 1 instead.
    Coefficients cw = Coefficients({EdgeFunction::constant(1.0),
                                    EdgeFunction::constant(1.0),
                                    EdgeFunction::constant(1.0)},
                                   {EdgeFunction::constant(0.0),
                                    EdgeFunction::constant(0.0),
                                    EdgeFunction::constant(0.0)},
                                   {1.0, 2.0, 3.0});
    Trace tr2(3);
    tr2.fill_zero();
    tr2.set(0, false, 0.5, 1.0, 1.0);
    tr2.set(1, true, 0.25, 1.0, 1.0);
    tr2.set(2, true, 0.25, 1.0, 1.0);
    REQUIRE(apply(fns[5], tr2, cw) == Approx(6.0));
    REQUIRE(apply(fns[3], tr2, cw) == Approx(-0.25));
}

TEST_CASE("trace of an edge solution flips signs at the head end") {
    TreeGraph t({"a", "b"}, {{"e", "a", "b", 1.0}});
    Coefficients c = unit_coeffs(1);
    EdgeSolution s = integrate_edge(t, 0, c, 0.0, 1.0); // f = x
    Trace tr = trace_of_edge_solution(s, 1);
    const EndpointTrace& tail = tr.at({0, true});
    const EndpointTrace& head = tr.at({0, false});
    REQUIRE(tail.value == Approx(0.0).margin(1e-12));
    REQUIRE(tail.dvalue_b == Approx(1.0).margin(1e-12));
    REQUIRE(head.value == Approx(1.0).margin(1e-12));
    REQUIRE(head.dvalue_b == Approx(-1.0).margin(1e-12));
    REQUIRE(head.flux_b == Approx(-1.0).margin(1e-12));

    BoundaryConditions bc;
    auto fns = standard_functionals(t, bc);
    REQUIRE(apply(fns[1], tr, c) == Approx(1.0).margin(1e-12)); // f(b) for f = x
}

TEST_CASE("incomplete traces are rejected") {
    Trace tr(2);
    tr.set(0, true, 1.0, 0.0, 0.0);
    Functional d = DirichletBoundary{0, {0, true}};
    Coefficients c = unit_coeffs(2);
    REQUIRE_NOTHROW(apply(d, tr, c));
    Functional other = DirichletBoundary{1, {1, false}};
    REQUIRE_THROWS_AS(apply(other, tr, c), IncompleteTrace);
}

TEST_CASE("interval Dirichlet Delta matrix") {
    TreeGraph t({"a", "b"}, {{"e", "a", "b", 1.0}});
    Coefficients c = unit_coeffs(1);
    FundamentalBasis basis(t, c);
    auto fns = standard_functionals(t, BoundaryConditions{});
    DeltaMatrix delta(basis, fns, c);
    REQUIRE(delta.matrix()(0, 0) == Approx(1.0).margin(1e-10));
    REQUIRE(delta.matrix()(0, 1) == Approx(0.0).margin(1e-10));
    REQUIRE(delta.matrix()(1, 0) == Approx(1.0).margin(1e-10));
    REQUIRE(delta.matrix()(1, 1) == Approx(1.0).margin(1e-10));
    REQUIRE(delta.det() == Approx(1.0).epsilon(1e-9));
    REQUIRE(delta.nondegenerate());
    REQUIRE(check_nondegenerate(delta).nondegenerate);
}

TEST_CASE("Neumann-Neumann with q = 0 is degenerate") {
    TreeGraph t({"a", "b"}, {{"e", "a", "b", 1.0}});
    Coefficients c = unit_coeffs(1);
    FundamentalBasis basis(t, c);
    BoundaryConditions bc;
    bc.set(0, {BoundaryType::Neumann});
    bc.set(1, {BoundaryType::Neumann});
    auto fns = standard_functionals(t, bc);
    DeltaMatrix delta(basis, fns, c);
    REQUIRE(std::fabs(delta.det()) <= 1e-10);
    REQUIRE(!delta.nondegenerate());
    REQUIRE(check_nondegenerate(delta).rcond <= DeltaMatrix::degeneracy_threshold);
}

TEST_CASE("Y-tree Dirichlet problem is nondegenerate") {
    TreeGraph t = ytree();
    Coefficients c = unit_coeffs(3);
    FundamentalBasis basis(t, c);
    auto fns = standard_functionals(t, BoundaryConditions{});
    DeltaMatrix delta(basis, fns, c);
    REQUIRE(delta.nondegenerate());
    REQUIRE(delta.rcond() > 1e-6);
}

TEST_CASE("Delta encodes the functionals linearly") {
    TreeGraph t = ytree();
    Coefficients c({EdgeFunction::parse("1 + x/4"), EdgeFunction::constant(2.0),
                    EdgeFunction::constant(1.0)},
                   {EdgeFunction::constant(1.0), EdgeFunction::parse("cos(x)"),
                    EdgeFunction::constant(0.0)},
                   {1.0, 2.0, 3.0});
    FundamentalBasis basis(t, c);
    auto fns = standard_functionals(t, BoundaryConditions{});
    DeltaMatrix delta(basis, fns, c);

    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd a(6);
    for (int j = 0; j < 6; ++j) a[j] = dist(rng);

    // Trace of f = sum_j a_j phi_j, assembled per edge from the two local
    // basis solutions.
    Trace tr(3);
    for (std::size_t e = 0; e < 3; ++e) {
        const EdgeSolution& even = basis.on_support(2 * e);
        const EdgeSolution& odd = basis.on_support(2 * e + 1);
        double ae = a[static_cast<int>(2 * e)];
        double ao = a[static_cast<int>(2 * e + 1)];
        EdgeState s0e = even.eval(0.0), s0o = odd.eval(0.0);
        EdgeState sle = even.eval(even.length()), slo = odd.eval(odd.length());
        tr.set(e, true, ae * s0e.f + ao * s0o.f, ae * s0e.fprime + ao * s0o.fprime,
               ae * s0e.flux + ao * s0o.flux);
        tr.set(e, false, ae * sle.f + ao * slo.f,
               -(ae * sle.fprime + ao * slo.fprime), -(ae * sle.flux + ao * slo.flux));
    }

    Eigen::VectorXd expect = delta.matrix() * a;
    for (std::size_t i = 0; i < 6; ++i) {
        double got = apply(fns[i], tr, c);
        REQUIRE(std::fabs(got - expect[static_cast<int>(i)]) <=
                1e-10 * (1.0 + std::fabs(expect[static_cast<int>(i)])));
    }
}

TEST_CASE("renaming nodes permutes Delta without changing |det|") {
    Coefficients c = unit_coeffs(3, 1.0);
    TreeGraph t1 = ytree();
    // Same tree, internal node renamed so it sorts first instead of last.
    TreeGraph t2({"aa", "b1", "b2", "b3"},
                 {{"e0", "b1", "aa", 1.0}, {"e1", "aa", "b2", 1.0},
                  {"e2", "aa", "b3", 1.0}});
    FundamentalBasis basis1(t1, c), basis2(t2, c);
    DeltaMatrix d1(basis1, standard_functionals(t1, BoundaryConditions{}), c);
    DeltaMatrix d2(basis2, standard_functionals(t2, BoundaryConditions{}), c);
    REQUIRE(std::fabs(d1.det()) ==
            Approx(std::fabs(d2.det())).epsilon(1e-10));
    REQUIRE(d1.nondegenerate() == d2.nondegenerate());
}
