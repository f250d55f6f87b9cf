#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "treegreen/green.hpp"

using namespace treegreen;
using Catch::Approx;

namespace {

TreeGraph interval_tree() {
    return TreeGraph({"a", "b"}, {{"e", "a", "b", 1.0}});
}

TreeGraph ytree() {
    return TreeGraph({"b1", "b2", "b3", "n"},
                     {{"e0", "b1", "n", 1.0}, {"e1", "n", "b2", 1.0},
                      {"e2", "n", "b3", 1.0}});
}

Coefficients constant_coeffs(std::size_t m, double q = 0.0,
                             std::vector<double> rho = {}) {
    if (rho.empty()) rho.assign(m, 1.0);
    return Coefficients(std::vector<EdgeFunction>(m, EdgeFunction::constant(1.0)),
                        std::vector<EdgeFunction>(m, EdgeFunction::constant(q)),
                        std::move(rho));
}

std::vector<EdgeFunction> constant_rhs(std::size_t m, double v) {
    return std::vector<EdgeFunction>(m, EdgeFunction::constant(v));
}

// Trace of a sampled global function, for measuring node functionals.
Trace trace_of(const FunctionOnGraph& f, const TreeGraph& t, const Coefficients& c) {
    Trace tr(t.num_edges());
    for (std::size_t e = 0; e < t.num_edges(); ++e) {
        double l = t.edge_length(e);
        double f0 = f.value(e, 0.0), d0 = f.derivative(e, 0.0);
        double fl = f.value(e, l), dl = f.derivative(e, l);
        tr.set(e, true, f0, d0, c.p(e)(0.0) * d0);
        tr.set(e, false, fl, -dl, -c.p(e)(l) * dl);
    }
    return tr;
}

} // namespace

TEST_CASE("interval kernel pair and cached solutions") {
    TreeGraph t = interval_tree();
    GreensFunction g(t, constant_coeffs(1), BoundaryConditions{});
    REQUIRE(g.solve_count() == 2);

    const PsiPair& pair = g.psi_pair(0);
    REQUIRE(pair.gamma_node == t.node_index("b"));
    REQUIRE(pair.lambda_node == t.node_index("a"));
    REQUIRE(pair.lambda_scale == Approx(1.0).epsilon(1e-8));
    REQUIRE(pair.normalized_w == -1.0);

    // psi_b = x, psi_a = 1 - x; each equals one at its own node.
    REQUIRE(g.psi_state(1, Point{0, 0.7}).f == Approx(0.7).margin(1e-9));
    REQUIRE(g.psi_state(1, Point{0, 1.0}).f == Approx(1.0).margin(1e-9));
    REQUIRE(g.psi_state(0, Point{0, 0.7}).f == Approx(0.3).margin(1e-9));
    REQUIRE(g.psi_state(0, Point{0, 0.0}).f == Approx(1.0).margin(1e-9));
    REQUIRE_THROWS_AS(g.psi_for_boundary_node(99), OutOfDomain);
}

TEST_CASE("interval Green values match min(x,y)(1 - max(x,y))") {
    TreeGraph t = interval_tree();
    GreensFunction g(t, constant_coeffs(1), BoundaryConditions{});
    REQUIRE(g.eval(Point{0, 0.5}, Point{0, 0.25}) == Approx(0.125).margin(1e-9));
    REQUIRE(g.eval(Point{0, 0.25}, Point{0, 0.5}) == Approx(0.125).margin(1e-9));
    REQUIRE(g.eval(Point{0, 0.5}, Point{0, 0.5}) == Approx(0.25).margin(1e-9));
    for (int i = 1; i < 8; ++i) {
        for (int j = 1; j < 8; ++j) {
            double x = i / 8.0, y = j / 8.0;
            double want = std::min(x, y) * (1.0 - std::max(x, y));
            REQUIRE(g.eval(Point{0, x}, Point{0, y}) == Approx(want).margin(1e-9));
        }
    }
    // Continuity across y = x from both sides.
    double left = g.eval(Point{0, 0.5}, Point{0, 0.5 - 1e-9});
    double right = g.eval(Point{0, 0.5}, Point{0, 0.5 + 1e-9});
    REQUIRE(left == Approx(right).margin(1e-7));
    // The kernel vanishes toward the Dirichlet ends.
    REQUIRE(g.eval_node_limit(EdgeEnd{0, true}, Point{0, 0.5}) ==
            Approx(0.0).margin(1e-10));
    REQUIRE(g.eval_node_limit(EdgeEnd{0, false}, Point{0, 0.5}) ==
            Approx(0.0).margin(1e-10));
}

TEST_CASE("interval Green with q = 1 hits the sinh closed form") {
    TreeGraph t = interval_tree();
    GreensFunction g(t, constant_coeffs(1, 1.0), BoundaryConditions{});
    double want = std::sinh(0.5) * std::sinh(0.5) / std::sinh(1.0);
    REQUIRE(g.eval(Point{0, 0.5}, Point{0, 0.5}) == Approx(want).margin(1e-9));
    REQUIRE(g.eval(Point{0, 0.5}, Point{0, 0.5}) ==
            Approx(0.23105857863000487).margin(1e-9));
}

TEST_CASE("eval rejects node positions and bad points") {
    TreeGraph t = interval_tree();
    GreensFunction g(t, constant_coeffs(1), BoundaryConditions{});
    REQUIRE_THROWS_AS(g.eval(Point{0, 0.0}, Point{0, 0.5}), PointAtNode);
    REQUIRE_THROWS_AS(g.eval(Point{0, 1.0}, Point{0, 0.5}), PointAtNode);
    REQUIRE_THROWS_AS(g.eval(Point{0, 0.5}, Point{0, 1.5}), OutOfDomain);
    REQUIRE_THROWS_AS(g.eval(Point{1, 0.5}, Point{0, 0.5}), OutOfDomain);
}

TEST_CASE("Y-tree Green values and node limits") {
    TreeGraph t = ytree();
    GreensFunction g(t, constant_coeffs(3), BoundaryConditions{});
    REQUIRE(g.solve_count() == 3);
    REQUIRE(g.eval(Point{0, 0.5}, Point{1, 0.5}) == Approx(1.0 / 12.0).margin(1e-9));
    REQUIRE(g.eval(Point{1, 0.5}, Point{0, 0.5}) == Approx(1.0 / 12.0).margin(1e-9));

    // The limit at the internal node agrees along every incident edge.
    Point y{1, 0.25};
    double via_e0 = g.eval_node_limit(EdgeEnd{0, false}, y);
    double via_e1 = g.eval_node_limit(EdgeEnd{1, true}, y);
    double via_e2 = g.eval_node_limit(EdgeEnd{2, true}, y);
    REQUIRE(via_e0 == Approx(via_e1).margin(1e-9));
    REQUIRE(via_e0 == Approx(via_e2).margin(1e-9));

    std::size_t before = g.solve_count();
    for (int k = 1; k < 20; ++k)
        (void)g.eval(Point{0, k / 20.0}, Point{2, 0.3});
    REQUIRE(g.solve_count() == before);
}

TEST_CASE("normalized Wronskian is -1 on every edge") {
    TreeGraph t = ytree();
    // p is nonconstant on every edge but continuous at the junction (5/4).
    Coefficients c({EdgeFunction::parse("1 + x/4"), EdgeFunction::parse("1.25 - x/4"),
                    EdgeFunction::parse("1.25 * exp(-x/3)")},
                   {EdgeFunction::constant(1.0), EdgeFunction::parse("cos(x)"),
                    EdgeFunction::constant(0.0)},
                   {1.0, 2.0, 3.0});
    GreensFunction g(t, c, BoundaryConditions{});
    for (std::size_t e = 0; e < 3; ++e) {
        const PsiPair& pair = g.psi_pair(e);
        double l = t.edge_length(e);
        for (int k = 1; k < 50; ++k) {
            Point pt{e, l * k / 50.0};
            EdgeState sg = g.psi_state(pair.gamma_node, pt);
            EdgeState sl = g.psi_state(pair.lambda_node, pt);
            double w = pair.lambda_scale * (sg.f * sl.flux - sg.flux * sl.f);
            REQUIRE(std::fabs(w + 1.0) <= 1e-8);
        }
    }
}

TEST_CASE("apply reproduces the interval parabola") {
    TreeGraph t = interval_tree();
    GreensFunction g(t, constant_coeffs(1), BoundaryConditions{});
    FunctionOnGraph f = g.apply(constant_rhs(1, 1.0));
    REQUIRE(f.samples_per_edge() == 256);
    for (int k = 0; k <= 20; ++k) {
        double x = k / 20.0;
        REQUIRE(f.value(0, x) == Approx(x * (1.0 - x) / 2.0).margin(1e-9));
    }
    REQUIRE(f.derivative(0, 0.25) == Approx(0.25).margin(1e-8));
    REQUIRE(f.value(0, 0.5) == Approx(0.125).margin(1e-9));

    FunctionOnGraph zero = g.apply(constant_rhs(1, 0.0), 32);
    REQUIRE(zero.samples_per_edge() == 32);
    REQUIRE(zero.max_abs() <= 1e-12);
}

TEST_CASE("apply on the Y-tree") {
    TreeGraph t = ytree();
    Coefficients c = constant_coeffs(3);
    GreensFunction g(t, c, BoundaryConditions{});
    FunctionOnGraph f = g.apply(constant_rhs(3, 1.0));
    REQUIRE(f.value(0, 1.0) == Approx(0.5).margin(1e-8));
    REQUIRE(f.value(1, 0.0) == Approx(0.5).margin(1e-8));
    REQUIRE(f.value(0, 0.5) == Approx(0.375).margin(1e-8));

    // All node functionals of the solution vanish.
    auto fns = standard_functionals(t, BoundaryConditions{});
    Trace tr = trace_of(f, t, c);
    for (const Functional& fn : fns)
        REQUIRE(std::fabs(apply(fn, tr, c)) <= 1e-8);
}

TEST_CASE("solve_general honors inhomogeneous conditions") {
    TreeGraph t = interval_tree();
    Coefficients c = constant_coeffs(1);
    GreensFunction g(t, c, BoundaryConditions{});

    FunctionOnGraph same = g.solve_general(constant_rhs(1, 1.0), {0.0, 0.0});
    FunctionOnGraph ref = g.apply(constant_rhs(1, 1.0));
    for (int k = 0; k <= 16; ++k) {
        double x = k / 16.0;
        REQUIRE(same.value(0, x) == Approx(ref.value(0, x)).margin(1e-10));
    }

    // h = 0 with f(a) = 0, f(b) = 2 gives the line f = 2x.
    FunctionOnGraph line = g.solve_general(constant_rhs(1, 0.0), {0.0, 2.0});
    for (int k = 0; k <= 16; ++k) {
        double x = k / 16.0;
        REQUIRE(line.value(0, x) == Approx(2.0 * x).margin(1e-8));
    }

    // Measured functionals reproduce the requested values.
    auto fns = standard_functionals(t, BoundaryConditions{});
    Trace tr = trace_of(line, t, c);
    REQUIRE(apply(fns[0], tr, c) == Approx(0.0).margin(1e-8));
    REQUIRE(apply(fns[1], tr, c) == Approx(2.0).margin(1e-8));

    REQUIRE_THROWS_AS(g.solve_general(constant_rhs(1, 0.0), {1.0}), ConfigError);
}

TEST_CASE("pokornyi cross-check on the interval") {
    TreeGraph t = interval_tree();
    GreensFunction g(t, constant_coeffs(1), BoundaryConditions{});
    REQUIRE(g.pokornyi(Point{0, 0.5}, Point{0, 0.25}) == Approx(0.125).margin(1e-9));
    for (int i = 1; i < 6; ++i)
        for (int j = 1; j < 6; ++j) {
            Point x{0, i / 6.0}, y{0, j / 6.0};
            REQUIRE(g.pokornyi(x, y) == Approx(g.eval(x, y)).margin(1e-9));
        }
}

TEST_CASE("pokornyi equals rho-weighted eval on the weighted Y-tree") {
    TreeGraph t = ytree();
    Coefficients c = constant_coeffs(3, 0.0, {1.0, 2.0, 3.0});
    GreensFunction g(t, c, BoundaryConditions{});

    // Closed forms for this configuration: G((e0,x),(e1,y)) = x(1-y)/6.
    REQUIRE(g.eval(Point{0, 0.5}, Point{1, 0.5}) == Approx(1.0 / 24.0).margin(1e-9));
    REQUIRE(g.eval(Point{1, 0.5}, Point{0, 0.5}) == Approx(1.0 / 24.0).margin(1e-9));
    REQUIRE(g.pokornyi(Point{0, 0.5}, Point{1, 0.5}) ==
            Approx(1.0 / 12.0).margin(1e-8));

    for (std::size_t ex = 0; ex < 3; ++ex)
        for (std::size_t ey = 0; ey < 3; ++ey)
            for (int i = 1; i < 4; ++i)
                for (int j = 1; j < 4; ++j) {
                    Point x{ex, i / 4.0}, y{ey, j / 4.0};
                    if (ex == ey && i == j) continue;
                    double lhs = c.rho(ey) * g.eval(x, y);
                    REQUIRE(g.pokornyi(x, y) == Approx(lhs).margin(1e-6));
                }
}

TEST_CASE("degenerate problems are rejected at construction") {
    TreeGraph t = interval_tree();
    BoundaryConditions bc;
    bc.set(0, {BoundaryType::Neumann});
    bc.set(1, {BoundaryType::Neumann});
    REQUIRE_THROWS_AS(GreensFunction(t, constant_coeffs(1), bc), DegenerateProblem);

    // Robin f(b) - f'^b(b) = 0 keeps f = x in the kernel: also degenerate.
    BoundaryConditions robin;
    robin.set(1, {BoundaryType::Robin, 1.0, 1.0});
    REQUIRE_THROWS_AS(GreensFunction(t, constant_coeffs(1), robin),
                      DegenerateProblem);
}

TEST_CASE("p jumping across an internal node is rejected") {
    // The flux condition weights the bare derivative, so the per-edge
    // Wronskian scales only glue into one kernel when p matches at nodes.
    TreeGraph t = ytree();
    Coefficients c({EdgeFunction::constant(1.0), EdgeFunction::constant(2.0),
                    EdgeFunction::constant(1.0)},
                   std::vector<EdgeFunction>(3, EdgeFunction::constant(0.0)),
                   {1.0, 1.0, 1.0});
    REQUIRE_THROWS_AS(GreensFunction(t, c, BoundaryConditions{}), ConfigError);
}

TEST_CASE("resonant subtree forces a fallback candidate pair") {
    // q = -pi^2 on e2 makes the kernel solution anchored at b2 vanish
    // identically on e0, so the first candidate pair has Wronskian zero there
    // and the next boundary node must be used instead.
    TreeGraph t = ytree();
    Coefficients c({EdgeFunction::constant(1.0), EdgeFunction::constant(1.0),
                    EdgeFunction::constant(1.0)},
                   {EdgeFunction::constant(0.0), EdgeFunction::constant(0.0),
                    EdgeFunction::parse("-pi^2")},
                   {1.0, 1.0, 1.0});
    GreensFunction g(t, c, BoundaryConditions{});
    REQUIRE(g.psi_pair(0).gamma_node == t.node_index("b3"));

    // On e0 the kernel coincides with the plain interval kernel, because the
    // resonant branch pins the value at the junction to zero.
    REQUIRE(g.eval(Point{0, 0.5}, Point{0, 0.25}) == Approx(0.125).margin(1e-8));
    // Off e0 the kernel continues as -(y/pi) sin(pi (1 - t)).
    double want = -0.25 / 3.14159265358979323846;
    REQUIRE(g.eval(Point{2, 0.5}, Point{0, 0.25}) == Approx(want).margin(1e-8));
}

TEST_CASE("robin conditions produce a working kernel") {
    // f(a) = 0 and f(b) + f'(b) = 0 on the interval with q = 0.  In terms of
    // the outward derivative f'^b = -f'(l) the condition is f - f'^b = 0, so
    // beta = -1.  The kernel is G(x, y) = min(x,y) (2 - max(x,y)) / 2.
    TreeGraph t = interval_tree();
    BoundaryConditions bc;
    bc.set(1, {BoundaryType::Robin, 1.0, -1.0});
    GreensFunction g(t, constant_coeffs(1), bc);
    for (int i = 1; i < 6; ++i)
        for (int j = 1; j < 6; ++j) {
            double x = i / 6.0, y = j / 6.0;
            double want = std::min(x, y) * (2.0 - std::max(x, y)) / 2.0;
            REQUIRE(g.eval(Point{0, x}, Point{0, y}) == Approx(want).margin(1e-9));
        }
}
