#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "treegreen/config.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/graph.hpp"
#include "treegreen/green.hpp"
#include "treegreen/oracle.hpp"

namespace treegreen {

/// Parsed command line; the binary maps its argument parser onto this.
struct CliOptions {
    std::string command;
    std::string config_path;
    std::optional<std::string> at; // evaluation point x as EDGE:POS
    std::optional<std::string> y;  // single source point for `green`
    std::size_t grid = 0;          // 0 = command-specific default
    std::string mode = "pokornyi";
    bool dump = false;
};

namespace cli_detail {

/// 12 significant digits, locale independent.
inline std::string format_number(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline Point parse_point(const TreeGraph& t, const std::string& text,
                         const std::string& flag) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size())
        throw ConfigError(flag + " expects EDGE:POS, got '" + text + "'");
    std::string edge_id = text.substr(0, colon);
    auto e = t.find_edge(edge_id);
    if (!e) throw ConfigError(flag + ": unknown edge '" + edge_id + "'");
    double pos = 0.0;
    try {
        pos = std::stod(text.substr(colon + 1));
    } catch (const std::logic_error&) {
        throw ConfigError(flag + ": bad position in '" + text + "'");
    }
    if (!(pos >= 0.0) || pos > t.edge_length(*e))
        throw ConfigError(flag + ": position " + text.substr(colon + 1) +
                          " outside [0, " + format_number(t.edge_length(*e)) +
                          "] on edge '" + edge_id + "'");
    return Point{*e, pos};
}

/// G(x, y) including one-sided limits when x sits on a node.
inline double eval_any(const GreensFunction& gf, const Point& x, const Point& y) {
    double l = gf.tree().edge_length(x.edge);
    if (x.x == 0.0) return gf.eval_node_limit(EdgeEnd{x.edge, true}, y);
    if (x.x == l) return gf.eval_node_limit(EdgeEnd{x.edge, false}, y);
    return gf.eval(x, y);
}

struct Problem {
    ProblemConfig cfg;
    TreeGraph tree;
    Coefficients coeffs;
    BoundaryConditions bc;

    explicit Problem(const ProblemConfig& c)
        : cfg(c), tree(build_tree(c)), coeffs(build_coefficients(c, tree)),
          bc(build_boundary(c, tree)) {}
};

inline int cmd_validate(const Problem& pr, std::ostream& out) {
    CoefficientReport rep = validate(pr.coeffs, pr.tree, 64);
    FundamentalBasis basis(pr.tree, pr.coeffs, build_options(pr.cfg).ode);
    std::vector<Functional> fns = standard_functionals(pr.tree, pr.bc);
    DeltaMatrix delta(basis, fns, pr.coeffs);
    NondegeneracyReport nd = check_nondegenerate(delta);
    out << "edges: " << pr.tree.num_edges() << "\n";
    out << "boundary_nodes: " << pr.tree.boundary_nodes().size() << "\n";
    out << "min_p: " << format_number(rep.min_p) << "\n";
    out << "max_abs_q: " << format_number(rep.max_abs_q) << "\n";
    out << "det: " << format_number(nd.det) << "\n";
    out << "rcond: " << format_number(nd.rcond) << "\n";
    out << "nondegenerate: " << (nd.nondegenerate ? "yes" : "no") << "\n";
    return nd.nondegenerate ? 0 : 2;
}

inline int cmd_green(const Problem& pr, const CliOptions& opt, std::ostream& out) {
    if (!opt.at) throw ConfigError("green needs --at EDGE:POS for the point x");
    Point x = parse_point(pr.tree, *opt.at, "--at");
    GreensFunction gf(pr.tree, pr.coeffs, pr.bc, build_options(pr.cfg));
    out << "edge,pos,value\n";
    if (opt.y) {
        Point y = parse_point(pr.tree, *opt.y, "--y");
        out << pr.tree.edge_id(y.edge) << "," << format_number(y.x) << ","
            << format_number(eval_any(gf, x, y)) << "\n";
    } else {
        std::size_t n = opt.grid ? opt.grid : 11;
        for (std::size_t e = 0; e < pr.tree.num_edges(); ++e) {
            double l = pr.tree.edge_length(e);
            for (std::size_t k = 1; k <= n; ++k) {
                double pos = l * static_cast<double>(k) / static_cast<double>(n + 1);
                out << pr.tree.edge_id(e) << "," << format_number(pos) << ","
                    << format_number(eval_any(gf, x, Point{e, pos})) << "\n";
            }
        }
    }
    out << "# solves = " << gf.solve_count() << "\n";
    return 0;
}

inline int cmd_solve(const Problem& pr, const CliOptions& opt, std::ostream& out) {
    GreensFunction gf(pr.tree, pr.coeffs, pr.bc, build_options(pr.cfg));
    std::vector<EdgeFunction> h = build_rhs(pr.cfg, pr.tree);
    std::vector<double> c = pr.cfg.c;
    if (c.empty()) c.assign(2 * pr.tree.num_edges(), 0.0);
    FunctionOnGraph f = gf.solve_general(h, c);
    std::size_t n = opt.grid ? opt.grid : 8;
    out << "edge,pos,value\n";
    for (std::size_t e = 0; e < pr.tree.num_edges(); ++e) {
        double l = pr.tree.edge_length(e);
        for (std::size_t k = 0; k <= n; ++k) {
            double pos = l * static_cast<double>(k) / static_cast<double>(n);
            out << pr.tree.edge_id(e) << "," << format_number(pos) << ","
                << format_number(f.value(e, pos)) << "\n";
        }
    }
    return 0;
}

inline int cmd_compare(const Problem& pr, const CliOptions& opt, std::ostream& out) {
    GreensFunction gf(pr.tree, pr.coeffs, pr.bc, build_options(pr.cfg));
    if (opt.mode == "pokornyi") {
        std::size_t n = opt.grid ? opt.grid : 4;
        double dev = 0.0;
        for (std::size_t ex = 0; ex < pr.tree.num_edges(); ++ex) {
            double lx = pr.tree.edge_length(ex);
            for (std::size_t i = 1; i <= n; ++i) {
                Point x{ex, lx * static_cast<double>(i) / static_cast<double>(n + 1)};
                for (std::size_t ey = 0; ey < pr.tree.num_edges(); ++ey) {
                    double ly = pr.tree.edge_length(ey);
                    for (std::size_t k = 1; k <= n; ++k) {
                        Point y{ey,
                                ly * static_cast<double>(k) / static_cast<double>(n + 1)};
                        double lhs = pr.coeffs.rho(ey) * gf.eval(x, y);
                        double rhs = gf.pokornyi(x, y);
                        dev = std::max(dev, std::fabs(lhs - rhs));
                    }
                }
            }
        }
        const double tol = 1e-6;
        out << "mode: pokornyi\n";
        out << "max_abs_deviation: " << format_number(dev) << "\n";
        out << "tolerance: " << format_number(tol) << "\n";
        return dev <= tol ? 0 : 4;
    }
    if (opt.mode != "oracle")
        throw ConfigError("--mode must be 'oracle' or 'pokornyi'");

    std::size_t n = opt.grid ? std::max<std::size_t>(opt.grid, 8) : 2000;
    DiscreteSystem sys(pr.tree, pr.coeffs, pr.bc, n);

    double dev_solution = 0.0;
    std::vector<EdgeFunction> h = build_rhs(pr.cfg, pr.tree);
    bool have_rhs = !pr.cfg.rhs.empty();
    if (have_rhs) {
        FunctionOnGraph f_formula = gf.apply(h);
        FunctionOnGraph f_oracle = sys.solve(h);
        double scale = std::max(f_oracle.max_abs(), 1e-30);
        for (std::size_t e = 0; e < pr.tree.num_edges(); ++e) {
            double l = pr.tree.edge_length(e);
            for (std::size_t j = 0; j <= n; ++j) {
                double pos = l * static_cast<double>(j) / static_cast<double>(n);
                dev_solution =
                    std::max(dev_solution, std::fabs(f_formula.value(e, pos) -
                                                     f_oracle.sample_value(e, j)) /
                                               scale);
            }
        }
    }

    Point y0 = opt.at ? parse_point(pr.tree, *opt.at, "--at")
                      : Point{0, 0.5 * pr.tree.edge_length(0)};
    Point ys = sys.snap(y0);
    FunctionOnGraph column = sys.green_column(ys);
    double kscale = std::max(column.max_abs(), 1e-30);
    double dev_kernel = 0.0;
    for (std::size_t e = 0; e < pr.tree.num_edges(); ++e) {
        double l = pr.tree.edge_length(e);
        for (std::size_t j = 0; j <= n; ++j) {
            double pos = l * static_cast<double>(j) / static_cast<double>(n);
            double g = eval_any(gf, Point{e, pos}, ys);
            dev_kernel = std::max(
                dev_kernel, std::fabs(g - column.sample_value(e, j)) / kscale);
        }
    }

    const double tol = 5e-4;
    double dev = std::max(dev_solution, dev_kernel);
    out << "mode: oracle\n";
    out << "mesh: " << n << "\n";
    if (have_rhs)
        out << "max_rel_deviation_solution: " << format_number(dev_solution) << "\n";
    out << "source: " << pr.tree.edge_id(ys.edge) << ":" << format_number(ys.x) << "\n";
    out << "max_rel_deviation_kernel: " << format_number(dev_kernel) << "\n";
    out << "tolerance: " << format_number(tol) << "\n";
    return dev <= tol ? 0 : 4;
}

} // namespace cli_detail

/// Executes one CLI invocation; returns the process exit code (0 success,
/// 2 degenerate problem, 3 invalid configuration or usage, 4 comparison
/// beyond tolerance).
inline int run_cli(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        if (opt.config_path.empty())
            throw ConfigError("a configuration file is required (--config FILE)");
        std::ifstream in(opt.config_path);
        if (!in)
            throw ConfigError("cannot open config file '" + opt.config_path + "'");
        std::stringstream buffer;
        buffer << in.rdbuf();
        ProblemConfig cfg = parse_config(buffer.str());

        if (opt.dump) {
            out << dump_config(cfg);
            return 0;
        }

        cli_detail::Problem pr(cfg);
        if (opt.command == "validate") return cli_detail::cmd_validate(pr, out);
        if (opt.command == "green") return cli_detail::cmd_green(pr, opt, out);
        if (opt.command == "solve") return cli_detail::cmd_solve(pr, opt, out);
        if (opt.command == "compare") return cli_detail::cmd_compare(pr, opt, out);
        throw ConfigError("unknown command '" + opt.command + "'");
    } catch (const DegenerateProblem& e) {
        err << "degenerate problem: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace treegreen
