#pragma once

#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "treegreen/coeffs.hpp"
#include "treegreen/conditions.hpp"
#include "treegreen/errors.hpp"
#include "treegreen/graph.hpp"
#include "treegreen/green.hpp"

namespace treegreen {

struct EdgeCoeffSpec {
    std::string p = "1";
    std::string q = "0";
    double rho = 1.0;

    friend bool operator==(const EdgeCoeffSpec&, const EdgeCoeffSpec&) = default;
};

struct RiverSpec {
    std::map<std::string, double> D;
    std::map<std::string, double> v;
    double sigma = 1.0;
    std::map<std::string, double> rho; // optional per-edge override, default 1

    friend bool operator==(const RiverSpec&, const RiverSpec&) = default;
};

struct BoundarySpec {
    BoundaryType type = BoundaryType::Dirichlet;
    double alpha = 1.0;
    double beta = 0.0;

    friend bool operator==(const BoundarySpec&, const BoundarySpec&) = default;
};

/// Parsed problem description; equality is field-wise, which backs the
/// dump/parse round-trip guarantee.
struct ProblemConfig {
    std::vector<std::string> nodes;
    std::vector<EdgeSpec> edges;
    std::optional<std::string> root;
    bool river_mode = false;
    std::map<std::string, EdgeCoeffSpec> per_edge;
    RiverSpec river;
    std::map<std::string, BoundarySpec> boundary;
    std::map<std::string, std::string> rhs;
    std::vector<double> c;
    double tol_ode = 1e-10;
    double tol_quad = 1e-9;

    friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

namespace detail {

using nlohmann::json;

inline std::string number_text(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string coeff_text(const json& j, const std::string& where) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return number_text(j.get<double>());
    throw ConfigError(where + " must be an expression string or a number");
}

inline double require_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    return j.get<double>();
}

inline std::map<std::string, double> per_edge_numbers(const json& j,
                                                      const std::vector<EdgeSpec>& edges,
                                                      const std::string& where) {
    std::map<std::string, double> out;
    if (j.is_number()) {
        for (const EdgeSpec& e : edges) out[e.id] = j.get<double>();
        return out;
    }
    if (!j.is_object())
        throw ConfigError(where + " must be a number or an edge-id map of numbers");
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = require_number(it.value(), where + "." + it.key());
    return out;
}

} // namespace detail

inline ProblemConfig parse_config(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& err) {
        throw ConfigError(std::string("config is not valid JSON: ") + err.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");

    ProblemConfig cfg;

    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        throw ConfigError("config needs a 'nodes' array");
    for (const auto& n : doc["nodes"]) {
        if (!n.is_string()) throw ConfigError("'nodes' entries must be strings");
        cfg.nodes.push_back(n.get<std::string>());
    }

    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw ConfigError("config needs an 'edges' array");
    for (const auto& e : doc["edges"]) {
        if (!e.is_object()) throw ConfigError("'edges' entries must be objects");
        EdgeSpec spec;
        for (const char* key : {"id", "tail", "head"}) {
            if (!e.contains(key) || !e[key].is_string())
                throw ConfigError(std::string("edge entry missing string field '") +
                                  key + "'");
        }
        spec.id = e["id"].get<std::string>();
        spec.tail = e["tail"].get<std::string>();
        spec.head = e["head"].get<std::string>();
        if (!e.contains("length"))
            throw ConfigError("edge '" + spec.id + "' is missing 'length'");
        spec.length = detail::require_number(e["length"], "edge '" + spec.id +
                                                              "' length");
        cfg.edges.push_back(spec);
    }

    if (doc.contains("root")) {
        if (!doc["root"].is_string()) throw ConfigError("'root' must be a node id");
        cfg.root = doc["root"].get<std::string>();
    }

    if (!doc.contains("coefficients") || !doc["coefficients"].is_object())
        throw ConfigError("config needs a 'coefficients' object");
    const json& co = doc["coefficients"];
    std::string mode = co.value("mode", std::string("per_edge"));
    if (mode == "per_edge") {
        cfg.river_mode = false;
        if (!co.contains("per_edge") || !co["per_edge"].is_object())
            throw ConfigError("coefficients.per_edge must be an edge-id map");
        for (auto it = co["per_edge"].begin(); it != co["per_edge"].end(); ++it) {
            const json& spec = it.value();
            if (!spec.is_object())
                throw ConfigError("coefficients.per_edge." + it.key() +
                                  " must be an object");
            EdgeCoeffSpec ec;
            if (spec.contains("p"))
                ec.p = detail::coeff_text(spec["p"], "coefficients.per_edge." +
                                                         it.key() + ".p");
            if (spec.contains("q"))
                ec.q = detail::coeff_text(spec["q"], "coefficients.per_edge." +
                                                         it.key() + ".q");
            if (spec.contains("rho"))
                ec.rho = detail::require_number(spec["rho"], "coefficients.per_edge." +
                                                                 it.key() + ".rho");
            cfg.per_edge[it.key()] = ec;
        }
    } else if (mode == "river") {
        cfg.river_mode = true;
        if (!co.contains("river") || !co["river"].is_object())
            throw ConfigError("coefficients.river must be an object");
        const json& rv = co["river"];
        if (!rv.contains("D") || !rv.contains("v"))
            throw ConfigError("coefficients.river needs 'D' and 'v'");
        cfg.river.D = detail::per_edge_numbers(rv["D"], cfg.edges, "river.D");
        cfg.river.v = detail::per_edge_numbers(rv["v"], cfg.edges, "river.v");
        cfg.river.sigma = rv.contains("sigma")
                              ? detail::require_number(rv["sigma"], "river.sigma")
                              : 1.0;
        if (rv.contains("rho"))
            cfg.river.rho = detail::per_edge_numbers(rv["rho"], cfg.edges, "river.rho");
    } else {
        throw ConfigError("coefficients.mode must be 'per_edge' or 'river'");
    }

    if (doc.contains("boundary")) {
        if (!doc["boundary"].is_object())
            throw ConfigError("'boundary' must be a node-id map");
        for (auto it = doc["boundary"].begin(); it != doc["boundary"].end(); ++it) {
            const json& b = it.value();
            BoundarySpec spec;
            if (b.is_string()) {
                std::string kind = b.get<std::string>();
                if (kind == "dirichlet")
                    spec.type = BoundaryType::Dirichlet;
                else if (kind == "neumann")
                    spec.type = BoundaryType::Neumann;
                else
                    throw ConfigError("boundary." + it.key() + ": unknown type '" +
                                      kind + "'");
            } else if (b.is_object()) {
                std::string kind = b.value("type", std::string());
                if (kind == "dirichlet")
                    spec.type = BoundaryType::Dirichlet;
                else if (kind == "neumann")
                    spec.type = BoundaryType::Neumann;
                else if (kind == "robin")
                    spec.type = BoundaryType::Robin;
                else
                    throw ConfigError("boundary." + it.key() + ": unknown type '" +
                                      kind + "'");
                if (spec.type == BoundaryType::Robin) {
                    spec.alpha = detail::require_number(
                        b.value("alpha", json(1.0)), "boundary." + it.key() + ".alpha");
                    spec.beta = detail::require_number(
                        b.value("beta", json(0.0)), "boundary." + it.key() + ".beta");
                    if (spec.alpha == 0.0 && spec.beta == 0.0)
                        throw ConfigError("boundary." + it.key() +
                                          ": robin needs (alpha, beta) != (0, 0)");
                }
            } else {
                throw ConfigError("boundary." + it.key() +
                                  " must be a type string or an object");
            }
            cfg.boundary[it.key()] = spec;
        }
    }

    if (doc.contains("rhs")) {
        if (!doc["rhs"].is_object()) throw ConfigError("'rhs' must be an edge-id map");
        for (auto it = doc["rhs"].begin(); it != doc["rhs"].end(); ++it)
            cfg.rhs[it.key()] = detail::coeff_text(it.value(), "rhs." + it.key());
    }

    if (doc.contains("c")) {
        if (!doc["c"].is_array()) throw ConfigError("'c' must be an array of numbers");
        for (const auto& v : doc["c"])
            cfg.c.push_back(detail::require_number(v, "'c' entry"));
    }

    if (doc.contains("tol")) {
        if (!doc["tol"].is_object()) throw ConfigError("'tol' must be an object");
        if (doc["tol"].contains("ode"))
            cfg.tol_ode = detail::require_number(doc["tol"]["ode"], "tol.ode");
        if (doc["tol"].contains("quad"))
            cfg.tol_quad = detail::require_number(doc["tol"]["quad"], "tol.quad");
        if (!(cfg.tol_ode > 0.0) || !(cfg.tol_quad > 0.0))
            throw ConfigError("tolerances must be positive");
    }

    return cfg;
}

inline std::string dump_config(const ProblemConfig& cfg) {
    using detail::json;
    json doc;
    doc["nodes"] = cfg.nodes;
    doc["edges"] = json::array();
    for (const EdgeSpec& e : cfg.edges)
        doc["edges"].push_back(
            {{"id", e.id}, {"tail", e.tail}, {"head", e.head}, {"length", e.length}});
    if (cfg.root) doc["root"] = *cfg.root;
    if (cfg.river_mode) {
        doc["coefficients"]["mode"] = "river";
        json rv;
        rv["D"] = cfg.river.D;
        rv["v"] = cfg.river.v;
        rv["sigma"] = cfg.river.sigma;
        if (!cfg.river.rho.empty()) rv["rho"] = cfg.river.rho;
        doc["coefficients"]["river"] = rv;
    } else {
        doc["coefficients"]["mode"] = "per_edge";
        json pe = json::object();
        for (const auto& [id, spec] : cfg.per_edge)
            pe[id] = {{"p", spec.p}, {"q", spec.q}, {"rho", spec.rho}};
        doc["coefficients"]["per_edge"] = pe;
    }
    if (!cfg.boundary.empty()) {
        json b = json::object();
        for (const auto& [id, spec] : cfg.boundary) {
            switch (spec.type) {
                case BoundaryType::Dirichlet: b[id] = "dirichlet"; break;
                case BoundaryType::Neumann: b[id] = "neumann"; break;
                case BoundaryType::Robin:
                    b[id] = {{"type", "robin"}, {"alpha", spec.alpha},
                             {"beta", spec.beta}};
                    break;
            }
        }
        doc["boundary"] = b;
    }
    if (!cfg.rhs.empty()) doc["rhs"] = cfg.rhs;
    if (!cfg.c.empty()) doc["c"] = cfg.c;
    doc["tol"] = {{"ode", cfg.tol_ode}, {"quad", cfg.tol_quad}};
    return doc.dump(2) + "\n";
}

// -- builders ---------------------------------------------------------------

inline TreeGraph build_tree(const ProblemConfig& cfg) {
    return TreeGraph(cfg.nodes, cfg.edges, cfg.root);
}

inline Coefficients build_coefficients(const ProblemConfig& cfg, const TreeGraph& t) {
    std::size_t m = t.num_edges();
    if (cfg.river_mode) {
        RiverData data;
        data.sigma = cfg.river.sigma;
        data.D.resize(m);
        data.v.resize(m);
        std::vector<double> rho(m, 1.0);
        for (std::size_t e = 0; e < m; ++e) {
            const std::string& id = t.edge_id(e);
            auto d = cfg.river.D.find(id);
            auto v = cfg.river.v.find(id);
            if (d == cfg.river.D.end() || v == cfg.river.v.end())
                throw ConfigError("river data missing for edge '" + id + "'");
            data.D[e] = d->second;
            data.v[e] = v->second;
            auto r = cfg.river.rho.find(id);
            if (r != cfg.river.rho.end()) rho[e] = r->second;
        }
        return river_coefficients(t, data, rho);
    }
    std::vector<EdgeFunction> p, q;
    std::vector<double> rho;
    for (std::size_t e = 0; e < m; ++e) {
        const std::string& id = t.edge_id(e);
        auto it = cfg.per_edge.find(id);
        if (it == cfg.per_edge.end())
            throw ConfigError("coefficients missing for edge '" + id + "'");
        try {
            p.push_back(EdgeFunction::parse(it->second.p));
            q.push_back(EdgeFunction::parse(it->second.q));
        } catch (const ParseError& err) {
            throw ConfigError("coefficients for edge '" + id + "': " + err.what());
        }
        rho.push_back(it->second.rho);
    }
    return Coefficients(std::move(p), std::move(q), std::move(rho));
}

inline BoundaryConditions build_boundary(const ProblemConfig& cfg, const TreeGraph& t) {
    BoundaryConditions bc; // Dirichlet fallback for unlisted nodes
    for (const auto& [id, spec] : cfg.boundary) {
        auto n = t.find_node(id);
        if (!n) throw ConfigError("boundary condition for unknown node '" + id + "'");
        if (!t.is_boundary(*n))
            throw ConfigError("node '" + id + "' is internal and cannot carry a "
                              "boundary condition");
        bc.set(*n, BoundaryCondition{spec.type, spec.alpha, spec.beta});
    }
    return bc;
}

inline std::vector<EdgeFunction> build_rhs(const ProblemConfig& cfg,
                                           const TreeGraph& t) {
    std::vector<EdgeFunction> h;
    for (std::size_t e = 0; e < t.num_edges(); ++e) {
        auto it = cfg.rhs.find(t.edge_id(e));
        if (it == cfg.rhs.end()) {
            h.push_back(EdgeFunction::constant(0.0));
            continue;
        }
        try {
            h.push_back(EdgeFunction::parse(it->second));
        } catch (const ParseError& err) {
            throw ConfigError("rhs for edge '" + t.edge_id(e) + "': " + err.what());
        }
    }
    return h;
}

inline GreenOptions build_options(const ProblemConfig& cfg) {
    GreenOptions opt;
    opt.ode.rtol = cfg.tol_ode;
    opt.ode.atol = cfg.tol_ode * 1e-2;
    opt.quad_rtol = cfg.tol_quad;
    return opt;
}

} // namespace treegreen
