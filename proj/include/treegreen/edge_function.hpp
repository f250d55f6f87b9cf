#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "treegreen/errors.hpp"
#include "treegreen/expression.hpp"

namespace treegreen {

/// Scalar function of the edge-local coordinate x.  One of:
///   - a constant,
///   - a parsed expression (original source text retained for round-trips),
///   - a sampled table with monotone cubic interpolation,
///   - scale * exp(rate * x), the closed form used by the river preset.
class EdgeFunction {
public:
    enum class Kind { Constant, Parsed, Table, ExpLinear };

    static EdgeFunction constant(double v) { return EdgeFunction(ConstantRep{v}); }

    static EdgeFunction parse(std::string_view text) {
        return EdgeFunction(ParsedRep{Expression::parse(text), std::string(text)});
    }

    /// Sampled table; abscissae must be strictly increasing with at least two
    /// entries.  Evaluation outside [x.front(), x.back()] is an error, so the
    /// table has to cover the whole edge it is used on.
    static EdgeFunction table(std::vector<double> x, std::vector<double> y) {
        if (x.size() < 2 || x.size() != y.size())
            throw CoefficientEvaluationError("table needs at least two (x, y) pairs");
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i] > x[i - 1]))
                throw CoefficientEvaluationError("table abscissae must be increasing");
        TableRep t{std::move(x), std::move(y), {}};
        t.slope = fritsch_carlson_slopes(t.x, t.y);
        return EdgeFunction(std::move(t));
    }

    static EdgeFunction exp_linear(double scale, double rate) {
        return EdgeFunction(ExpLinearRep{scale, rate});
    }

    double operator()(double x) const {
        if (const auto* c = std::get_if<ConstantRep>(&rep_)) return c->value;
        if (const auto* p = std::get_if<ParsedRep>(&rep_)) return p->expr(x);
        if (const auto* e = std::get_if<ExpLinearRep>(&rep_))
            return e->scale * std::exp(e->rate * x);
        const auto& t = std::get<TableRep>(rep_);
        return eval_table(t, x);
    }

    /// Derivative where it has a closed form (constant, exp-linear, table
    /// Hermite pieces); parsed expressions use a central difference.  Only
    /// diagnostics rely on this.
    double derivative(double x) const {
        if (std::holds_alternative<ConstantRep>(rep_)) return 0.0;
        if (const auto* e = std::get_if<ExpLinearRep>(&rep_))
            return e->rate * e->scale * std::exp(e->rate * x);
        double h = 1e-6 * std::max(1.0, std::fabs(x));
        return ((*this)(x + h) - (*this)(x - h)) / (2.0 * h);
    }

    Kind kind() const noexcept {
        if (std::holds_alternative<ConstantRep>(rep_)) return Kind::Constant;
        if (std::holds_alternative<ParsedRep>(rep_)) return Kind::Parsed;
        if (std::holds_alternative<TableRep>(rep_)) return Kind::Table;
        return Kind::ExpLinear;
    }

    double constant_value() const { return std::get<ConstantRep>(rep_).value; }
    const std::string& source_text() const { return std::get<ParsedRep>(rep_).text; }
    const std::vector<double>& table_x() const { return std::get<TableRep>(rep_).x; }
    const std::vector<double>& table_y() const { return std::get<TableRep>(rep_).y; }
    double exp_scale() const { return std::get<ExpLinearRep>(rep_).scale; }
    double exp_rate() const { return std::get<ExpLinearRep>(rep_).rate; }

private:
    struct ConstantRep {
        double value;
    };
    struct ParsedRep {
        Expression expr;
        std::string text;
    };
    struct TableRep {
        std::vector<double> x;
        std::vector<double> y;
        std::vector<double> slope;
    };
    struct ExpLinearRep {
        double scale;
        double rate;
    };

    using Rep = std::variant<ConstantRep, ParsedRep, TableRep, ExpLinearRep>;

    explicit EdgeFunction(Rep rep) : rep_(std::move(rep)) {}

    /// Fritsch-Carlson slopes: the resulting cubic Hermite interpolant is
    /// monotone on every interval where the data are.
    static std::vector<double> fritsch_carlson_slopes(const std::vector<double>& x,
                                                      const std::vector<double>& y) {
        std::size_t n = x.size();
        std::vector<double> h(n - 1), d(n - 1), m(n);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x[i + 1] - x[i];
            d[i] = (y[i + 1] - y[i]) / h[i];
        }
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m[i] = 0.0;
            } else {
                double w1 = 2.0 * h[i] + h[i - 1];
                double w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            double a = m[i] / d[i];
            double b = m[i + 1] / d[i];
            double s = a * a + b * b;
            if (s > 9.0) {
                double tau = 3.0 / std::sqrt(s);
                m[i] = tau * a * d[i];
                m[i + 1] = tau * b * d[i];
            }
        }
        return m;
    }

    static double eval_table(const TableRep& t, double x) {
        if (x < t.x.front() || x > t.x.back())
            throw CoefficientEvaluationError("table does not cover x = " +
                                             std::to_string(x));
        auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
        std::size_t i = it == t.x.begin() ? 0 : static_cast<std::size_t>(it - t.x.begin()) - 1;
        if (i + 1 >= t.x.size()) i = t.x.size() - 2;
        double h = t.x[i + 1] - t.x[i];
        double s = (x - t.x[i]) / h;
        double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        double h10 = s * (1.0 - s) * (1.0 - s);
        double h01 = s * s * (3.0 - 2.0 * s);
        double h11 = s * s * (s - 1.0);
        return h00 * t.y[i] + h10 * h * t.slope[i] + h01 * t.y[i + 1] +
               h11 * h * t.slope[i + 1];
    }

    Rep rep_;
};

} // namespace treegreen
