#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "treegreen/errors.hpp"

namespace treegreen {

using State2 = std::array<double, 2>;

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    /// Upper bound on the step size; keeps dense output fine enough for
    /// downstream interpolation even when the solution is locally simple.
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 1000000;
};

/// Piecewise cubic Hermite record of an integration over [0, end].  Nodes are
/// the accepted steps; values and first derivatives match the integrator
/// state there, so the interpolant is C^1.
class DenseOutput2 {
public:
    DenseOutput2(std::vector<double> x, std::vector<State2> y, std::vector<State2> dy)
        : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {}

    double end() const { return x_.back(); }
    std::size_t num_nodes() const { return x_.size(); }
    const std::vector<double>& nodes() const { return x_; }
    const State2& node_state(std::size_t k) const { return y_.at(k); }

    State2 eval(double x) const {
        std::size_t i = locate(x);
        double h = x_[i + 1] - x_[i];
        double s = (x - x_[i]) / h;
        double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        double h10 = s * (1.0 - s) * (1.0 - s);
        double h01 = s * s * (3.0 - 2.0 * s);
        double h11 = s * s * (s - 1.0);
        State2 out;
        for (std::size_t c = 0; c < 2; ++c)
            out[c] = h00 * y_[i][c] + h10 * h * dy_[i][c] + h01 * y_[i + 1][c] +
                     h11 * h * dy_[i + 1][c];
        return out;
    }

    /// Derivative of the interpolant itself (not a fresh RHS evaluation);
    /// used for residual diagnostics.
    State2 eval_derivative(double x) const {
        std::size_t i = locate(x);
        double h = x_[i + 1] - x_[i];
        double s = (x - x_[i]) / h;
        double d00 = 6.0 * s * (s - 1.0) / h;
        double d10 = (3.0 * s - 1.0) * (s - 1.0);
        double d01 = -d00;
        double d11 = s * (3.0 * s - 2.0);
        State2 out;
        for (std::size_t c = 0; c < 2; ++c)
            out[c] = d00 * y_[i][c] + d10 * dy_[i][c] + d01 * y_[i + 1][c] +
                     d11 * dy_[i + 1][c];
        return out;
    }

private:
    std::size_t locate(double x) const {
        if (!(x >= x_.front()) || !(x <= x_.back()))
            throw OutOfDomain("dense output queried at " + std::to_string(x) +
                              " outside [0, " + std::to_string(x_.back()) + "]");
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
        if (i + 1 >= x_.size()) i = x_.size() - 2;
        return i;
    }

    std::vector<double> x_;
    std::vector<State2> y_;
    std::vector<State2> dy_;
};

/// Dormand-Prince 5(4) with FSAL and PI step control.  Integrates y' =
/// rhs(x, y) from x = 0 to x = end and records dense output on accepted
/// steps.  Throws StepSizeUnderflow when step control collapses (stiffness,
/// blowup, or a non-finite right-hand side).
template <class RHS>
DenseOutput2 integrate_dp45(RHS&& rhs, State2 y0, double end,
                            const IntegratorOptions& opt = {}) {
    // clang-format off
    constexpr double c2 = 1.0/5, c3 = 3.0/10, c4 = 4.0/5, c5 = 8.0/9;
    constexpr double a21 = 1.0/5;
    constexpr double a31 = 3.0/40,       a32 = 9.0/40;
    constexpr double a41 = 44.0/45,      a42 = -56.0/15,      a43 = 32.0/9;
    constexpr double a51 = 19372.0/6561, a52 = -25360.0/2187, a53 = 64448.0/6561, a54 = -212.0/729;
    constexpr double a61 = 9017.0/3168,  a62 = -355.0/33,     a63 = 46732.0/5247, a64 = 49.0/176,   a65 = -5103.0/18656;
    constexpr double b1  = 35.0/384,     b3  = 500.0/1113,    b4  = 125.0/192,    b5  = -2187.0/6784, b6 = 11.0/84;
    constexpr double e1  = 35.0/384    - 5179.0/57600;
    constexpr double e3  = 500.0/1113  - 7571.0/16695;
    constexpr double e4  = 125.0/192   - 393.0/640;
    constexpr double e5  = -2187.0/6784 + 92097.0/339200;
    constexpr double e6  = 11.0/84     - 187.0/2100;
    constexpr double e7  = -1.0/40;
    // clang-format on

    if (!(end > 0.0)) throw OutOfDomain("integration interval must have positive length");

    std::vector<double> xs{0.0};
    std::vector<State2> ys{y0};
    std::vector<State2> dys;

    auto finite = [](const State2& v) {
        return std::isfinite(v[0]) && std::isfinite(v[1]);
    };

    State2 k1 = rhs(0.0, y0);
    if (!finite(k1))
        throw StepSizeUnderflow("right-hand side not finite at x = 0");
    dys.push_back(k1);

    double x = 0.0;
    State2 y = y0;
    double h = std::min({opt.max_step, end, 1e-2 * end + 1e-4});
    double err_prev = 1.0;
    const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() * end;

    for (std::size_t step = 0; step < opt.max_steps;) {
        if (x >= end) break;
        h = std::min({h, opt.max_step, end - x});
        if (h < h_floor)
            throw StepSizeUnderflow("step size underflow at x = " + std::to_string(x));

        auto stage = [&](double frac, std::initializer_list<std::pair<double, const State2*>> terms) {
            State2 z = y;
            for (auto [w, k] : terms) {
                z[0] += h * w * (*k)[0];
                z[1] += h * w * (*k)[1];
            }
            return rhs(x + frac * h, z);
        };

        State2 k2 = stage(c2, {{a21, &k1}});
        State2 k3 = stage(c3, {{a31, &k1}, {a32, &k2}});
        State2 k4 = stage(c4, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        State2 k5 = stage(c5, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        State2 k6 = stage(1.0, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});

        State2 y_new;
        for (std::size_t c = 0; c < 2; ++c)
            y_new[c] = y[c] + h * (b1 * k1[c] + b3 * k3[c] + b4 * k4[c] + b5 * k5[c] +
                                   b6 * k6[c]);
        State2 k7 = rhs(x + h, y_new); // FSAL: reused as k1 on acceptance

        bool ok = finite(k2) && finite(k3) && finite(k4) && finite(k5) && finite(k6) &&
                  finite(y_new) && finite(k7);
        double err = std::numeric_limits<double>::infinity();
        if (ok) {
            double sum = 0.0;
            for (std::size_t c = 0; c < 2; ++c) {
                double est = h * (e1 * k1[c] + e3 * k3[c] + e4 * k4[c] + e5 * k5[c] +
                                  e6 * k6[c] + e7 * k7[c]);
                double scale =
                    opt.atol + opt.rtol * std::max(std::fabs(y[c]), std::fabs(y_new[c]));
                sum += (est / scale) * (est / scale);
            }
            err = std::sqrt(0.5 * sum);
        }

        if (err <= 1.0) {
            x += h;
            y = y_new;
            k1 = k7;
            xs.push_back(x);
            ys.push_back(y);
            dys.push_back(k1);
            ++step;
            double grow = 0.9 * std::pow(std::max(err, 1e-16), -0.2) *
                          std::pow(err_prev, 0.04);
            h *= std::clamp(grow, 0.2, 5.0);
            err_prev = std::max(err, 1e-16);
        } else if (std::isfinite(err)) {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 0.9);
        } else {
            h *= 0.2;
        }
    }

    if (x < end)
        throw StepSizeUnderflow("step budget exhausted at x = " + std::to_string(x));

    return DenseOutput2(std::move(xs), std::move(ys), std::move(dys));
}

} // namespace treegreen
