#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "treegreen/errors.hpp"

namespace treegreen {

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1] (positive half; the rule
// is symmetric).  Even-indexed Kronrod nodes are the Gauss nodes.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

template <class F>
void gauss_kronrod_15(F& f, double a, double b, double& kronrod, double& err) {
    double mid = 0.5 * (a + b);
    double half = 0.5 * (b - a);
    double fc = f(mid);
    double gauss = gauss_w[3] * fc;
    kronrod = kronrod_w[7] * fc;
    for (int i = 0; i < 7; ++i) {
        double dx = half * kronrod_x[i];
        double fs = f(mid - dx) + f(mid + dx);
        kronrod += kronrod_w[i] * fs;
        if (i % 2 == 1) gauss += gauss_w[i / 2] * fs;
    }
    kronrod *= half;
    gauss *= half;
    err = std::fabs(kronrod - gauss);
}

template <class F>
double adapt(F& f, double a, double b, double tol, int depth) {
    double value = 0.0, err = 0.0;
    gauss_kronrod_15(f, a, b, value, err);
    if (!std::isfinite(value))
        throw QuadratureFailure("integrand not finite on [" + std::to_string(a) + ", " +
                                std::to_string(b) + "]");
    if (err <= tol || b - a <= 1e-14 * std::fabs(b)) return value;
    if (depth <= 0)
        throw QuadratureFailure("adaptive bisection depth exhausted near [" +
                                std::to_string(a) + ", " + std::to_string(b) + "]");
    double mid = 0.5 * (a + b);
    return adapt(f, a, mid, 0.5 * tol, depth - 1) +
           adapt(f, mid, b, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].  The local error
/// estimate is driven below max(atol, rtol * |first pass value|), halving the
/// budget per bisection.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rtol = 1e-9,
                          double atol = 1e-14) {
    if (a == b) return 0.0;
    double coarse = 0.0, err = 0.0;
    detail::gauss_kronrod_15(f, a, b, coarse, err);
    double tol = std::max(atol, rtol * std::fabs(coarse));
    return detail::adapt(f, a, b, tol, 48);
}

/// Same, with mandatory subdivision points (integrand kinks).  Breakpoints
/// outside (a, b) are ignored.
template <class F>
double integrate_adaptive_split(F&& f, double a, double b,
                                std::vector<double> breakpoints, double rtol = 1e-9,
                                double atol = 1e-14) {
    breakpoints.erase(std::remove_if(breakpoints.begin(), breakpoints.end(),
                                     [&](double t) { return !(t > a && t < b); }),
                      breakpoints.end());
    std::sort(breakpoints.begin(), breakpoints.end());
    double total = 0.0;
    double left = a;
    for (double t : breakpoints) {
        total += integrate_adaptive(f, left, t, rtol, atol);
        left = t;
    }
    total += integrate_adaptive(f, left, b, rtol, atol);
    return total;
}

} // namespace treegreen
