#pragma once

// One-dimensional quadrature: adaptive Gauss–Kronrod (7/15) with global error
// control for the jump-measure integrals, and composite Gauss–Legendre with
// panel doubling for the time integrals of the moment formulas.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "affinehs/errors.hpp"

namespace affinehs::quad {

struct Tolerance {
    double abs = 1e-10;
    double rel = 1e-8;
    int max_intervals = 2000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// QUADPACK qk15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

template <class F>
Interval kronrod15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double sum = f1[j] + f2[j];
        resk += kWgk[j] * sum;
        resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * sum;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double value = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    if (resabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    if (!std::isfinite(value)) throw QuadratureError("integrand is not finite on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
    return {a, b, value, err};
}

template <class F>
Result integrate_finite(F& f, double a, double b, const Tolerance& tol) {
    std::priority_queue<detail::Interval> heap;
    auto first = detail::kronrod15(f, a, b);
    heap.push(first);
    double total = first.value;
    double total_err = first.error;
    int count = 1;
    while (total_err > std::max(tol.abs, tol.rel * std::abs(total))) {
        if (count >= tol.max_intervals)
            throw QuadratureError("adaptive quadrature did not converge after " +
                                  std::to_string(count) + " subintervals (error estimate " +
                                  std::to_string(total_err) + ")");
        detail::Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval exhausted at machine resolution; accept its estimate.
            worst.error = 0.0;
            heap.push(worst);
        } else {
            auto left = detail::kronrod15(f, worst.a, mid);
            auto right = detail::kronrod15(f, mid, worst.b);
            heap.push(left);
            heap.push(right);
            ++count;
        }
        // Resum from scratch so the result does not depend on update order drift.
        auto copy = heap;
        total = 0.0;
        total_err = 0.0;
        while (!copy.empty()) {
            total += copy.top().value;
            total_err += copy.top().error;
            copy.pop();
        }
    }
    return {total, total_err, count};
}

} // namespace detail

/**
 * ∫_a^b f(x) dx for finite a and finite or infinite b (b = +inf uses
 * x = a + s/(1-s)). Bisects the interval with the largest error estimate until
 * the summed estimate is below max(abs, rel·|I|).
 */
template <class F>
Result integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
    if (!(a <= b)) throw QuadratureError("integrate: empty or reversed interval");
    if (a == b) return {};
    if (std::isinf(b)) {
        auto g = [&](double s) {
            if (s >= 1.0) return 0.0;
            const double one_minus = 1.0 - s;
            return f(a + s / one_minus) / (one_minus * one_minus);
        };
        return detail::integrate_finite(g, 0.0, 1.0, tol);
    }
    return detail::integrate_finite(f, a, b, tol);
}

/// n-point Gauss–Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                if (n == 1) p0 = 1.0;
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // recompute the derivative at the converged node
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            nodes[i] = -x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    static const GaussLegendre& order8() {
        static const GaussLegendre rule(8);
        return rule;
    }
    static const GaussLegendre& order16() {
        static const GaussLegendre rule(16);
        return rule;
    }
};

/// Σ over `panels` equal panels of the rule applied to f on [a, b].
template <class T, class F>
T composite(F&& f, double a, double b, int panels, const GaussLegendre& rule, T zero) {
    T acc = zero;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double c = lo + 0.5 * h;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += (0.5 * h * rule.weights[i]) * f(c + 0.5 * h * rule.nodes[i]);
    }
    return acc;
}

/**
 * Composite 8-point Gauss–Legendre, doubling the panel count until two
 * successive estimates differ by at most `abs_tol` under `distance`.
 */
template <class T, class F, class Distance>
T composite_doubling(F&& f, double a, double b, T zero, Distance&& distance,
                     double abs_tol = 1e-9, int max_panels = 4096) {
    if (b == a) return zero;
    const auto& rule = GaussLegendre::order8();
    int panels = 1;
    T prev = composite(f, a, b, panels, rule, zero);
    while (true) {
        panels *= 2;
        T next = composite(f, a, b, panels, rule, zero);
        if (distance(next, prev) <= abs_tol) return next;
        if (panels >= max_panels)
            throw QuadratureError("panel doubling did not stabilise at " + std::to_string(panels) +
                                  " panels");
        prev = std::move(next);
    }
}

} // namespace affinehs::quad
