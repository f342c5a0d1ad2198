#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "fbmdim/errors.hpp"

namespace fbmdim::quadrature {

struct Result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

namespace detail {

// Kronrod 15-point abscissae and weights; the odd entries carry the
// embedded 7-point Gauss rule.
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

struct Segment {
    double a;
    double b;
    double value;
    double error;
    friend bool operator<(const Segment& lhs, const Segment& rhs) { return lhs.error < rhs.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * pair;
        if (j % 2 == 1) {
            gauss += kWg[j / 2] * pair;
        }
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (7,15) integration of f over [a, b].
///
/// The interval with the largest local error is bisected until the summed
/// error estimate is below max(abs_tol, rel_tol * |value|). Endpoints are
/// never evaluated, so integrable endpoint singularities are admissible.
/// Throws QuadratureError once `max_intervals` is exceeded.
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0, int max_intervals = 4000) {
    if (a == b) {
        return {};
    }
    std::priority_queue<detail::Segment> heap;
    heap.push(detail::gk15(f, a, b));
    double value = heap.top().value;
    double error = heap.top().error;
    int intervals = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
        if (intervals >= max_intervals) {
            std::ostringstream msg;
            msg << "adaptive quadrature did not converge on [" << a << ", " << b << "]: error estimate " << error
                << " after " << intervals << " intervals";
            throw QuadratureError(msg.str());
        }
        const detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw QuadratureError("adaptive quadrature reached machine resolution before the tolerance");
        }
        const auto left = detail::gk15(f, worst.a, mid);
        const auto right = detail::gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    double total = 0.0;
    double total_error = 0.0;
    std::vector<detail::Segment> segments;
    segments.reserve(heap.size());
    while (!heap.empty()) {
        segments.push_back(heap.top());
        heap.pop();
    }
    std::sort(segments.begin(), segments.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    for (const auto& s : segments) {
        total += s.value;
        total_error += s.error;
    }
    return {total, total_error, intervals};
}

} // namespace fbmdim::quadrature
