#pragma once

// Adaptive Gauss-Kronrod quadrature and monotone root bracketing.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace roskit::quad {

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

struct Options {
    double abs_tol = 1e-14;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Estimate gk15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) {
            gauss += kWg[j / 2] * fsum;
        }
    }
    return {kronrod * half, std::fabs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive G7K15 on a finite interval.
template <class F>
Estimate integrate(const F& f, double a, double b, const Options& opt = {}) {
    if (a == b) return {};
    struct Piece {
        double a, b;
        Estimate est;
        bool operator<(const Piece& o) const { return est.error < o.est.error; }
    };
    std::priority_queue<Piece> heap;
    Estimate total = detail::gk15(f, a, b);
    heap.push({a, b, total});
    int count = 1;
    while (count < opt.max_intervals) {
        if (total.error <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(total.value))) {
            break;
        }
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        const Estimate left = detail::gk15(f, worst.a, mid);
        const Estimate right = detail::gk15(f, mid, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push({worst.a, mid, left});
        heap.push({mid, worst.b, right});
        ++count;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    Estimate summed;
    while (!heap.empty()) {
        summed.value += heap.top().est.value;
        summed.error += heap.top().est.error;
        heap.pop();
    }
    return summed;
}

/// Integral over [a, +inf) via x = a + t / (1 - t).
template <class F>
Estimate integrate_to_infinity(const F& f, double a, const Options& opt = {}) {
    auto g = [&](double t) {
        const double one_minus = 1.0 - t;
        if (one_minus <= 0.0) return 0.0;
        const double x = a + t / one_minus;
        const double v = f(x);
        return std::isfinite(v) ? v / (one_minus * one_minus) : 0.0;
    };
    return integrate(g, 0.0, 1.0, opt);
}

/// Integral over [lo, hi] (hi may be +inf) split at the given interior points.
template <class F>
Estimate integrate_pieces(const F& f, double lo, double hi, std::span<const double> breaks,
                          const Options& opt = {}) {
    std::vector<double> cuts{lo};
    for (double c : breaks) {
        if (c > lo && c < hi) cuts.push_back(c);
    }
    std::sort(cuts.begin() + 1, cuts.end());
    Estimate total;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        Estimate piece;
        if (i + 1 < cuts.size()) {
            piece = integrate(f, cuts[i], cuts[i + 1], opt);
        } else if (std::isinf(hi)) {
            piece = integrate_to_infinity(f, cuts[i], opt);
        } else {
            piece = integrate(f, cuts[i], hi, opt);
        }
        total.value += piece.value;
        total.error += piece.error;
    }
    return total;
}

/// Bisection for a root of `f` on [lo, hi] given f(lo) and f(hi) of opposite
/// sign. Returns the midpoint of the final bracket.
template <class F>
double bisect(const F& f, double lo, double hi, int max_iter = 200) {
    double flo = f(lo);
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace roskit::quad
