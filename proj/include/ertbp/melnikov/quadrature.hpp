#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ertbp::melnikov::quad {

template <class R>
double magnitude(const R& r) {
    using std::abs;
    return abs(r);
}

template <class R>
struct Result {
    R value{};
    double error = 0;
    double l1 = 0;
    int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (15/31 points): bisects the interval with the
/// largest error estimate until the summed estimate is below
/// max(abs_tol, rel_tol * |integral|), or below the rounding floor set by the L1
/// norm of the integrand. Starts from the supplied breakpoints.
template <class F>
auto adaptive(F&& f, const std::vector<double>& cuts, double rel_tol, double abs_tol = 0.0,
              int max_intervals = 4000) {
    using R = decltype(f(0.0));
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    struct Piece {
        double a, b;
        R value;
        double err;
        double l1;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    auto eval = [&](double a, double b) {
        double e = 0, l1 = 0;
        R v = GK::integrate(f, a, b, 0, 0.0, &e, &l1);
        return Piece{a, b, v, e, l1};
    };
    std::priority_queue<Piece> heap;
    R total{};
    double err = 0, l1 = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i] == cuts[i + 1]) continue;
        Piece p = eval(cuts[i], cuts[i + 1]);
        total += p.value;
        err += p.err;
        l1 += p.l1;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    // rounding puts a floor of a few ulps of the L1 norm under any estimate
    auto target = [&] { return std::max({abs_tol, rel_tol * magnitude(total), 64 * 2.2e-16 * l1}); };
    while (!heap.empty() && err > target() && count < max_intervals) {
        Piece p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) break;
        Piece l = eval(p.a, mid), r = eval(mid, p.b);
        total += l.value + r.value - p.value;
        err += l.err + r.err - p.err;
        l1 += l.l1 + r.l1 - p.l1;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // recompute the sum to shed accumulated cancellation in the running total
    R sum{};
    double esum = 0, l1sum = 0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().err;
        l1sum += heap.top().l1;
        heap.pop();
    }
    return Result<R>{sum, esum, l1sum, count};
}

template <class F>
auto adaptive(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0, int max_intervals = 4000) {
    return adaptive(std::forward<F>(f), std::vector<double>{a, b}, rel_tol, abs_tol, max_intervals);
}

inline std::vector<double> linspace(double a, double b, int panels) {
    std::vector<double> v(panels + 1);
    for (int i = 0; i <= panels; ++i) v[i] = a + (b - a) * i / panels;
    v.back() = b;
    return v;
}

}  // namespace ertbp::melnikov::quad
