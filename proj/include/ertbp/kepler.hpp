#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "errors.hpp"

namespace ertbp::kepler {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Anomalies {
    double t = 0;  // mean anomaly (time)
    double E = 0;  // eccentric anomaly
    double f = 0;  // true anomaly
    double r = 1;  // distance between primaries
};

struct CoeffKey {
    int q = 0;
    int n = 0;
    int m = 0;
};

namespace detail {

inline void check_eccentricity(double e) {
    if (!(e >= 0.0 && e < 1.0)) throw DomainError("eccentricity must lie in [0,1)");
}

// t = reduced + 2*pi*k with reduced in [-pi, pi].
inline double reduce_angle(double t, double& turns) {
    turns = std::nearbyint(t / two_pi);
    return t - two_pi * turns;
}

}  // namespace detail

/// Solves t = E - e sin E. Newton from E0 = t + e sin t, bisection if Newton stalls.
inline double solve_kepler(double t, double e) {
    detail::check_eccentricity(e);
    double turns = 0;
    const double tr = detail::reduce_angle(t, turns);
    if (e == 0.0) return t;

    auto residual = [&](double E) { return E - e * std::sin(E) - tr; };
    double E = tr + e * std::sin(tr);
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
        const double F = residual(E);
        if (std::fabs(F) <= 1e-13) {
            E -= F / (1.0 - e * std::cos(E));  // one more step costs nothing and reaches full precision
            ok = true;
            break;
        }
        const double dE = F / (1.0 - e * std::cos(E));
        E -= dE;
        if (!std::isfinite(E) || std::fabs(E) > pi + 1.0) break;
    }
    if (!ok || std::fabs(residual(E)) > 1e-13) {
        // E - e sin E is increasing, and maps [-pi, pi] onto itself.
        double lo = -pi, hi = pi;
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            (residual(mid) < 0 ? lo : hi) = mid;
        }
        E = 0.5 * (lo + hi);
    }
    return E + two_pi * turns;
}

inline Anomalies anomalies(double t, double e) {
    const double E = solve_kepler(t, e);
    double turns = 0;
    const double Er = detail::reduce_angle(E, turns);
    Anomalies a;
    a.t = t;
    a.E = E;
    a.f = 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * Er), std::sqrt(1.0 - e) * std::cos(0.5 * Er)) +
          two_pi * turns;
    a.r = 1.0 - e * std::cos(E);
    return a;
}

inline double radius_from_true_anomaly(double f, double e) {
    return (1.0 - e * e) / (1.0 + e * std::cos(f));
}

/// True anomaly by integrating df/dt = (1+e cos f)^2/(1-e^2)^{3/2} from f(0)=0.
/// Kept as an independent check of the half-angle formula.
inline double true_anomaly_ode(double t, double e, double tol = 1e-13) {
    detail::check_eccentricity(e);
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 1>;
    const double k = 1.0 / std::pow(1.0 - e * e, 1.5);
    State f{0.0};
    auto rhs = [&](const State& y, State& dy, double) {
        const double w = 1.0 + e * std::cos(y[0]);
        dy[0] = w * w * k;
    };
    if (t == 0.0) return 0.0;
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(tol, tol), rhs, f, 0.0,
                               t, t / 64.0);
    return f[0];
}

/// c_q^{n,m} = (1/2pi) int_0^{2pi} r^{n+1} e^{imf} e^{-iqt} dE, by the periodic
/// trapezoid rule with node doubling.
inline double fourier_c(const CoeffKey& key, double e, double tol = 1e-14) {
    detail::check_eccentricity(e);
    if (!(tol > 0)) throw DomainError("fourier_c: tol must be positive");
    // circular orbit: r = 1, f = t
    if (e == 0.0) return key.q == key.m ? 1.0 : 0.0;
    const double sp = std::sqrt(1.0 + e), sm = std::sqrt(1.0 - e);
    auto sample = [&](double E, double& im) {
        const double r = 1.0 - e * std::cos(E);
        const double f = 2.0 * std::atan2(sp * std::sin(0.5 * E), sm * std::cos(0.5 * E));
        const double t = E - e * std::sin(E);
        const double w = std::pow(r, key.n + 1);
        const double ph = key.m * f - key.q * t;
        im += w * std::sin(ph);
        return w * std::cos(ph);
    };

    int nodes = 16;
    double re_sum = 0, im_sum = 0;
    for (int j = 0; j < nodes; ++j) re_sum += sample(-pi + two_pi * j / nodes, im_sum);
    double prev = re_sum / nodes;
    for (int level = 0; level < 16; ++level) {
        // add the midpoints of the current rule
        for (int j = 0; j < nodes; ++j) re_sum += sample(-pi + two_pi * (j + 0.5) / nodes, im_sum);
        nodes *= 2;
        const double cur = re_sum / nodes;
        const double scale = std::max(1.0, std::fabs(cur));
        if (std::fabs(cur - prev) < tol * scale) {
            if (std::fabs(im_sum / nodes) > std::max(tol, 1e-14) * scale * 16)
                throw AccuracyError("fourier_c: imaginary part above tolerance", std::fabs(im_sum / nodes));
            return cur;
        }
        prev = cur;
    }
    throw AccuracyError("fourier_c: trapezoid rule did not converge", std::fabs(re_sum / nodes - prev));
}

inline double fourier_c(int q, int n, int m, double e, double tol = 1e-14) {
    return fourier_c(CoeffKey{q, n, m}, e, tol);
}

/// Upper bound on |c_q^{n,m}| for q, n >= 0 and m <= n + 1. Euler's number
/// appears as exp(q sqrt(1 - e^2)); e is the eccentricity.
inline double bound_c(int q, int n, int m, double e) {
    detail::check_eccentricity(e);
    if (q < 0 || n < 0 || m > n + 1) throw DomainError("bound_c: need q, n >= 0 and m <= n + 1");
    if (m <= -1) return std::pow(1.0 + e, n + 1);
    const int d = std::abs(m - q);
    return std::ldexp(1.0, q + n + 1) * std::exp(q * std::sqrt(1.0 - e * e)) * (d == 0 ? 1.0 : std::pow(e, d));
}

}  // namespace ertbp::kepler
