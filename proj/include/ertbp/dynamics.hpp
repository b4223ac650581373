#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "errors.hpp"
#include "kepler.hpp"

namespace ertbp::dynamics {

struct Params {
    double mu = 0.0;  // mass ratio in [0, 1/2]
    double e = 0.0;   // eccentricity in [0, 1)

    void validate() const {
        if (!(mu >= 0.0 && mu <= 0.5)) throw DomainError("mass ratio must lie in [0, 1/2]");
        kepler::detail::check_eccentricity(e);
    }

    // Whether the region [G_min, G_max] satisfies 32 <= G_min < G_max <= 1/(8e).
    bool admissible_for_theory(double G_min, double G_max) const {
        return e > 0 && G_min >= 32.0 && G_min < G_max && G_max <= 1.0 / (8.0 * e);
    }
};

struct McGeheeExtState {
    double x = 0;
    double alpha = 0;
    double y = 0;
    double G = 1;
    double s = 0;
};

struct PolarState {
    double rho = 1;
    double alpha = 0;
    double y = 0;  // P_rho
    double G = 1;  // P_alpha
    double s = 0;
};

struct CartesianState {
    double X = 1, Y = 0;    // comet position
    double PX = 0, PY = 0;  // momenta
    double s = 0;
};

inline PolarState to_polar(const McGeheeExtState& z) {
    if (!(z.x > 0)) throw DomainError("to_polar: x must be positive");
    return {2.0 / (z.x * z.x), z.alpha, z.y, z.G, z.s};
}

inline McGeheeExtState to_mcgehee(const PolarState& p) {
    if (!(p.rho > 0)) throw DomainError("to_mcgehee: rho must be positive");
    return {std::sqrt(2.0 / p.rho), p.alpha, p.y, p.G, p.s};
}

inline CartesianState to_cartesian(const PolarState& p) {
    const double c = std::cos(p.alpha), s = std::sin(p.alpha);
    return {p.rho * c, p.rho * s, p.y * c - p.G / p.rho * s, p.y * s + p.G / p.rho * c, p.s};
}

inline PolarState to_polar(const CartesianState& c) {
    const double rho = std::hypot(c.X, c.Y);
    if (!(rho > 0)) throw DomainError("to_polar: position at the origin");
    const double a = std::atan2(c.Y, c.X);
    return {rho, a, (c.X * c.PX + c.Y * c.PY) / rho, c.X * c.PY - c.Y * c.PX, c.s};
}

struct PotentialValue {
    double value = 0;
    double d_alpha = 0;
    double d_x = 0;
};

namespace detail {

// W1 = sum_{l>=2} (a/2)^l P_l(c) [nu mu^{l-1} + (-nu)^l] and its partials in a and c.
// The dipole terms cancel identically, so for small a this avoids the
// cancellation of the closed form.
inline void legendre_w1(double a, double c, double mu, double& W1, double& dWda, double& dWdc) {
    const double nu = 1.0 - mu;
    const double h = 0.5 * a;
    double P0 = 1.0, P1 = c;      // P_{l-2}, P_{l-1}
    double D0 = 0.0, D1 = 1.0;    // derivatives
    double hl = h;                // h^{l-1}
    double mul = 1.0;             // mu^{l-2}
    double nul = -nu;             // (-nu)^{l-1}
    W1 = dWda = dWdc = 0.0;
    for (int l = 2; l < 80; ++l) {
        const double P = ((2.0 * l - 1.0) * c * P1 - (l - 1.0) * P0) / l;
        const double D = D0 + (2.0 * l - 1.0) * P1;
        mul *= (l == 2) ? 1.0 : mu;
        nul *= -nu;
        const double w = nu * mul * mu + nul;
        const double hprev = hl;
        hl *= h;
        const double tW = hl * P * w;
        W1 += tW;
        dWda += 0.5 * l * hprev * P * w;
        dWdc += hl * D * w;
        if (std::fabs(tW) <= 1e-18 * std::fabs(W1) && hl < 1e-17) break;
        P0 = P1, P1 = P, D0 = D1, D1 = D;
    }
}

}  // namespace detail

/// Delta U_mu = (U_mu - x^2/2)/mu and its partials; for mu = 0 the limit Delta U_0.
/// Written so that nothing is divided by mu.
inline PotentialValue delta_potential(double x, double alpha, double s, const Params& p) {
    if (!(x >= 0)) throw DomainError("delta_potential: x must be non-negative");
    if (x == 0.0) return {};
    const kepler::Anomalies an = kepler::anomalies(s, p.e);
    const double mu = p.mu, nu = 1.0 - mu;
    const double x2 = x * x;
    const double a = an.r * x2;
    const double c = std::cos(alpha - an.f), sn = std::sin(alpha - an.f);

    PotentialValue out;
    if (a < 0.125) {
        double W1, dWda, dWdc;
        detail::legendre_w1(a, c, mu, W1, dWda, dWdc);
        out.value = 0.5 * x2 * W1;
        out.d_alpha = -0.5 * x2 * dWdc * sn;
        out.d_x = x * W1 + x2 * x * an.r * dWda;
        return out;
    }

    const double dS_over_mu = -a * c + mu * a * a / 4.0;  // (sigma_S^2 - 1)/mu
    const double sS2 = 1.0 + mu * dS_over_mu;
    const double sJ2 = 1.0 + nu * a * c + nu * nu * a * a / 4.0;
    if (!(sS2 > 0) || !(sJ2 > 0)) throw SingularityError("collision configuration");
    const double sS = std::sqrt(sS2), sJ = std::sqrt(sJ2);
    const double iS3 = 1.0 / (sS2 * sS), iJ3 = 1.0 / (sJ2 * sJ);

    // (1/sigma_S - 1)/mu without cancellation
    const double gS = -dS_over_mu / (sS * (1.0 + sS));
    const double W1 = nu * gS + (1.0 / sJ - 1.0);  // (W - 1)/mu

    out.value = 0.5 * x2 * W1;
    out.d_alpha = 0.25 * x2 * nu * a * sn * (iJ3 - iS3);
    const double dWda = 0.5 * nu * (iS3 * (c - mu * a / 2.0) - iJ3 * (c + nu * a / 2.0));
    out.d_x = x * W1 + x2 * x * an.r * dWda;
    return out;
}

struct Derivative {
    double dx = 0, dalpha = 0, dy = 0, dG = 0, ds = 1;
};

inline Derivative vector_field(const McGeheeExtState& z, const Params& p) {
    if (!(z.x >= 0)) throw DomainError("vector_field: x must be non-negative");
    if (z.x == 0.0) return {0, 0, 0, 0, 1};
    const PotentialValue dU = delta_potential(z.x, z.alpha, z.s, p);
    const double x3 = z.x * z.x * z.x;
    const double Ux = z.x + p.mu * dU.d_x;
    Derivative d;
    d.dx = -x3 * z.y / 4.0;
    d.dalpha = x3 * z.x * z.G / 4.0;
    d.dy = z.G * z.G * x3 * x3 / 8.0 - x3 / 4.0 * Ux;
    d.dG = p.mu * dU.d_alpha;
    d.ds = 1.0;
    return d;
}

struct Energies {
    double H0 = 0;
    double Hmu = 0;
    double jacobi = 0;  // Hmu - G; a first integral only when e = 0
};

inline double H0(const McGeheeExtState& z) {
    const double x2 = z.x * z.x;
    return z.y * z.y / 2.0 + x2 * x2 * z.G * z.G / 8.0 - x2 / 2.0;
}

inline Energies energies(const McGeheeExtState& z, const Params& p) {
    Energies E;
    E.H0 = H0(z);
    E.Hmu = E.H0 - p.mu * delta_potential(z.x, z.alpha, z.s, p).value;
    E.jacobi = E.Hmu - z.G;
    return E;
}

struct IntegrationError : Error {
    IntegrationError(const std::string& w, double t, const McGeheeExtState& last)
        : Error(ErrorKind::integration, w), t(t), last_good(last) {}
    double t;
    McGeheeExtState last_good;
};

struct TrajectoryPoint {
    double t;
    McGeheeExtState z;
};

struct Event {
    double t;
    McGeheeExtState z;
    bool decreasing;  // x crossed the threshold downwards
};

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double x_threshold = -1;       // negative: no event detection
    bool stop_at_threshold = false;  // stop at the first downward crossing
    bool record_steps = true;
    std::vector<double> observe;  // extra output times (monotone in the integration direction)
};

class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<TrajectoryPoint> pts, std::vector<Event> ev, std::vector<TrajectoryPoint> obs)
        : points_(std::move(pts)), events_(std::move(ev)), observed_(std::move(obs)) {}

    const std::vector<TrajectoryPoint>& points() const { return points_; }
    const std::vector<Event>& events() const { return events_; }
    const std::vector<TrajectoryPoint>& observed() const { return observed_; }
    const TrajectoryPoint& back() const { return points_.back(); }

    void write_csv(std::ostream& os, const Params& p) const {
        os << "t,x,alpha,y,G,s,H0,Hmu\n";
        char buf[512];
        for (const auto& pt : points_) {
            const Energies E = energies(pt.z, p);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", pt.t, pt.z.x,
                          pt.z.alpha, pt.z.y, pt.z.G, pt.z.s, E.H0, E.Hmu);
            os << buf;
        }
    }

private:
    std::vector<TrajectoryPoint> points_;
    std::vector<Event> events_;
    std::vector<TrajectoryPoint> observed_;
};

namespace detail {
using State = std::array<double, 5>;
inline State pack(const McGeheeExtState& z) { return {z.x, z.alpha, z.y, z.G, z.s}; }
inline McGeheeExtState unpack(const State& s) { return {s[0], s[1], s[2], s[3], s[4]}; }
}  // namespace detail

/// Adaptive Dormand-Prince 5(4) with dense output, from t0 to t1 (either direction).
inline Trajectory integrate(const McGeheeExtState& initial, double t0, double t1, const Params& p,
                            const IntegrateOptions& opt = {}) {
    namespace odeint = boost::numeric::odeint;
    using detail::State;
    p.validate();
    if (!(opt.rtol > 0) || !(opt.atol > 0)) throw DomainError("integrate: tolerances must be positive");
    if (!std::isfinite(t0) || !std::isfinite(t1)) throw DomainError("integrate: time span must be finite");

    auto rhs = [&](const State& y, State& dy, double) {
        McGeheeExtState z = detail::unpack(y);
        if (z.x < 0) z.x = 0;
        const Derivative d = vector_field(z, p);
        dy = {d.dx, d.dalpha, d.dy, d.dG, d.ds};
    };

    std::vector<TrajectoryPoint> pts;
    std::vector<Event> events;
    std::vector<TrajectoryPoint> obs;
    pts.push_back({t0, initial});
    if (t0 == t1) return Trajectory(std::move(pts), {}, {});

    const double dir = t1 > t0 ? 1.0 : -1.0;
    auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<State>());
    State y0 = detail::pack(initial);
    stepper.initialize(y0, t0, dir * std::min(1e-3, std::fabs(t1 - t0)));

    std::size_t next_obs = 0;
    State tmp;
    McGeheeExtState last = initial;
    double last_t = t0;
    int steps = 0;
    while (dir * (stepper.current_time() - t1) < 0) {
        std::pair<double, double> span;
        try {
            span = stepper.do_step(rhs);
        } catch (const std::exception& ex) {
            throw IntegrationError(std::string("integrate: ") + ex.what(), last_t, last);
        }
        if (++steps > 50'000'000) throw IntegrationError("integrate: step budget exhausted", last_t, last);
        const double ta = span.first, tb = span.second;
        if (std::fabs(tb - ta) < 1e-14 * std::max(1.0, std::fabs(tb)))
            throw IntegrationError("integrate: step size underflow", last_t, last);
        const double tend = dir * (tb - t1) > 0 ? t1 : tb;

        while (next_obs < opt.observe.size() && dir * (opt.observe[next_obs] - tend) <= 0) {
            const double to = opt.observe[next_obs++];
            if (dir * (to - ta) < 0) continue;
            stepper.calc_state(to, tmp);
            obs.push_back({to, detail::unpack(tmp)});
        }

        bool stop = false;
        double t_stop = tend;
        if (opt.x_threshold >= 0) {
            stepper.calc_state(tend, tmp);
            const double xa = last.x - opt.x_threshold, xb = tmp[0] - opt.x_threshold;
            if ((xa > 0) != (xb > 0)) {
                double lo = ta, hi = tend;
                for (int it = 0; it < 200 && std::fabs(hi - lo) > 1e-13 * std::max(1.0, std::fabs(hi)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    stepper.calc_state(mid, tmp);
                    ((tmp[0] - opt.x_threshold > 0) == (xa > 0) ? lo : hi) = mid;
                }
                stepper.calc_state(hi, tmp);
                events.push_back({hi, detail::unpack(tmp), xa > 0});
                if (opt.stop_at_threshold && xa > 0) {
                    stop = true;
                    t_stop = hi;
                }
            }
        }

        stepper.calc_state(t_stop, tmp);
        last = detail::unpack(tmp);
        last_t = t_stop;
        if (opt.record_steps || stop || t_stop == t1) pts.push_back({t_stop, last});
        if (stop || t_stop == t1) break;
    }
    if (pts.back().t != last_t) pts.push_back({last_t, last});
    return Trajectory(std::move(pts), std::move(events), std::move(obs));
}

}  // namespace ertbp::dynamics
