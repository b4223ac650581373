#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "dynamics.hpp"
#include "errors.hpp"
#include "melnikov/direct.hpp"
#include "scaled_real.hpp"
#include "scattering.hpp"
#include "separatrix.hpp"

namespace ertbp::diffusion {

using scattering::CurvePoint;
using scattering::Sign;
using scattering::TableProvider;

/// Band of angular momentum where the theorem applies: 32 <= G_min < G_max <= 1/(8e),
/// with the mass-ratio threshold mu* = exp(-(1/(8e))^3/3).
struct Region {
    double G_min = 32.0;
    double G_max = 0.0;
    double e = 0.0;

    static Region for_eccentricity(double e) { return Region{32.0, 1.0 / (8.0 * e), e}; }

    ScaledReal mu_star() const {
        const double g = 1.0 / (8.0 * e);
        return ScaledReal::exp(-g * g * g / 3.0);
    }
    bool admissible() const { return e > 0 && 32.0 <= G_min && G_min < G_max && G_max <= 1.0 / (8.0 * e) * (1 + 1e-12); }
    bool contains(double G) const { return G >= G_min && G <= G_max; }
};

struct Leg {
    Sign sign = Sign::plus;
    ScaledReal level;
    std::vector<CurvePoint> polyline;
};

struct SwitchPoint {
    double alpha = 0, G = 0;
    Sign from = Sign::plus, to = Sign::minus;
    ScaledReal margin;  // normalized bracket, the sine of the crossing angle
    double d_value = 0;
};

struct TargetHit {
    double target = 0;
    double G = 0;
    std::size_t leg = 0;
};

struct Itinerary {
    double e = 0;
    std::vector<Leg> legs;
    std::vector<SwitchPoint> switches;
    std::vector<TargetHit> targets_hit;

    bool empty() const { return legs.empty(); }
};

struct PlannerConfig {
    double alpha0 = 1.0;         // starting angle
    double step = 0.02;          // arc length per continuation step
    double hysteresis = 0.05;    // relative advantage in dG per unit arc needed to switch
    double angle_margin = 0.05;  // keep switches this far (rad) from alpha = 0, pi
    double d_margin = 0.05;      // and from zeros of d along alpha
    double stall_arc = 8.0 * std::numbers::pi;  // arc length without progress before giving up
    double max_arc = 1e5;
    bool allow_outside_theorem = false;  // permit regions below G = 32 (for demonstrations)
    scattering::TraceOptions tracing;
};

namespace detail {

struct Rates {
    scattering::ReducedValue plus, minus;
    double rate_plus = 0, rate_minus = 0;  // dG per unit arc length along the scattering flow
    ScaledReal rel_advantage;               // |rate_plus - rate_minus| / max|rate|
};

inline double flow_rate(const scattering::ReducedValue& r) {
    const ScaledReal da = r.d_alpha(), dg = r.d_G();
    const ScaledReal big = da.abs() > dg.abs() ? da.abs() : dg.abs();
    if (big.is_zero()) throw CriticalPointError("planner: gradient of L* vanishes");
    const double x = (da / big).to_double(), y = (dg / big).to_double();
    return x / std::hypot(x, y);
}

inline Rates rates(double alpha, double G, const TableProvider& p, const scattering::CriticalOptions& opt) {
    const auto t = p.table(G), dt = p.derivative(G);
    const auto cp = scattering::critical_points(alpha, t, opt);
    Rates r;
    r.plus = scattering::reduced_at(cp.s_plus, alpha, t, dt);
    r.minus = scattering::reduced_at(cp.s_minus, alpha, t, dt);
    r.rate_plus = flow_rate(r.plus);
    r.rate_minus = flow_rate(r.minus);
    // slope difference bracket / (dG+ dG-), relative to the larger slope
    const ScaledReal gp = r.plus.d_G(), gm = r.minus.d_G();
    if (!gp.is_zero() && !gm.is_zero()) {
        const double mp = (r.plus.d_alpha() / gp).to_double(), mm = (r.minus.d_alpha() / gm).to_double();
        const double big = std::max(std::fabs(mp), std::fabs(mm));
        if (big > 0) r.rel_advantage = (scattering::bracket(r.plus, r.minus) / (gp * gm)).abs() / big;
    }
    return r;
}

// One predictor-corrector step along L*_sign = level.
inline CurvePoint level_step(Sign sign, const ScaledReal& level, double a, double g, double h, const TableProvider& p,
                             const scattering::TraceOptions& opt, double& drift) {
    auto eval = [&](double x, double y) { return scattering::reduced_poincare(sign, x, y, p, opt.critical); };
    auto tangent = [&](const scattering::ReducedValue& r, double& ta, double& tg) {
        const ScaledReal da = r.d_alpha(), dg = r.d_G();
        const ScaledReal big = da.abs() > dg.abs() ? da.abs() : dg.abs();
        if (big.is_zero()) throw CriticalPointError("planner: gradient of L* vanishes");
        const double x = (da / big).to_double(), y = (dg / big).to_double(), n = std::hypot(x, y);
        ta = -y / n, tg = x / n;
    };
    double ta, tg;
    tangent(eval(a, g), ta, tg);
    tangent(eval(a + 0.5 * h * ta, g + 0.5 * h * tg), ta, tg);
    double na = a + h * ta, ng = g + h * tg;
    scattering::ReducedValue r;
    for (int it = 0; it <= opt.max_corrector; ++it) {
        r = eval(na, ng);
        const ScaledReal miss = r.value() - level;
        drift = (miss / level).abs().to_double();
        if (drift <= 1e-3 * opt.tol || it == opt.max_corrector) break;
        const ScaledReal da = r.d_alpha(), dg = r.d_G();
        const ScaledReal n2 = da * da + dg * dg;
        na -= (miss * da / n2).to_double();
        ng -= (miss * dg / n2).to_double();
    }
    if (drift > opt.tol) throw AccuracyError("planner: corrector did not restore the level", drift);
    return {na, ng, ((r.value() - level) / level).to_double()};
}

inline bool near_axis(double alpha, double margin) {
    const double r = std::fabs(std::remainder(alpha, std::numbers::pi));
    return r < margin;
}

}  // namespace detail

/// Greedy alternation between the level curves of L*_+ and L*_-: follow the
/// curve whose scattering flow moves G toward the current target, and switch
/// when the other curve is better by the hysteresis margin at an admissible
/// point. Targets are visited in order.
inline Itinerary plan_itinerary(double G_start, const std::vector<double>& targets, const Region& region,
                                const TableProvider& provider, const PlannerConfig& cfg = {}) {
    if (!region.admissible() && !cfg.allow_outside_theorem)
        throw DomainError("plan_itinerary: region is not admissible (need 32 <= G_min < G_max <= 1/(8e))");
    if (!(region.G_min < region.G_max)) throw DomainError("plan_itinerary: empty region");
    for (double t : targets)
        if (!(t > region.G_min && t < region.G_max)) throw DomainError("plan_itinerary: target outside the region");
    if (!region.contains(G_start)) throw DomainError("plan_itinerary: start outside the region");

    Itinerary it;
    it.e = provider.eccentricity();
    std::size_t next = 0;
    while (next < targets.size() && targets[next] == G_start) it.targets_hit.push_back({targets[next++], G_start, 0});
    if (next == targets.size()) return it;

    scattering::TraceOptions topt = cfg.tracing;
    double a = cfg.alpha0, g = G_start;
    auto direction = [&] { return targets[next] > g ? 1.0 : -1.0; };

    detail::Rates r = detail::rates(a, g, provider, topt.critical);
    Sign cur = direction() * r.rate_plus >= direction() * r.rate_minus ? Sign::plus : Sign::minus;
    auto start_leg = [&](Sign s, const scattering::ReducedValue& v) {
        Leg leg;
        leg.sign = s;
        leg.level = v.value();
        leg.polyline.push_back({a, g, 0.0});
        it.legs.push_back(std::move(leg));
    };
    start_leg(cur, cur == Sign::plus ? r.plus : r.minus);

    double arc = 0, best = direction() * g, best_arc = 0;
    ScaledReal best_advantage;
    while (next < targets.size()) {
        // switching decision at the current point
        const double dir = direction();
        const double rc = cur == Sign::plus ? r.rate_plus : r.rate_minus;
        const double ro = cur == Sign::plus ? r.rate_minus : r.rate_plus;
        if (r.rel_advantage > best_advantage) best_advantage = r.rel_advantage;
        const bool better = dir * (ro - rc) >= cfg.hysteresis * std::max(std::fabs(rc), std::fabs(ro)) && dir * (ro - rc) > 0;
        if (better && !detail::near_axis(a, cfg.angle_margin)) {
            const auto tr = scattering::transversality(a, g, provider, topt.critical);
            auto dval = [&](double x) {
                const auto ap = scattering::amplitude_phase(x, provider.table(g));
                return scattering::d_function(x, g, provider.eccentricity(), ap.B, ap.p);
            };
            const double d0 = tr.d_value, dl = dval(a - cfg.d_margin), dh = dval(a + cfg.d_margin);
            const bool d_ok = (d0 > 0 && dl > 0 && dh > 0) || (d0 < 0 && dl < 0 && dh < 0);
            if (d_ok && !tr.normalized.is_zero()) {
                const Sign to = cur == Sign::plus ? Sign::minus : Sign::plus;
                it.switches.push_back({a, g, cur, to, tr.normalized.abs(), d0});
                cur = to;
                start_leg(cur, cur == Sign::plus ? r.plus : r.minus);
            }
        }

        double drift = 0;
        const double g_prev = g;
        const CurvePoint pt = detail::level_step(cur, it.legs.back().level, a, g, cfg.step, provider, topt, drift);
        a = pt.alpha, g = pt.G;
        arc += cfg.step;
        it.legs.back().polyline.push_back(pt);
        if (!region.contains(g)) throw StallError("plan_itinerary: the level curve leaves the region", a, g);

        while (next < targets.size() && (g_prev - targets[next]) * (g - targets[next]) <= 0) {
            it.targets_hit.push_back({targets[next], g, it.legs.size() - 1});
            ++next;
            if (next < targets.size()) best = direction() * g, best_arc = arc;
        }
        if (next == targets.size()) break;

        if (direction() * g > best + 1e-9 * std::fabs(g)) {
            best = direction() * g;
            best_arc = arc;
        }
        if (arc - best_arc > cfg.stall_arc || arc > cfg.max_arc) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "plan_itinerary: no progress toward G = %.6g over arc length %.3g; the largest relative "
                          "difference between the L*_+ and L*_- flows seen was exp(%.6g)",
                          targets[next], arc - best_arc, best_advantage.log_abs());
            throw StallError(buf, a, g);
        }
        r = detail::rates(a, g, provider, topt.critical);
    }
    return it;
}

struct VerifyReport {
    bool pass = true;
    double max_drift = 0;
    std::size_t worst_leg = 0, worst_point = 0;
    bool region_violation = false;
    bool mu_below_threshold = true;
    std::vector<std::string> failures;
};

/// Re-evaluates L*_sign along every leg, and checks endpoints, switches, region
/// and target order.
inline VerifyReport verify_itinerary(const Itinerary& it, const TableProvider& provider, const Region& region, double tol,
                                     std::optional<double> mu = std::nullopt, const PlannerConfig& cfg = {}) {
    VerifyReport rep;
    auto fail = [&](std::string m) {
        rep.pass = false;
        rep.failures.push_back(std::move(m));
    };
    if (it.legs.empty()) fail("itinerary is empty");
    for (std::size_t i = 0; i < it.legs.size(); ++i) {
        const Leg& leg = it.legs[i];
        if (leg.polyline.empty()) {
            fail("leg " + std::to_string(i) + " has no points");
            continue;
        }
        const ScaledReal level = scattering::reduced_poincare(leg.sign, leg.polyline[0].alpha, leg.polyline[0].G, provider,
                                                              cfg.tracing.critical)
                                     .value();
        for (std::size_t j = 0; j < leg.polyline.size(); ++j) {
            const CurvePoint& p = leg.polyline[j];
            if (!region.contains(p.G)) rep.region_violation = true;
            const ScaledReal v = scattering::reduced_poincare(leg.sign, p.alpha, p.G, provider, cfg.tracing.critical).value();
            const double d = ((v - level) / level).abs().to_double();
            if (d > rep.max_drift) rep.max_drift = d, rep.worst_leg = i, rep.worst_point = j;
        }
        if (i + 1 < it.legs.size()) {
            const CurvePoint &a = leg.polyline.back(), &b = it.legs[i + 1].polyline.front();
            if (a.alpha != b.alpha || a.G != b.G) fail("legs " + std::to_string(i) + " and " + std::to_string(i + 1) + " do not share an endpoint");
        }
    }
    if (rep.max_drift > tol) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "level drift %.3g on leg %zu point %zu exceeds %.3g", rep.max_drift, rep.worst_leg,
                      rep.worst_point, tol);
        fail(buf);
    }
    if (rep.region_violation) fail("itinerary leaves the region [" + std::to_string(region.G_min) + ", " + std::to_string(region.G_max) + "]");
    for (const auto& s : it.switches) {
        const auto tr = scattering::transversality(s.alpha, s.G, provider, cfg.tracing.critical);
        if (tr.normalized.is_zero()) fail("switch at alpha=" + std::to_string(s.alpha) + " is not transversal");
        if (detail::near_axis(s.alpha, cfg.angle_margin)) fail("switch at alpha=" + std::to_string(s.alpha) + " is too close to alpha = 0, pi");
    }
    if (mu) {
        rep.mu_below_threshold = ScaledReal(*mu) < region.mu_star();
        if (!rep.mu_below_threshold) fail("mu is not below mu*");
    }
    return rep;
}

inline nlohmann::json to_json(const Itinerary& it) {
    nlohmann::json j;
    j["e"] = it.e;
    j["legs"] = nlohmann::json::array();
    for (const auto& leg : it.legs) {
        nlohmann::json l;
        l["sign"] = scattering::sign_name(leg.sign);
        l["level"] = {{"mantissa", leg.level.mantissa()}, {"log_factor", leg.level.log_factor()}};
        l["alpha"] = nlohmann::json::array();
        l["G"] = nlohmann::json::array();
        for (const auto& p : leg.polyline) {
            l["alpha"].push_back(p.alpha);
            l["G"].push_back(p.G);
        }
        j["legs"].push_back(l);
    }
    j["switches"] = nlohmann::json::array();
    for (const auto& s : it.switches)
        j["switches"].push_back({{"alpha", s.alpha},
                                 {"G", s.G},
                                 {"from", scattering::sign_name(s.from)},
                                 {"to", scattering::sign_name(s.to)},
                                 {"margin", {{"mantissa", s.margin.mantissa()}, {"log_factor", s.margin.log_factor()}}},
                                 {"d", s.d_value}});
    j["targets"] = nlohmann::json::array();
    for (const auto& t : it.targets_hit) j["targets"].push_back({{"target", t.target}, {"G", t.G}, {"leg", t.leg}});
    return j;
}

inline void write_csv(std::ostream& os, const Itinerary& it) {
    os << "leg,sign,alpha,G\n";
    char buf[128];
    for (std::size_t i = 0; i < it.legs.size(); ++i)
        for (const auto& p : it.legs[i].polyline) {
            std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g\n", i, scattering::sign_name(it.legs[i].sign), p.alpha, p.G);
            os << buf;
        }
}

// ---------------------------------------------------------------------------
// Change of angular momentum across one homoclinic excursion, ODE vs first order.

struct ExperimentConfig {
    // integrate until x falls below this on both sides. For mu > 0 the energy is
    // O(mu) off the parabolic value, and at mu = 1e-4 the orbit turns back before
    // x reaches 1e-2, so the default stays above that.
    double x_cut = 2e-2;
    double rtol = 1e-13, atol = 1e-14;
    int fit_samples = 4;       // x thresholds x_cut * 2^j, j = fit_samples-1 .. 0, used by the tail fit
    double reference_tol = 1e-10;  // quadrature tolerance for dL/dalpha
    double settle_tol = 1e-6;      // a non-monotone tail whose last samples agree to this is taken as converged
};

struct TailFit {
    double value_at_cut = 0;
    double limit = 0;
    double exponent = 0;  // fitted decay g(t) - g_inf ~ t^-exponent
    double error = 0;     // disagreement between two three-point fits
};

struct ExperimentRow {
    double mu = 0;
    double dG = 0;           // G_+ - G_-
    double dG_over_mu = 0;
    double residual = 0;     // |dG/mu - dL/dalpha|
    TailFit forward, backward;
};

struct ExperimentResult {
    double dL_dalpha = 0;  // first-order prediction
    std::vector<ExperimentRow> rows;
    std::vector<double> residual_ratios;  // residual[i] / residual[i+1]
    double order = 0;                     // log-log slope of residual against mu
};

namespace detail {

// Fit g = g_inf + a t^{-p} through three samples (t_i, g_i), |t| increasing.
inline std::optional<std::pair<double, double>> three_point_fit(const std::array<double, 3>& t, const std::array<double, 3>& g) {
    const double d1 = g[0] - g[1], d2 = g[1] - g[2];
    if (d1 == 0 && d2 == 0) return std::pair{g[2], 0.0};
    if (d1 == 0 || d2 == 0 || (d1 > 0) != (d2 > 0)) return std::nullopt;
    auto ratio = [&](double p) {
        return (std::pow(t[0], -p) - std::pow(t[1], -p)) / (std::pow(t[1], -p) - std::pow(t[2], -p));
    };
    const double target = d1 / d2;
    double lo = 0.05, hi = 6.0;
    if ((ratio(lo) - target) * (ratio(hi) - target) > 0) return std::nullopt;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((ratio(mid) - target) * (ratio(lo) - target) > 0 ? lo : hi) = mid;
    }
    const double p = 0.5 * (lo + hi);
    const double a = d2 / (std::pow(t[1], -p) - std::pow(t[2], -p));
    return std::pair{g[2] - a * std::pow(t[2], -p), p};
}

}  // namespace detail

/// Integrates the full equations from the separatrix apex (tau = 0) at
/// (alpha, G, s) forward and backward until x < x_cut, with G = G0 + mu g so that
/// g carries the O(1) part of the change. Asymptotic values come from a power-law
/// fit of g over the last x thresholds.
inline ExperimentRow ode_delta_G(double alpha, double G, double s, double e, double mu, const ExperimentConfig& cfg = {}) {
    namespace odeint = boost::numeric::odeint;
    using St = std::array<double, 5>;
    if (!(mu >= 0)) throw DomainError("ode_delta_G: mu must be non-negative");
    const dynamics::Params P{mu, e};
    P.validate();
    separatrix::SeparatrixParams sp;
    sp.alpha_star = alpha;
    sp.G_star = G;
    sp.s_star = s;
    const auto z0 = separatrix::homoclinic_state_tau(0.0, 0.0, sp);

    auto run = [&](double dir) {
        St y{z0.x, z0.alpha, z0.y, 0.0, z0.s};
        auto rhs = [&](const St& u, St& du, double) {
            const dynamics::McGeheeExtState z{std::max(u[0], 0.0), u[1], u[2], G + mu * u[3], u[4]};
            const dynamics::Derivative d = dynamics::vector_field(z, P);
            du = {d.dx, d.dalpha, d.dy, mu == 0 ? 0.0 : d.dG / mu, 1.0};
        };
        auto stepper = odeint::make_dense_output(cfg.atol, cfg.rtol, odeint::runge_kutta_dopri5<St>());
        stepper.initialize(y, 0.0, dir * 0.1);
        std::vector<double> thresholds;
        for (int j = cfg.fit_samples - 1; j >= 0; --j) thresholds.push_back(cfg.x_cut * std::ldexp(1.0, j));
        std::vector<double> ts, gs;
        std::size_t k = 0;
        St tmp;
        long steps = 0;
        while (k < thresholds.size()) {
            const auto span = stepper.do_step(rhs);
            if (++steps > 50'000'000) throw TailFitError("ode_delta_G: step budget exhausted before x_cut");
            while (k < thresholds.size() && stepper.current_state()[0] < thresholds[k]) {
                double lo = span.first, hi = span.second;
                for (int i = 0; i < 100; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    stepper.calc_state(mid, tmp);
                    (tmp[0] < thresholds[k] ? hi : lo) = mid;
                }
                stepper.calc_state(hi, tmp);
                ts.push_back(std::fabs(hi));
                gs.push_back(tmp[3]);
                ++k;
            }
        }
        TailFit f;
        f.value_at_cut = gs.back();
        if (mu == 0) {
            f.limit = 0;
            return f;
        }
        const std::size_t n = gs.size();
        if (n < 3) {
            f.limit = gs.back();
            return f;
        }
        const auto a = detail::three_point_fit({ts[n - 3], ts[n - 2], ts[n - 1]}, {gs[n - 3], gs[n - 2], gs[n - 1]});
        if (!a) {
            // an oscillating tail cannot be extrapolated, but it may already have settled
            const double spread = std::max(std::fabs(gs[n - 3] - gs[n - 1]), std::fabs(gs[n - 2] - gs[n - 1]));
            if (spread > cfg.settle_tol) throw TailFitError("ode_delta_G: tail samples are not monotone in t");
            f.limit = gs.back();
            f.error = spread;
            return f;
        }
        f.limit = a->first;
        f.exponent = a->second;
        if (n >= 4) {
            const auto b = detail::three_point_fit({ts[n - 4], ts[n - 3], ts[n - 2]}, {gs[n - 4], gs[n - 3], gs[n - 2]});
            f.error = b ? std::fabs(b->first - a->first) : std::fabs(a->first - gs.back());
        }
        if (a->second != 0 && (a->second < 0.3 || a->second > 4.0))
            throw TailFitError("ode_delta_G: fitted decay exponent " + std::to_string(a->second) + " is implausible");
        return f;
    };
    ExperimentRow row;
    row.mu = mu;
    row.forward = run(1.0);
    row.backward = run(-1.0);
    row.dG_over_mu = mu == 0 ? 0.0 : row.forward.limit - row.backward.limit;
    row.dG = mu * row.dG_over_mu;
    return row;
}

/// G_+ - G_- from the ODE for each mu, against mu dL/dalpha(alpha, G, s).
inline ExperimentResult melnikov_ode_experiment(double alpha, double G, double s, double e, const std::vector<double>& mus,
                                                const ExperimentConfig& cfg = {}) {
    for (std::size_t i = 1; i < mus.size(); ++i)
        if (!(mus[i] < mus[i - 1])) throw DomainError("melnikov_ode_experiment: mu values must decrease");
    ExperimentResult res;
    melnikov::DirectOptions o;
    o.tol = cfg.reference_tol;
    o.d_alpha = true;
    res.dL_dalpha = melnikov::melnikov_direct_detailed(alpha, G, s, e, o).value;
    for (double mu : mus) {
        ExperimentRow row = ode_delta_G(alpha, G, s, e, mu, cfg);
        row.residual = mu == 0 ? 0.0 : std::fabs(row.dG_over_mu - res.dL_dalpha);
        res.rows.push_back(row);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto& r = res.rows[i];
        if (i + 1 < res.rows.size() && res.rows[i + 1].residual > 0) res.residual_ratios.push_back(r.residual / res.rows[i + 1].residual);
        if (r.mu > 0 && r.residual > 0) {
            const double x = std::log(r.mu), y = std::log(r.residual);
            sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
        }
    }
    if (n >= 2) res.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return res;
}

inline nlohmann::json to_json(const ExperimentResult& r) {
    nlohmann::json j;
    j["dL_dalpha"] = r.dL_dalpha;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"mu", row.mu},
                             {"dG", row.dG},
                             {"dG_over_mu", row.dG_over_mu},
                             {"residual", row.residual},
                             {"forward", {{"limit", row.forward.limit}, {"exponent", row.forward.exponent}, {"fit_error", row.forward.error}}},
                             {"backward", {{"limit", row.backward.limit}, {"exponent", row.backward.exponent}, {"fit_error", row.backward.error}}}});
    j["residual_ratios"] = r.residual_ratios;
    j["order"] = r.order;
    return j;
}

}  // namespace ertbp::diffusion
