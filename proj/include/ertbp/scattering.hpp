#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "melnikov/harmonics.hpp"
#include "scaled_real.hpp"

namespace ertbp::scattering {

using melnikov::HarmonicTable;
using melnikov::SeriesValue;

enum class Sign { plus, minus };

inline int sign_value(Sign s) { return s == Sign::plus ? 1 : -1; }
inline const char* sign_name(Sign s) { return s == Sign::plus ? "+" : "-"; }

// ---------------------------------------------------------------------------
// Tables of L_{q,k} and dL_{q,k}/dG as functions of G.

class TableProvider {
public:
    virtual ~TableProvider() = default;
    virtual HarmonicTable table(double G) const = 0;
    virtual HarmonicTable derivative(double G) const = 0;
    virtual double eccentricity() const = 0;
    // range of G where the provider is valid
    virtual double G_min() const { return 0.0; }
    virtual double G_max() const { return std::numeric_limits<double>::infinity(); }
};

/// Builds tables on demand with compute_table (or any builder) and takes G
/// derivatives by Richardson-extrapolated differences. Results are memoised.
class SeriesProvider : public TableProvider {
public:
    using Builder = std::function<HarmonicTable(double)>;

    SeriesProvider(double e, int q_max, int k_max, melnikov::SeriesOptions opt = {})
        : e_(e), build_([=](double G) { return melnikov::compute_table(G, e, q_max, k_max, opt); }) {}
    SeriesProvider(double e, Builder build) : e_(e), build_(std::move(build)) {}

    HarmonicTable table(double G) const override {
        auto it = tables_.find(G);
        if (it == tables_.end()) it = tables_.emplace(G, build_(G)).first;
        return it->second;
    }
    HarmonicTable derivative(double G) const override {
        auto it = derivs_.find(G);
        if (it == derivs_.end())
            it = derivs_.emplace(G, melnikov::table_derivative_G([this](double g) { return table(g); }, G)).first;
        return it->second;
    }
    double eccentricity() const override { return e_; }

private:
    double e_;
    Builder build_;
    mutable std::map<double, HarmonicTable> tables_, derivs_;
};

/// Chebyshev interpolation in G of L_{q,k} e^{qG^3/3} over [G_a, G_b]. Cheap to
/// evaluate, so it is the provider used for curve tracing and planning.
class ChebyshevProvider : public TableProvider {
public:
    ChebyshevProvider(double e, double G_a, double G_b, int nodes, const SeriesProvider::Builder& build)
        : e_(e), a_(G_a), b_(G_b) {
        if (!(G_a < G_b) || nodes < 2) throw DomainError("ChebyshevProvider: need G_a < G_b and nodes >= 2");
        std::vector<HarmonicTable> at_nodes;
        std::vector<double> x(nodes);
        for (int j = 0; j < nodes; ++j) {
            x[j] = std::cos(std::numbers::pi * (j + 0.5) / nodes);
            at_nodes.push_back(build(0.5 * (a_ + b_) + 0.5 * (b_ - a_) * x[j]));
        }
        meta_ = at_nodes.front().meta();
        for (const auto& [key, v] : at_nodes.front().entries()) {
            std::vector<double> g(nodes), c(nodes);
            for (int j = 0; j < nodes; ++j) {
                const double G = 0.5 * (a_ + b_) + 0.5 * (b_ - a_) * x[j];
                g[j] = at_nodes[j].get(key.first, key.second).to_double_scaled(-key.first * G * G * G / 3.0);
            }
            for (int i = 0; i < nodes; ++i) {
                double acc = 0;
                for (int j = 0; j < nodes; ++j) acc += g[j] * std::cos(std::numbers::pi * i * (j + 0.5) / nodes);
                c[i] = (i == 0 ? 1.0 : 2.0) * acc / nodes;
            }
            coeffs_[key] = std::move(c);
        }
    }

    HarmonicTable table(double G) const override { return eval(G, false); }
    HarmonicTable derivative(double G) const override { return eval(G, true); }
    double eccentricity() const override { return e_; }
    double G_min() const override { return a_; }
    double G_max() const override { return b_; }

private:
    HarmonicTable eval(double G, bool deriv) const {
        if (G < a_ - 1e-12 * a_ || G > b_ + 1e-12 * b_)
            throw RangeError("ChebyshevProvider: G outside the interpolation interval");
        const double x = (2.0 * G - a_ - b_) / (b_ - a_);
        TableMeta m = meta_;
        m.G = G;
        HarmonicTable t(m);
        for (const auto& [key, c] : coeffs_) {
            // Clenshaw for the value and the derivative in x
            double b1 = 0, b2 = 0, d1 = 0, d2 = 0;
            for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i) {
                const double b0 = 2.0 * x * b1 - b2 + c[i];
                const double d0 = 2.0 * x * d1 - d2 + 2.0 * b1;
                b2 = b1, b1 = b0, d2 = d1, d1 = d0;
            }
            const double g = x * b1 - b2 + c[0];
            const double gx = x * d1 - d2 + b1;
            const int q = key.first;
            const double shift = -q * G * G * G / 3.0;
            if (!deriv)
                t.set(key.first, key.second, ScaledReal(g, shift));
            else
                t.set(key.first, key.second, ScaledReal(gx * 2.0 / (b_ - a_) - q * G * G * g, shift));
        }
        return t;
    }
    using TableMeta = melnikov::TableMeta;

    double e_, a_, b_;
    TableMeta meta_;
    std::map<std::pair<int, int>, std::vector<double>> coeffs_;
};

// ---------------------------------------------------------------------------

/// B e^{-i theta} = 1 - p e^{-i alpha} + p E e^{-i phi} and its truncation
/// B_hat e^{-i theta_hat} = 1 - p e^{-i alpha}.
struct AmplitudePhase {
    double B = 0, theta = 0;
    double B_hat = 0, theta_hat = 0;
    double p = 0;
    double E_mod = 0, phi = 0;
    bool B_zero = false;
};

inline AmplitudePhase amplitude_phase(double alpha, const HarmonicTable& t, double noise_floor = 0.0) {
    if (t.meta().q_max < 1) throw RangeError("amplitude_phase: table has no q = 1 row");
    const ScaledReal L11 = t.get(1, -1);
    if (L11.is_zero() || L11.abs() <= ScaledReal(noise_floor))
        throw DegenerateAmplitudeError("amplitude_phase: L(1,-1) is below the noise floor");
    using C = std::complex<double>;
    AmplitudePhase a;
    a.p = -(t.get(1, -2) / L11).to_double();
    C rest{};
    for (const auto& [key, v] : t.entries()) {
        if (key.first != 1 || key.second == -1 || key.second == -2) continue;
        rest += (v / L11).to_double() * std::polar(1.0, (key.second + 1) * alpha);
    }
    const C Z = 1.0 - a.p * std::polar(1.0, -alpha) + rest;
    a.B = std::abs(Z);
    a.theta = a.B == 0 ? 0.0 : -std::arg(Z);
    a.B_hat = std::sqrt(std::max(0.0, 1.0 - 2.0 * a.p * std::cos(alpha) + a.p * a.p));
    a.theta_hat = -2.0 * std::atan2(a.p * std::sin(alpha), a.B_hat + 1.0 - a.p * std::cos(alpha));
    if (a.p != 0 && rest != C{}) {
        const C w = rest / a.p;
        a.E_mod = std::abs(w);
        a.phi = -std::arg(w);
    }
    a.B_zero = a.B < 1e-12;
    return a;
}

// ---------------------------------------------------------------------------

struct CriticalOptions {
    double tol = 1e-11;
    int max_iter = 50;
    int scan_nodes = 256;
};

struct CriticalPoints {
    double s_plus = 0, s_minus = 0;
    ScaledReal d2_plus, d2_minus;  // d^2 L / ds^2 at the two points
    bool used_fallback = false;
};

namespace detail {

inline double wrap(double s) {
    s = std::fmod(s, 2.0 * std::numbers::pi);
    return s < 0 ? s + 2.0 * std::numbers::pi : s;
}

// L_{>=1}(s): the s-dependent part of L
inline ScaledReal oscillating_part(const HarmonicTable& t, double alpha, double s) {
    const SeriesValue v = melnikov::series_eval(t, alpha, s);
    ScaledReal acc;
    for (std::size_t q = 1; q < v.blocks.size(); ++q) acc += v.blocks[q].value;
    return acc;
}

inline std::optional<double> newton(const HarmonicTable& t, double alpha, double s, const CriticalOptions& opt) {
    for (int it = 0; it < opt.max_iter; ++it) {
        const SeriesValue v = melnikov::series_eval(t, alpha, s);
        if (v.d_ss.is_zero()) return std::nullopt;
        const double step = (v.d_s / v.d_ss).to_double();
        if (!std::isfinite(step) || std::fabs(step) > 1.0) return std::nullopt;
        s -= step;
        if (std::fabs(step) <= opt.tol) return s;
    }
    return std::nullopt;
}

// Extremum of L on [a, b] (maximum if want_max) by golden section, then Newton polish.
inline double golden(const HarmonicTable& t, double alpha, double a, double b, bool want_max, const CriticalOptions& opt) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double s) {
        const ScaledReal v = oscillating_part(t, alpha, s);
        return want_max ? v : -v;
    };
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    ScaledReal f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-6) {
        if (f1 > f2) {
            b = x2, x2 = x1, f2 = f1;
            x1 = b - r * (b - a), f1 = f(x1);
        } else {
            a = x1, x1 = x2, f1 = f2;
            x2 = a + r * (b - a), f2 = f(x2);
        }
    }
    const double s = 0.5 * (a + b);
    const auto polished = newton(t, alpha, s, opt);
    return polished && std::fabs(*polished - s) < 1e-5 ? *polished : s;
}

}  // namespace detail

/// The two critical points of s -> L(alpha, G, s): s_plus near alpha + theta and
/// s_minus near alpha + theta + pi. Newton from those seeds; a dense scan of
/// dL/ds plus golden section when Newton fails.
inline CriticalPoints critical_points(double alpha, const HarmonicTable& t, const CriticalOptions& opt = {}) {
    const AmplitudePhase ap = amplitude_phase(alpha, t);
    if (ap.B_zero) throw CriticalPointError("critical_points: B = 0, the first harmonic in s vanishes");
    // with L(1,-1) > 0 the seed alpha + theta is a maximum
    const bool plus_is_max = t.get(1, -1).sign() > 0;
    CriticalPoints cp;
    const double seed = alpha + ap.theta;
    auto sp = detail::newton(t, alpha, seed, opt);
    auto sm = detail::newton(t, alpha, seed + std::numbers::pi, opt);
    auto d2 = [&](double s) { return melnikov::series_eval(t, alpha, s).d_ss; };
    auto good = [&](const std::optional<double>& s, bool want_max) {
        if (!s) return false;
        const ScaledReal c = d2(*s);
        return !c.is_zero() && (c.sign() < 0) == want_max;
    };
    if (!good(sp, plus_is_max) || !good(sm, !plus_is_max) ||
        std::fabs(std::remainder(*sp - *sm, 2.0 * std::numbers::pi)) < 1e-6) {
        // sign changes of dL/ds on a uniform scan bracket the extrema
        cp.used_fallback = true;
        const int M = opt.scan_nodes;
        std::vector<ScaledReal> ds(M + 1);
        for (int j = 0; j <= M; ++j) ds[j] = melnikov::series_eval(t, alpha, seed + 2.0 * std::numbers::pi * j / M).d_s;
        std::optional<double> best_max, best_min;
        ScaledReal vmax, vmin;
        for (int j = 0; j < M; ++j) {
            const int a = ds[j].sign(), b = ds[j + 1].sign();
            if (a == b || a == 0) continue;
            const double lo = seed + 2.0 * std::numbers::pi * j / M, hi = seed + 2.0 * std::numbers::pi * (j + 1) / M;
            const bool is_max = a > 0;
            const double s = detail::golden(t, alpha, lo, hi, is_max, opt);
            const ScaledReal v = detail::oscillating_part(t, alpha, s);
            if (is_max && (!best_max || v > vmax)) best_max = s, vmax = v;
            if (!is_max && (!best_min || v < vmin)) best_min = s, vmin = v;
        }
        if (!best_max || !best_min) throw CriticalPointError("critical_points: no sign change of dL/ds found");
        sp = plus_is_max ? best_max : best_min;
        sm = plus_is_max ? best_min : best_max;
    }
    cp.s_plus = detail::wrap(*sp);
    cp.s_minus = detail::wrap(*sm);
    cp.d2_plus = d2(cp.s_plus);
    cp.d2_minus = d2(cp.s_minus);
    if (cp.d2_plus.is_zero() || cp.d2_minus.is_zero() || cp.d2_plus.sign() == cp.d2_minus.sign())
        throw CriticalPointError("critical_points: degenerate second derivative");
    return cp;
}

// ---------------------------------------------------------------------------

/// L*_sign(alpha, G) = L(alpha, G, s*_sign) with its gradient. Each quantity is
/// split into the s-independent block (q = 0) and the rest, so brackets of L*_+
/// and L*_- can be formed without cancelling the common q = 0 part.
struct ReducedValue {
    double s_star = 0;
    ScaledReal value0, d_alpha0, d_G0;  // q = 0
    ScaledReal value1, d_alpha1, d_G1;  // q >= 1
    ScaledReal value() const { return value0 + value1; }
    ScaledReal d_alpha() const { return d_alpha0 + d_alpha1; }
    ScaledReal d_G() const { return d_G0 + d_G1; }
};

inline ReducedValue reduced_at(double s_star, double alpha, const HarmonicTable& t, const HarmonicTable& dt) {
    ReducedValue r;
    r.s_star = s_star;
    const SeriesValue v = melnikov::series_eval(t, alpha, s_star);
    const SeriesValue g = melnikov::series_eval(dt, alpha, s_star);
    r.value0 = v.blocks[0].value;
    r.d_alpha0 = v.blocks[0].d_alpha;
    r.d_G0 = g.blocks[0].value;
    for (std::size_t q = 1; q < v.blocks.size(); ++q) {
        r.value1 += v.blocks[q].value;
        r.d_alpha1 += v.blocks[q].d_alpha;
    }
    for (std::size_t q = 1; q < g.blocks.size(); ++q) r.d_G1 += g.blocks[q].value;
    return r;
}

/// {L*_+, L*_-} = dL*_+/dalpha dL*_-/dG - dL*_+/dG dL*_-/dalpha. The q = 0 parts
/// are common to both, so their product cancels identically and is never formed.
inline ScaledReal bracket(const ReducedValue& P, const ReducedValue& M) {
    return P.d_alpha0 * (M.d_G1 - P.d_G1) + P.d_G0 * (P.d_alpha1 - M.d_alpha1) + P.d_alpha1 * M.d_G1 - P.d_G1 * M.d_alpha1;
}

inline ReducedValue reduced_poincare(Sign sign, double alpha, double G, const TableProvider& p,
                                     const CriticalOptions& opt = {}) {
    const HarmonicTable t = p.table(G);
    const CriticalPoints cp = critical_points(alpha, t, opt);
    return reduced_at(sign == Sign::plus ? cp.s_plus : cp.s_minus, alpha, t, p.derivative(G));
}

// ---------------------------------------------------------------------------

struct MapPoint {
    double alpha = 0, G = 0, s = 0;
};

/// First-order scattering map: alpha' = alpha - mu dL*/dG, G' = G + mu dL*/dalpha.
inline MapPoint scattering_step(Sign sign, const MapPoint& x, double mu, const TableProvider& p) {
    if (mu == 0) return x;
    const ReducedValue r = reduced_poincare(sign, x.alpha, x.G, p);
    return {x.alpha - mu * r.d_G().to_double(), x.G + mu * r.d_alpha().to_double(), x.s};
}

/// det of the Jacobian of (alpha, G) -> (alpha', G') by central differences.
inline double scattering_jacobian_det(Sign sign, double alpha, double G, double mu, const TableProvider& p,
                                      double h = 1e-4) {
    const double hG = h * G;
    auto f = [&](double a, double g) { return scattering_step(sign, {a, g, 0.0}, mu, p); };
    const MapPoint ap = f(alpha + h, G), am = f(alpha - h, G), gp = f(alpha, G + hG), gm = f(alpha, G - hG);
    const double j11 = (ap.alpha - am.alpha) / (2 * h), j21 = (ap.G - am.G) / (2 * h);
    const double j12 = (gp.alpha - gm.alpha) / (2 * hG), j22 = (gp.G - gm.G) / (2 * hG);
    return j11 * j22 - j12 * j21;
}

// ---------------------------------------------------------------------------

struct Transversality {
    ScaledReal bracket;      // {L*_+, L*_-} = dL*_+/dalpha dL*_-/dG - dL*_+/dG dL*_-/dalpha
    ScaledReal normalized;   // bracket / (|grad L*_+| |grad L*_-|), the sine of the crossing angle
    ScaledReal closed_form;  // (-L1*/B^2)(3 pi p sin alpha / G^4) d
    double d_value = 0;
    double B = 0, p = 0;
};

/// d = 1 - (25/4)(eG/G^3) cos alpha - (5/48)(B^2/G)[1 + 1/(2G^3) - ((p - cos alpha)/B^2)(24 eG/G^2)]
inline double d_function(double alpha, double G, double e, double B, double p) {
    const double G3 = G * G * G, c = std::cos(alpha);
    return 1.0 - 6.25 * e * G / G3 * c - 5.0 / 48.0 * B * B / G * (1.0 + 0.5 / G3 - (p - c) / (B * B) * 24.0 * e * G / (G * G));
}

inline Transversality transversality(double alpha, double G, const TableProvider& prov, const CriticalOptions& opt = {}) {
    const HarmonicTable t = prov.table(G), dt = prov.derivative(G);
    const AmplitudePhase ap = amplitude_phase(alpha, t);
    if (ap.B_zero) throw DegenerateAmplitudeError("transversality: B = 0");
    const CriticalPoints cp = critical_points(alpha, t, opt);
    const ReducedValue P = reduced_at(cp.s_plus, alpha, t, dt), M = reduced_at(cp.s_minus, alpha, t, dt);
    Transversality tr;
    tr.bracket = bracket(P, M);
    auto norm = [](const ReducedValue& r) {
        const ScaledReal a = r.d_alpha(), g = r.d_G();
        const ScaledReal big = a.abs() > g.abs() ? a.abs() : g.abs();
        if (big.is_zero()) return big;
        const double x = (a / big).to_double(), y = (g / big).to_double();
        return big * std::hypot(x, y);
    };
    const ScaledReal n = norm(P) * norm(M);
    tr.normalized = n.is_zero() ? ScaledReal() : tr.bracket / n;
    tr.B = ap.B;
    tr.p = ap.p;
    tr.d_value = d_function(alpha, G, prov.eccentricity(), ap.B, ap.p);
    const ScaledReal L1star = 2.0 * t.get(1, -1) * ap.B;
    tr.closed_form = -L1star / (ap.B * ap.B) * (3.0 * std::numbers::pi * ap.p * std::sin(alpha) / (G * G * G * G)) * tr.d_value;
    return tr;
}

// ---------------------------------------------------------------------------

struct CurvePoint {
    double alpha = 0, G = 0;
    double level = 0;  // L* relative to its value at the start, minus 1
};

enum class CurveEnd { arc_length, closed, boundary };

struct LevelCurve {
    Sign sign = Sign::plus;
    ScaledReal level;
    std::vector<CurvePoint> points;
    CurveEnd end = CurveEnd::arc_length;
    double max_drift = 0;  // worst relative level error after correction
};

struct TraceOptions {
    double step = 0.02;     // arc length per step in the (alpha, G) plane
    double tol = 1e-8;      // relative level drift accepted after correction
    int max_corrector = 8;
    bool detect_closed = true;
    double G_lo = 0, G_hi = std::numeric_limits<double>::infinity();
    CriticalOptions critical;
};

/// Predictor-corrector continuation of L*_sign = const from start, moving in
/// the direction of the scattering map: (dalpha, dG) ~ (-dL*/dG, dL*/dalpha).
inline LevelCurve level_curve_trace(Sign sign, double alpha0, double G0, double arc_length, const TableProvider& p,
                                    const TraceOptions& opt = {}) {
    const double lo = std::max(opt.G_lo, p.G_min()), hi = std::min(opt.G_hi, p.G_max());
    auto eval = [&](double a, double g) { return reduced_poincare(sign, a, g, p, opt.critical); };
    auto direction = [&](const ReducedValue& r, double& ta, double& tg, double& gnorm2) {
        const ScaledReal da = r.d_alpha(), dg = r.d_G();
        const ScaledReal big = da.abs() > dg.abs() ? da.abs() : dg.abs();
        if (big.is_zero()) throw CriticalPointError("level_curve_trace: gradient of L* vanishes");
        const double x = (da / big).to_double(), y = (dg / big).to_double();
        const double n = std::hypot(x, y);
        ta = -y / n, tg = x / n;
        gnorm2 = n * n;
    };
    LevelCurve c;
    c.sign = sign;
    ReducedValue r = eval(alpha0, G0);
    c.level = r.value();
    c.points.push_back({alpha0, G0, 0.0});
    double a = alpha0, g = G0, travelled = 0;
    while (travelled < arc_length - 1e-15) {
        const double h = std::min(opt.step, arc_length - travelled);
        double ta, tg, n2;
        direction(r, ta, tg, n2);
        // midpoint predictor
        double tm_a, tm_g;
        const ReducedValue rm = eval(a + 0.5 * h * ta, g + 0.5 * h * tg);
        direction(rm, tm_a, tm_g, n2);
        double na = a + h * tm_a, ng = g + h * tm_g;
        if (ng < lo || ng > hi) {
            c.end = CurveEnd::boundary;
            break;
        }
        // Newton along the gradient back onto the level set
        double drift = 0;
        for (int it = 0; it <= opt.max_corrector; ++it) {
            r = eval(na, ng);
            const ScaledReal miss = r.value() - c.level;
            drift = (miss / c.level).abs().to_double();
            if (drift <= 1e-3 * opt.tol || it == opt.max_corrector) break;
            const ScaledReal da = r.d_alpha(), dg = r.d_G();
            const ScaledReal n2s = da * da + dg * dg;
            na -= (miss * da / n2s).to_double();
            ng -= (miss * dg / n2s).to_double();
        }
        if (drift > opt.tol)
            throw AccuracyError("level_curve_trace: corrector did not restore the level", drift);
        c.max_drift = std::max(c.max_drift, drift);
        a = na, g = ng;
        travelled += h;
        c.points.push_back({a, g, ((r.value() - c.level) / c.level).to_double()});
        if (opt.detect_closed && travelled > 4 * opt.step) {
            const double da = std::remainder(a - alpha0, 2.0 * std::numbers::pi);
            if (std::hypot(da, g - G0) < 0.5 * opt.step) {
                c.end = CurveEnd::closed;
                break;
            }
        }
    }
    return c;
}

}  // namespace ertbp::scattering
