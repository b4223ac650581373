#include <doctest.h>

#include <cmath>
#include <numbers>

#include <ertbp/scattering.hpp>

using namespace ertbp;
using namespace ertbp::scattering;
using melnikov::HarmonicTable;
using std::numbers::pi;

namespace {

HarmonicTable two_harmonics(double p) {
    HarmonicTable t;
    t.set(0, 0, ScaledReal(0.3));
    t.set(1, -1, ScaledReal(0.5));
    t.set(1, -2, ScaledReal(-0.5 * p));
    return t;
}

auto builder(double e, int q_max, int k_max) {
    return [=](double G) { return melnikov::compute_table(G, e, q_max, k_max); };
}

// Shared providers; each costs a few table builds.
const ChebyshevProvider& cheb_e002() {
    static const ChebyshevProvider p(0.02, 2.9, 3.1, 8, builder(0.02, 5, 10));
    return p;
}

const ChebyshevProvider& cheb_circular() {
    static const ChebyshevProvider p(0.0, 2.9, 3.1, 8, builder(0.0, 5, 10));
    return p;
}

double scan_value(const HarmonicTable& t, double alpha, double s) { return melnikov::series_eval(t, alpha, s).to_double(); }

}  // namespace

TEST_CASE("amplitude and phase of the first s-harmonic") {
    for (double p : {0.0, 0.3, 0.9}) {
        const HarmonicTable t = two_harmonics(p);
        for (double a : {0.1, 1.0, 2.5, -2.0}) {
            const AmplitudePhase ap = amplitude_phase(a, t);
            CHECK(ap.p == doctest::Approx(p));
            // with only L(1,-1) and L(1,-2) the truncation is exact
            CHECK(ap.B == doctest::Approx(ap.B_hat).epsilon(1e-14));
            CHECK(std::remainder(ap.theta - ap.theta_hat, 2 * pi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
            const AmplitudePhase am = amplitude_phase(-a, t);
            CHECK(am.B == doctest::Approx(ap.B).epsilon(1e-14));
            CHECK(am.theta == doctest::Approx(-ap.theta).scale(1.0).epsilon(1e-14));
        }
    }
    const AmplitudePhase z = amplitude_phase(0.0, two_harmonics(1.0));
    CHECK(z.B_zero);
    CHECK_THROWS_AS(critical_points(0.0, two_harmonics(1.0)), CriticalPointError);

    HarmonicTable none;
    none.set(0, 0, ScaledReal(1.0));
    none.set(1, 0, ScaledReal(0.1));
    CHECK_THROWS_AS(amplitude_phase(0.5, none), DegenerateAmplitudeError);
}

TEST_CASE("critical points of a pure cosine") {
    const HarmonicTable t = two_harmonics(0.0);
    for (double a : {0.0, 1.0, 3.0, 5.5}) {
        const CriticalPoints cp = critical_points(a, t);
        CHECK(std::remainder(cp.s_plus - a, 2 * pi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
        CHECK(std::remainder(cp.s_minus - a - pi, 2 * pi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
        CHECK(cp.d2_plus.sign() < 0);
        CHECK(cp.d2_minus.sign() > 0);
        CHECK_FALSE(cp.used_fallback);
    }
}

TEST_CASE("critical points are the global extrema found by a scan") {
    const HarmonicTable t = cheb_e002().table(3.0);
    for (double a : {0.0, 0.7, 2.0, 3.1, 4.4, 6.0}) {
        const CriticalPoints cp = critical_points(a, t);
        double hi = -1e300, lo = 1e300;
        for (int j = 0; j < 4096; ++j) {
            const double v = scan_value(t, a, 2 * pi * j / 4096);
            hi = std::max(hi, v), lo = std::min(lo, v);
        }
        CAPTURE(a);
        CHECK(scan_value(t, a, cp.s_plus) >= hi - 1e-14);
        CHECK(scan_value(t, a, cp.s_minus) <= lo + 1e-14);
        CHECK(std::fabs(melnikov::series_eval(t, a, cp.s_plus).d_s.to_double()) < 1e-12);
        CHECK(std::fabs(melnikov::series_eval(t, a, cp.s_minus).d_s.to_double()) < 1e-12);
        CHECK(cp.s_plus >= 0);
        CHECK(cp.s_plus < 2 * pi);
    }
}

TEST_CASE("critical points do not depend on the scale of the table") {
    const HarmonicTable t = cheb_e002().table(3.05);
    for (double a : {0.4, 2.2, 5.0}) {
        const CriticalPoints c1 = critical_points(a, t), c2 = critical_points(a, t.scaled(2.5));
        CHECK(c2.s_plus == doctest::Approx(c1.s_plus).epsilon(1e-12));
        CHECK(c2.s_minus == doctest::Approx(c1.s_minus).epsilon(1e-12));
    }
}

TEST_CASE("Chebyshev provider reproduces the series tables") {
    const double G = 3.037;
    const HarmonicTable direct = melnikov::compute_table(G, 0.02, 5, 10);
    const HarmonicTable interp = cheb_e002().table(G);
    for (auto key : {std::pair{0, 0}, {0, 1}, {1, -1}, {1, -2}, {2, -2}}) {
        CAPTURE(key.first);
        CAPTURE(key.second);
        CHECK(relative_difference(interp.at(key.first, key.second), direct.at(key.first, key.second)) < 1e-9);
    }
    // derivative against a difference of series tables
    const double h = 1e-4;
    const HarmonicTable tp = melnikov::compute_table(G + h, 0.02, 5, 10), tm = melnikov::compute_table(G - h, 0.02, 5, 10);
    for (auto key : {std::pair{0, 0}, {1, -1}}) {
        const double fd = ((tp.at(key.first, key.second) - tm.at(key.first, key.second)) / (2 * h)).to_double();
        CHECK(cheb_e002().derivative(G).at(key.first, key.second).to_double() == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_THROWS_AS(cheb_e002().table(3.2), RangeError);
    CHECK_THROWS_AS(ChebyshevProvider(0.02, 3.0, 3.0, 4, builder(0.02, 1, 2)), DomainError);
}

TEST_CASE("reduced Poincare function") {
    const auto& p = cheb_e002();
    SUBCASE("even in alpha") {
        for (double a : {0.3, 1.7, 2.9})
            for (Sign s : {Sign::plus, Sign::minus}) {
                const ReducedValue r1 = reduced_poincare(s, a, 3.0, p), r2 = reduced_poincare(s, -a, 3.0, p);
                CHECK(relative_difference(r1.value(), r2.value()) < 1e-12);
                CHECK(relative_difference(r1.d_alpha(), -r2.d_alpha()) < 1e-8);
                CHECK(relative_difference(r1.d_G(), r2.d_G()) < 1e-10);
            }
    }
    SUBCASE("maximum above minimum") {
        for (double a : {0.3, 1.7, 4.0}) {
            const ReducedValue P = reduced_poincare(Sign::plus, a, 3.0, p), M = reduced_poincare(Sign::minus, a, 3.0, p);
            CHECK(P.value() > M.value());
            CHECK(P.value0 == M.value0);
        }
    }
    SUBCASE("alpha derivative by differences") {
        const double a = 1.1, h = 1e-5;
        const ReducedValue r = reduced_poincare(Sign::plus, a, 3.0, p);
        const double fd = ((reduced_poincare(Sign::plus, a + h, 3.0, p).value() -
                            reduced_poincare(Sign::plus, a - h, 3.0, p).value()) /
                           (2 * h))
                              .to_double();
        CHECK(r.d_alpha().to_double() == doctest::Approx(fd).epsilon(1e-6));
        const double hG = 1e-5;
        const double fdG = ((reduced_poincare(Sign::plus, a, 3.0 + hG, p).value() -
                             reduced_poincare(Sign::plus, a, 3.0 - hG, p).value()) /
                            (2 * hG))
                               .to_double();
        CHECK(r.d_G().to_double() == doctest::Approx(fdG).epsilon(1e-6));
    }
    SUBCASE("circular problem: no alpha dependence") {
        const auto& c = cheb_circular();
        const ReducedValue r0 = reduced_poincare(Sign::plus, 0.2, 3.0, c);
        for (double a : {0.9, 2.4, 5.1}) {
            const ReducedValue r = reduced_poincare(Sign::plus, a, 3.0, c);
            CHECK(relative_difference(r.value(), r0.value()) < 1e-12);
            CHECK(r.d_alpha().abs() <= r.value1.abs() * 1e-9);
        }
    }
}

TEST_CASE("transversality") {
    const auto& p = cheb_e002();
    for (double a : {0.5, 1.5, 2.5}) {
        const Transversality t1 = transversality(a, 3.0, p), t2 = transversality(-a, 3.0, p);
        CAPTURE(a);
        CHECK(relative_difference(t1.bracket, -t2.bracket) < 1e-7);
        CHECK(std::fabs(t1.normalized.to_double()) <= 1.0);
        CHECK_FALSE(t1.bracket.is_zero());
    }
    // at alpha = 0 both gradients are parallel to the G axis
    CHECK(std::fabs(transversality(0.0, 3.0, p).normalized.to_double()) < 1e-8);
    // circular problem: both L* depend on G alone
    CHECK(std::fabs(transversality(1.0, 3.0, cheb_circular()).normalized.to_double()) < 1e-8);
    CHECK(d_function(1.0, 3.0, 0.0, 1.0, 0.0) == doctest::Approx(1.0 - 5.0 / 144.0 * (1.0 + 1.0 / 54.0)));
}

TEST_CASE("scattering map") {
    const auto& p = cheb_e002();
    const MapPoint x{1.0, 3.0, 0.4};
    const MapPoint y = scattering_step(Sign::plus, x, 0.0, p);
    CHECK(y.alpha == x.alpha);
    CHECK(y.G == x.G);

    const ReducedValue r = reduced_poincare(Sign::minus, 1.0, 3.0, p);
    const MapPoint z = scattering_step(Sign::minus, x, 1e-3, p);
    CHECK(z.alpha == doctest::Approx(1.0 - 1e-3 * r.d_G().to_double()));
    CHECK(z.G == doctest::Approx(3.0 + 1e-3 * r.d_alpha().to_double()));

    // the first-order map is symplectic up to O(mu^2)
    const double mu = 0.5;
    const double d1 = scattering_jacobian_det(Sign::plus, 1.0, 3.0, mu, p) - 1.0;
    const double d2 = scattering_jacobian_det(Sign::plus, 1.0, 3.0, mu / 2, p) - 1.0;
    CAPTURE(d1);
    CAPTURE(d2);
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("level curves") {
    SUBCASE("horizontal in the circular problem") {
        TraceOptions o;
        o.step = 0.1;
        const LevelCurve c = level_curve_trace(Sign::plus, 0.5, 3.0, 1.0, cheb_circular(), o);
        CHECK(c.points.size() == 11);
        for (const auto& pt : c.points) CHECK(pt.G == doctest::Approx(3.0).epsilon(1e-9));
        // alpha increases since dL*/dG < 0
        CHECK(c.points.back().alpha == doctest::Approx(1.5).epsilon(1e-9));
    }
    SUBCASE("rotational curve closes after one turn") {
        TraceOptions o;
        o.step = 0.05;
        const LevelCurve c = level_curve_trace(Sign::plus, 1.0, 3.0, 10.0, cheb_e002(), o);
        REQUIRE(c.end == CurveEnd::closed);
        CHECK(c.max_drift <= o.tol);
        // quadratic interpolation of G at the starting alpha over the last three points
        const std::size_t n = c.points.size();
        double u[3], g[3];
        for (int i = 0; i < 3; ++i) {
            u[i] = std::remainder(c.points[n - 3 + i].alpha - 1.0, 2 * pi);
            g[i] = c.points[n - 3 + i].G;
        }
        REQUIRE(u[1] * u[2] <= 0);
        double G_back = 0;
        for (int i = 0; i < 3; ++i) {
            double w = g[i];
            for (int j = 0; j < 3; ++j)
                if (j != i) w *= -u[j] / (u[i] - u[j]);
            G_back += w;
        }
        CHECK(std::fabs(G_back - 3.0) < 1e-6);
    }
    SUBCASE("leaving the provider range") {
        TraceOptions o;
        o.G_hi = 3.0005;
        o.step = 0.05;
        o.detect_closed = false;
        const LevelCurve c = level_curve_trace(Sign::plus, 1.0, 3.0, 10.0, cheb_e002(), o);
        // the curve oscillates in G, so it either stays or stops at the boundary
        if (c.end == CurveEnd::boundary) CHECK(c.points.back().G <= 3.0005);
        for (const auto& pt : c.points) CHECK(pt.G <= 3.0005);
    }
}
