#include <doctest.h>

#include <cmath>
#include <random>

#include <ertbp/kepler.hpp>

#include "oracle_values.hpp"

using namespace ertbp;
using kepler::pi;

TEST_CASE("solve_kepler satisfies the Kepler equation") {
    CHECK(kepler::solve_kepler(0.0, 0.3) == 0.0);
    CHECK(kepler::solve_kepler(pi, 0.3) == doctest::Approx(pi).epsilon(1e-15));
    CHECK(kepler::solve_kepler(1.0, 0.1) == doctest::Approx(oracle::kepler_E_t1_e01).epsilon(1e-15));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> T(-20.0, 20.0), Ecc(0.0, 0.95);
    for (int i = 0; i < 500; ++i) {
        const double t = T(rng), e = Ecc(rng);
        const double E = kepler::solve_kepler(t, e);
        CHECK(std::fabs(E - e * std::sin(E) - t) <= 1e-13);
        // E - t is odd and 2 pi periodic
        CHECK(kepler::solve_kepler(-t, e) == doctest::Approx(-E).epsilon(1e-14));
        CHECK(kepler::solve_kepler(t + kepler::two_pi, e) - kepler::two_pi == doctest::Approx(E).epsilon(1e-13));
    }
}

TEST_CASE("solve_kepler rejects eccentricities outside [0,1)") {
    CHECK_THROWS_AS(kepler::solve_kepler(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(kepler::solve_kepler(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(kepler::anomalies(1.0, 1.5), DomainError);
}

TEST_CASE("anomalies") {
    SUBCASE("circular orbit") {
        for (double t : {-3.0, 0.2, 1.0, 5.5}) {
            const auto a = kepler::anomalies(t, 0.0);
            CHECK(a.E == doctest::Approx(t));
            CHECK(a.f == doctest::Approx(t));
            CHECK(a.r == 1.0);
        }
    }
    SUBCASE("apoapsis") {
        const auto a = kepler::anomalies(pi, 0.2);
        CHECK(a.f == doctest::Approx(pi).epsilon(1e-14));
        CHECK(a.r == doctest::Approx(1.2).epsilon(1e-14));
    }
    SUBCASE("frozen reference at t = 0.7, e = 0.05") {
        const auto a = kepler::anomalies(0.7, 0.05);
        CHECK(std::fabs(a.E - oracle::anom_E_t07_e005) < 1e-14);
        CHECK(std::fabs(a.f - oracle::anom_f_t07_e005) < 1e-12);
        CHECK(std::fabs(a.r - oracle::anom_r_t07_e005) < 1e-12);
        CHECK(std::fabs(kepler::true_anomaly_ode(0.7, 0.05) - a.f) < 1e-12);
    }
    SUBCASE("invariants") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> T(-10.0, 10.0), Ecc(0.0, 0.9);
        for (int i = 0; i < 300; ++i) {
            const double t = T(rng), e = Ecc(rng);
            const auto a = kepler::anomalies(t, e);
            CHECK(std::fabs(a.r - kepler::radius_from_true_anomaly(a.f, e)) <= 1e-12);
            CHECK(a.r >= 1 - e - 1e-15);
            CHECK(a.r <= 1 + e + 1e-15);
            const auto b = kepler::anomalies(-t, e);
            CHECK(b.f == doctest::Approx(-a.f).epsilon(1e-13));
            CHECK(b.r == doctest::Approx(a.r).epsilon(1e-14));
        }
    }
}

TEST_CASE("fourier_c: Kronecker delta at e = 0") {
    for (int q = -3; q <= 3; ++q)
        for (int n = 0; n <= 6; ++n)
            for (int m = -3; m <= 3; ++m) CHECK(kepler::fourier_c(q, n, m, 0.0) == (q == m ? 1.0 : 0.0));
    // the quadrature path itself, at an eccentricity too small to matter
    CHECK(kepler::fourier_c(2, 3, 2, 1e-300) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(kepler::fourier_c(2, 3, 1, 1e-300)) < 1e-12);
}

TEST_CASE("fourier_c: closed forms and frozen references") {
    CHECK(kepler::fourier_c(0, 2, 0, 0.1) == doctest::Approx(1.015).epsilon(1e-13));
    CHECK(kepler::fourier_c(1, 3, 1, 0.05) == doctest::Approx(oracle::c_1_3_1_e005).epsilon(1e-13));
    CHECK(kepler::fourier_c(1, 2, 2, 0.05) == doctest::Approx(oracle::c_1_2_2_e005).epsilon(1e-13));
    CHECK(kepler::fourier_c(2, 4, 0, 0.1) == doctest::Approx(oracle::c_2_4_0_e01).epsilon(1e-12));
    // r^{n+1} averaged over E: int (1 - e cos E)^2 = 1 + e^2/2
    CHECK(kepler::fourier_c(0, 1, 0, 0.3) == doctest::Approx(1.045).epsilon(1e-13));
}

TEST_CASE("fourier_c: symmetry c_{-q}^{n,-m} = c_q^{n,m}") {
    for (double e : {0.01, 0.1, 0.3})
        for (int q = 0; q <= 3; ++q)
            for (int n = 0; n <= 5; ++n)
                for (int m = -3; m <= 3; ++m)
                    CHECK(std::fabs(kepler::fourier_c(-q, n, -m, e) - kepler::fourier_c(q, n, m, e)) <= 1e-13);
}

TEST_CASE("fourier_c: bound holds on the audit grid") {
    for (double e : {0.01, 0.1, 0.3})
        for (int q = 0; q <= 3; ++q)
            for (int n = 0; n <= 8; ++n)
                for (int m = -4; m <= 4; ++m) {
                    if (m > n + 1) continue;
                    CHECK(std::fabs(kepler::fourier_c(q, n, m, e)) <= kepler::bound_c(q, n, m, e));
                }
    CHECK_THROWS_AS(kepler::bound_c(1, 1, 3, 0.1), DomainError);
}

TEST_CASE("fourier_c: leading behaviour for small e") {
    for (double e : {0.01, 0.05, 0.1}) {
        const double cap = 98 * e * e;
        CHECK(std::fabs(kepler::fourier_c(1, 3, 1, e) - 1.0) <= cap);
        CHECK(std::fabs(kepler::fourier_c(1, 2, 2, e) + 3 * e) <= cap);
        CHECK(std::fabs(kepler::fourier_c(0, 2, 0, e) - 1.0) <= cap);
        CHECK(std::fabs(kepler::fourier_c(0, 3, 1, e) + 2.5 * e) <= cap);
    }
}

TEST_CASE("fourier_c: errors") {
    CHECK_THROWS_AS(kepler::fourier_c(1, 1, 1, 0.1, 0.0), DomainError);
    CHECK_THROWS_AS(kepler::fourier_c(1, 1, 1, 1.0), DomainError);
}
