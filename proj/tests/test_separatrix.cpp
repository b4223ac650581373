#include <doctest.h>

#include <cmath>

#include <ertbp/dynamics.hpp>
#include <ertbp/separatrix.hpp>

#include "oracle_values.hpp"

using namespace ertbp;

TEST_CASE("tau_of_t") {
    CHECK(separatrix::tau_of_t(0.0, 2.0) == 0.0);
    for (double G : {0.5, 1.0, 2.0, 8.0, 32.0}) {
        const double t1 = 0.5 * G * G * G * (4.0 / 3.0);
        CHECK(separatrix::tau_of_t(t1, G) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const double tau = separatrix::tau_of_t(10.0, 2.0);
    CHECK(tau == doctest::Approx(oracle::tau_t10_G2).epsilon(1e-15));
    CHECK(std::fabs(separatrix::t_of_tau(tau, 2.0) - 10.0) <= 1e-13 * 10.0);
    // odd and increasing
    double prev = -1e300;
    for (double t = -1e6; t <= 1e6; t += 1e6 / 37) {
        const double v = separatrix::tau_of_t(t, 1.5);
        CHECK(v > prev);
        CHECK(separatrix::tau_of_t(-t, 1.5) == doctest::Approx(-v).epsilon(1e-15));
        prev = v;
    }
    CHECK_THROWS_AS(separatrix::tau_of_t(1.0, 0.0), DomainError);
}

TEST_CASE("homoclinic_state lies on H0 = 0") {
    for (double G : {0.5, 1.0, 2.0, 8.0, 32.0})
        for (double tau = -50; tau <= 50; tau += 0.25) {
            separatrix::SeparatrixParams p{0.7, G, 0.1, 0.0};
            const auto z = separatrix::homoclinic_state_tau(tau, separatrix::t_of_tau(tau, G), p);
            const double scale = z.x * z.x;  // each term of H0 is O(x^2)
            CHECK(std::fabs(dynamics::H0(z)) <= 1e-12 * std::max(scale, 1e-300) + 1e-300);
        }
}

TEST_CASE("homoclinic_state: apex, asymptotics and symmetries") {
    separatrix::SeparatrixParams p{0.4, 2.0, 0.3, 0.0};
    const auto z0 = separatrix::homoclinic_state(0.0, p);
    CHECK(z0.x == doctest::Approx(1.0));
    CHECK(z0.y == 0.0);
    CHECK(z0.alpha == doctest::Approx(0.4 + std::numbers::pi));
    CHECK(z0.s == doctest::Approx(0.3));
    const auto far = separatrix::homoclinic_state(1e9, p);
    CHECK(far.x == doctest::Approx(separatrix::x_asymptotic(1e9)).epsilon(1e-5));
    // x, y do not depend on alpha*, s*
    separatrix::SeparatrixParams q{2.0, 2.0, -1.0, 0.0};
    const auto a = separatrix::homoclinic_state(3.0, p), b = separatrix::homoclinic_state(3.0, q);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.alpha - p.alpha_star == doctest::Approx(b.alpha - q.alpha_star));
    // sigma shifts the orbit in time
    separatrix::SeparatrixParams r = p;
    r.sigma = 1.5;
    CHECK(separatrix::homoclinic_state(2.0, r).x == doctest::Approx(separatrix::homoclinic_state(3.5, p).x).epsilon(1e-15));
}

TEST_CASE("the separatrix solves the mu = 0 equations") {
    for (double G : {1.0, 2.0, 8.0}) {
        separatrix::SeparatrixParams p{0.2, G, 0.0, 0.0};
        for (double tau = -10; tau <= 10; tau += 0.5) {
            const double t = separatrix::t_of_tau(tau, G);
            const double h = 1e-4 * std::max(1.0, std::fabs(t));
            const auto zp = separatrix::homoclinic_state(t + h, p), zm = separatrix::homoclinic_state(t - h, p);
            const auto d = dynamics::vector_field(separatrix::homoclinic_state(t, p), dynamics::Params{0.0, 0.0});
            // residual relative to the size of the field
            const double scale = std::max({std::fabs(d.dx), std::fabs(d.dy), std::fabs(d.dalpha), 1e-3});
            CHECK(std::fabs((zp.x - zm.x) / (2 * h) - d.dx) <= 1e-7 * scale);
            CHECK(std::fabs((zp.y - zm.y) / (2 * h) - d.dy) <= 1e-7 * scale);
            CHECK(std::fabs((zp.alpha - zm.alpha) / (2 * h) - d.dalpha) <= 1e-7 * scale);
        }
    }
}
