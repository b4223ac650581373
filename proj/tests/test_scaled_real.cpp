#include <doctest.h>

#include <cmath>
#include <random>

#include <ertbp/scaled_real.hpp>

using ertbp::ScaledReal;

TEST_CASE("normalization keeps the mantissa in [0.5, 1)") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> M(-1e6, 1e6), L(-5e4, 5e4);
    for (int i = 0; i < 1000; ++i) {
        const ScaledReal v(M(rng), L(rng));
        if (v.is_zero()) continue;
        CHECK(std::fabs(v.mantissa()) >= 0.5);
        CHECK(std::fabs(v.mantissa()) < 1.0);
    }
    const ScaledReal z(0.0, 123.0);
    CHECK(z.is_zero());
    CHECK(z.log_factor() == 0.0);
}

TEST_CASE("round trip through double") {
    for (double x : {1.0, -3.5, -2.0e-5}) CHECK(ScaledReal(x).to_double() == doctest::Approx(x).epsilon(1e-15));
    // extreme magnitudes carry a log factor of several hundred
    for (double x : {1e-300, 7.25e200}) CHECK(ScaledReal(x).to_double() == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("values far outside double range") {
    const double G = 32.0, G3 = G * G * G;
    const ScaledReal a = ScaledReal::exp(-G3 / 3.0);
    CHECK(a.to_double() == 0.0);  // underflows as a double
    CHECK(a.log_abs() == doctest::Approx(-G3 / 3.0).epsilon(1e-15));
    const ScaledReal b = a * a;
    CHECK(b.log_abs() == doctest::Approx(-2.0 * G3 / 3.0).epsilon(1e-15));
    CHECK((b / a).log_abs() == doctest::Approx(-G3 / 3.0).epsilon(1e-15));
    CHECK(a > b);
    CHECK(-a < b);
    // the smaller term is lost below one ulp of the larger
    CHECK((a + b) == a);
}

TEST_CASE("arithmetic agrees with doubles in range") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-100.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = U(rng), y = U(rng);
        const ScaledReal a(x), b(y);
        CHECK((a + b).to_double() == doctest::Approx(x + y).epsilon(1e-13).scale(std::fabs(x) + std::fabs(y)));
        CHECK((a - b).to_double() == doctest::Approx(x - y).epsilon(1e-13).scale(std::fabs(x) + std::fabs(y)));
        // the log factor adds a few ulp when converting back
        CHECK((a * b).to_double() == doctest::Approx(x * y).epsilon(4e-15));
        CHECK((a / b).to_double() == doctest::Approx(x / y).epsilon(4e-15));
        CHECK((a < b) == (x < y));
        CHECK((a.abs()).to_double() == doctest::Approx(std::fabs(x)));
        CHECK(a.sign() == (x > 0) - (x < 0));
    }
}

TEST_CASE("comparison is independent of the split between mantissa and log factor") {
    const ScaledReal a(3.0, -1000.0), b(3.0 * std::exp(-5.0), -995.0);
    // a log factor of size L is itself rounded to about L ulp
    CHECK(relative_difference(a, b) < 1000 * 4e-16);
    CHECK(relative_difference(ScaledReal(), ScaledReal()) == 0.0);
    CHECK(relative_difference(ScaledReal(1.0), ScaledReal(2.0)) == doctest::Approx(0.5));
}

TEST_CASE("to_double_scaled factors out a common scale") {
    const ScaledReal v(0.75, -20000.0);
    CHECK(v.to_double_scaled(-20000.0) == doctest::Approx(0.75));
    CHECK(ScaledReal().to_double_scaled(5.0) == 0.0);
}
