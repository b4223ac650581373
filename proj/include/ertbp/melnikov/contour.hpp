#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "../errors.hpp"
#include "../scaled_real.hpp"
#include "quadrature.hpp"

namespace ertbp::melnikov {

using cplx = std::complex<double>;

struct ContourSpec {
    double epsilon = 0;   // arc radius; <= 0 selects a radius adapted to (q, m, n, G)
    double u_max = 0;     // end of the u-line integral; <= 0 selects the default
    int arc_nodes = 0;    // unused by the adaptive rules, kept for reproducibility records
    int line_nodes = 0;
    double rel_tol = 1e-13;

    // Minimizes eps^{-2m} (2-eps)^{-2n} e^{A(eps^2 - eps^3/3)}, the integrand size at
    // the bottom of the arc, over [min(0.02, G^{-3/2}), 0.9]. For small m and n this is close to
    // G^{-3/2}; a fixed radius loses digits to cancellation once m or n is large.
    double eps_for(double G, int q = 1, int m = 0, int n = 0) const {
        if (epsilon > 0) return epsilon;
        const double A = 0.5 * q * G * G * G;
        auto slope = [&](double e) { return -2.0 * m / e + 2.0 * n / (2.0 - e) + A * (2.0 * e - e * e); };
        double lo = std::min(0.02, std::pow(G, -1.5)), hi = 0.9;
        if (slope(lo) >= 0) return lo;
        if (slope(hi) <= 0) return hi;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (slope(mid) < 0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

/// binom(-1/2, m) = (-1)^m (2m)! / (4^m (m!)^2)
inline double binom_minus_half(int m) {
    double b = 1.0;
    for (int j = 1; j <= m; ++j) b *= -(2.0 * j - 1.0) / (2.0 * j);
    return b;
}

namespace contour {

// z^n by repeated squaring; std::pow goes through exp(n log z), whose phase
// error grows like n ulps.
inline cplx ipow(cplx z, int n) {
    if (n < 0) return 1.0 / ipow(z, -n);
    cplx r = 1.0;
    while (n) {
        if (n & 1) r *= z;
        z *= z;
        n >>= 1;
    }
    return r;
}

// Steepest-descent branch through tau = i: tau+ = xi + i*eta with eta = sqrt(1 + xi^2/3).
struct BranchPoint {
    double xi;
    double eta;
    double eta_m1;  // eta - 1 without cancellation
    double u;       // real value of u along the branch
    double du_dxi;
};

inline BranchPoint branch_point(double xi) {
    BranchPoint b;
    b.xi = xi;
    const double x2 = xi * xi;
    b.eta = std::sqrt(1.0 + x2 / 3.0);
    b.eta_m1 = (x2 / 3.0) / (b.eta + 1.0);
    const double P = (2.0 * b.eta + 1.0) * (2.0 * b.eta + 1.0) / (b.eta + 1.0);
    b.u = (2.0 / 9.0) * x2 * P;
    const double dP = (2.0 * b.eta + 1.0) * (2.0 * b.eta + 3.0) / ((b.eta + 1.0) * (b.eta + 1.0));
    b.du_dxi = (2.0 / 9.0) * (2.0 * xi * P + x2 * dP * xi / (3.0 * b.eta));
    return b;
}

/// u(tau) = (tau - i)^2 - (i/3)(tau - i)^3
inline cplx u_of_tau(cplx tau) {
    const cplx w = tau - cplx(0, 1);
    return w * w - cplx(0, 1.0 / 3.0) * w * w * w;
}

/// Inverse of u along the right branch: Newton on log u(xi) = log u.
inline double xi_of_u(double u) {
    if (!(u > 0)) throw ContourError("branch inversion needs u > 0", u);
    double xi = u < 1 ? std::sqrt(u) : std::cbrt(9.0 * std::sqrt(3.0) * u / 8.0);
    double lo = 0, hi = std::max(2.0 * xi, 1.0);
    while (branch_point(hi).u < u) hi *= 2;
    const double lu = std::log(u);
    for (int it = 0; it < 100; ++it) {
        const BranchPoint b = branch_point(xi);
        const double F = std::log(b.u) - lu;
        if (F < 0) lo = xi; else hi = xi;
        if (std::fabs(F) < 1e-15) return xi;
        double next = xi - F / (b.du_dxi / b.u);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - xi) <= 1e-16 * xi) return next;
        xi = next;
    }
    const double res = std::fabs(std::log(branch_point(xi).u) - lu);
    if (res > 1e-12) throw ContourError("branch inversion did not converge", u);
    return xi;
}

inline cplx tau_plus_of_u(double u) {
    const BranchPoint b = branch_point(xi_of_u(u));
    return {b.xi, b.eta};
}

// Angle above the horizontal of the branch point at distance eps from i.
inline double theta_eps(double eps) { return std::asin(eps / (3.0 + std::sqrt(9.0 + 4.0 * eps * eps))); }

// Abscissa of C_eps (the branch point with |tau - i| = eps).
inline double xi_of_eps(double eps) {
    const double d = eps * std::sin(theta_eps(eps));
    return std::sqrt(3.0 * d * (d + 2.0));
}

struct Pieces {
    double line = 0;       // scaled line contribution (real)
    cplx arc{};            // scaled arc contribution
    double log_scale = 0;  // pieces are multiplied by exp(log_scale)
    double err = 0;
    double tail_bound = 0;
};

// Both u-lines and the arc, with the common factor exp(-q G^3/3) removed and
// every integrand multiplied by eps^{2m+1}.
inline Pieces contour_pieces(int q, int m, int n, double G, const ContourSpec& spec) {
    const double A = 0.5 * q * G * G * G;
    const double eps = spec.eps_for(G, q, m, n);
    const double th = theta_eps(eps);
    const double xiC = xi_of_eps(eps);
    const double uC = branch_point(xiC).u;
    const double u_max = spec.u_max > 0 ? spec.u_max : std::max(80.0 / (q * G * G * G), uC * 1e6);
    const double xi_max = xi_of_u(u_max);
    const double tol = spec.rel_tol;

    Pieces out;
    out.log_scale = (2 * m + 1) * std::log(eps);

    auto scaled_F = [&](const BranchPoint& b) {
        const cplx w(b.xi, b.eta_m1);
        const cplx z(b.xi, b.eta + 1.0);
        return ipow(eps / w, 2 * m + 1) / ipow(z, 2 * n + 1);
    };

    auto arc_integrand = [&](double theta) {
        const cplx e_it = std::polar(1.0, theta);
        const cplx w = eps * e_it;
        const cplx z = cplx(0, 2) + w;
        const cplx u = w * w - cplx(0, 1.0 / 3.0) * w * w * w;
        // eps^{2m+1} / w^{2m} * i w = i eps^2 e^{-i(2m-1) theta}; the phase is
        // split with fma because its rounding error is otherwise ~m ulps
        const double k2 = 2.0 * m - 1.0;
        const double ph = k2 * theta, ph_lo = std::fma(k2, theta, -ph);
        const cplx kernel = cplx(0, eps * eps) * std::polar(1.0, -ph) * cplx(1.0, -ph_lo);
        return kernel * std::exp(-A * u) / ipow(z, 2 * n);
    };
    const double pi = std::numbers::pi;
    const double a0 = pi - th, a1 = 2.0 * pi + th;
    // split at the bottom of the circle and at quarter turns for the adaptive rule
    const std::vector<double> cuts{a0, pi, 1.25 * pi, 1.5 * pi, 1.75 * pi, 2.0 * pi, a1};
    const auto arc = quad::adaptive(arc_integrand, cuts, tol);
    out.arc = arc.value;
    out.err += arc.error;

    // xi = xiC * exp(s)
    auto line_integrand = [&](double s) {
        const double xi = xiC * std::exp(s);
        const BranchPoint b = branch_point(xi);
        return 2.0 * scaled_F(b).imag() * std::exp(-A * (b.u - uC)) * b.du_dxi * xi;
    };
    const double s_max = std::log(xi_max / xiC);
    const double s_end = std::min(s_max, std::log(xi_of_u(uC + 50.0 / A) / xiC));
    std::vector<double> cuts_line{0.0, s_end / 64, s_end / 16, s_end / 4, s_end / 2, s_end};
    if (s_max > s_end) cuts_line.push_back(s_max);
    // the lines only matter to the precision of the sum with the arc
    const double line_abs = 0.1 * tol * std::abs(out.arc) * std::exp(A * uC);
    const auto line = quad::adaptive(line_integrand, cuts_line, tol, line_abs);
    out.line = line.value * std::exp(-A * uC);
    out.err += line.error * std::exp(-A * uC);
    {
        const BranchPoint bm = branch_point(xi_max);
        out.tail_bound = 2.0 * std::abs(scaled_F(bm)) * std::exp(-A * bm.u) / std::max(A, 1e-300);
    }

    return out;
}

}  // namespace contour

/// N(q,m,n) for q = 0 by the substitution tau = tan(phi): the integrand becomes a
/// trigonometric polynomial, so the trapezoid rule with enough nodes is exact.
inline ScaledReal N_zero(int m, int n, double G) {
    if (m < 0 || n < 0) throw DomainError("N: m, n must be non-negative");
    if (m + n == 0) throw DomainError("N(0,0,0) diverges");
    const int K = m + n - 1, j = m - n;
    // the trig polynomial has degree K in psi, so frequencies |j| > K integrate to zero
    if (std::abs(j) > K) return ScaledReal(0.0);
    const int nodes = 2 * (K + std::abs(j)) + 4;
    // (1/2) int_{-pi}^{pi} ((1+cos psi)/2)^K e^{-i j psi} dpsi
    double acc = 0;
    for (int l = 0; l < nodes; ++l) {
        const double psi = -std::numbers::pi + 2.0 * std::numbers::pi * l / nodes;
        acc += std::pow(0.5 * (1.0 + std::cos(psi)), K) * std::cos(j * psi);
    }
    double I = std::numbers::pi * acc / nodes;
    if ((m + n) % 2) I = -I;
    const double D = std::ldexp(binom_minus_half(m) * binom_minus_half(n), m + n);
    return ScaledReal(D * I, -(2.0 * m + 2.0 * n - 1.0) * std::log(G));
}

struct NResult {
    ScaledReal value;
    double imag_rel = 0;  // relative size of the discarded imaginary part
    double err_rel = 0;   // quadrature error estimate relative to |value|
};

inline NResult N_eval_detailed(int q, int m, int n, double G, const ContourSpec& spec = {}) {
    if (q < 0) throw DomainError("N: q must be non-negative");
    if (m < 0 || n < 0) throw DomainError("N: m, n must be non-negative");
    if (!(G > 0)) throw DomainError("N: G must be positive");
    if (q == 0) return {N_zero(m, n, G), 0.0, 0.0};
    if (m + n == 0) throw DomainError("N: m+n must be positive for q >= 1");

    const contour::Pieces P = contour::contour_pieces(q, m, n, G, spec);
    // N = -D (line - arc) e^{-qG^3/3} G^{-(2m+2n-1)}, D = 2^{m+n} binom binom
    const double D = std::ldexp(binom_minus_half(m) * binom_minus_half(n), m + n);
    const double core = P.line - P.arc.real();
    const double mag = std::max({std::fabs(core), 1e-300});
    NResult r;
    r.value = ScaledReal(-D * core,
                         -q * G * G * G / 3.0 - (2.0 * m + 2.0 * n - 1.0) * std::log(G) - P.log_scale);
    r.imag_rel = std::fabs(P.arc.imag()) / mag;
    r.err_rel = (P.err + P.tail_bound) / mag;
    // A fixed radius far from the adaptive one makes the arc integrand huge and the
    // sum cancels to noise. The adaptive radius is not checked this way: some N cancel
    // to far below the pieces regardless of radius and are reported through err_rel.
    if (spec.epsilon > 0 && !(r.err_rel <= 1e-6))
        throw AccuracyError("N: contour quadrature failed, try a radius nearer the adaptive one", r.err_rel);
    return r;
}

/// N(q,m,n) = 2^{m+n}/G^{2m+2n-1} binom(-1/2,m) binom(-1/2,n) I(q,m,n), the factor
/// e^{-qG^3/3} carried in the log factor.
inline ScaledReal N_eval(int q, int m, int n, double G, const ContourSpec& spec = {}) {
    return N_eval_detailed(q, m, n, G, spec).value;
}

/// Secondary oracle: I(q,m,n) integrated along Im(tau) = delta, 0 < delta < 1, where
/// the exponential factor decays like a Gaussian. Intended for moderate q G^3.
inline ScaledReal N_line_oracle(int q, int m, int n, double G, double delta = 0.5, double rel_tol = 1e-13) {
    if (q < 1 || m + n == 0) throw DomainError("N_line_oracle: needs q >= 1 and m+n > 0");
    const double A = 0.5 * q * G * G * G;
    auto f = [&](double x) {
        const cplx tau(x, delta);
        const cplx ph = cplx(0, A) * (tau + tau * tau * tau / 3.0);
        return std::exp(ph) / (std::pow(tau - cplx(0, 1), 2 * m) * std::pow(tau + cplx(0, 1), 2 * n));
    };
    // the integrand is below e^{-A delta x^2} |...|; cut where that is negligible
    const double X = std::sqrt(45.0 / (A * delta)) + 2.0;
    const int panels = std::max(8, static_cast<int>(std::ceil(A * X * X * X / 20.0)));
    const cplx I = quad::adaptive(f, quad::linspace(-X, X, panels), rel_tol, 0.0, 200000).value;
    const double D = std::ldexp(binom_minus_half(m) * binom_minus_half(n), m + n);
    return ScaledReal(D * I.real(), -(2.0 * m + 2.0 * n - 1.0) * std::log(G));
}

}  // namespace ertbp::melnikov
