#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "../errors.hpp"
#include "../scaled_real.hpp"
#include "contour.hpp"

namespace ertbp::melnikov {

struct AsymptoticTerms {
    cplx d_mn{};                // i 2^{m+n} binom(-1/2,n) binom(-1/2,m)
    std::vector<cplx> d;        // Taylor coefficients d_j of x^{2m+1} F^+(x^2), j = 0..2m
    double T_bound = 0;         // bound on |T^q_{m,n}|
    double R_bound = 0;         // bound on |R^q_{m,n}|
};

/// d_j^{m,n} by the Cauchy integral over |tau - i| = 1. With w = tau - i the
/// branch variable is x = w sqrt(1 - i w/3), and x^{2m+1} F^+ = (x/w)^{2m+1} (w+2i)^{-2n-1}.
inline std::vector<cplx> d_coefficients(int m, int n, int j_max, int nodes = 512) {
    if (m < 0 || n < 0 || j_max < 0) throw DomainError("d_coefficients: negative index");
    std::vector<cplx> d(j_max + 1);
    const cplx I(0, 1);
    for (int k = 0; k < nodes; ++k) {
        const double th = 2.0 * std::numbers::pi * k / nodes;
        const cplx w = std::polar(1.0, th);
        const cplx root = std::sqrt(1.0 - I * w / 3.0);
        const cplx x = w * root;
        const cplx dx = root - (I * w / 6.0) / root;
        const cplx T = std::pow(root, 2 * m + 1) / std::pow(w + 2.0 * I, 2 * n + 1);
        // (1/2 pi i) oint T x^{-j-1} dx, with dtau = i w dth
        cplx xp = 1.0 / x;
        const cplx base = T * dx * w / static_cast<double>(nodes);
        for (int j = 0; j <= j_max; ++j) {
            d[j] += base * xp;
            xp /= x;
        }
    }
    return d;
}

inline AsymptoticTerms asymptotic_terms(int q, int m, int n, double G) {
    AsymptoticTerms a;
    a.d_mn = cplx(0, std::ldexp(binom_minus_half(m) * binom_minus_half(n), m + n));
    a.d = d_coefficients(m, n, 2 * m);
    a.T_bound = 45.0 * std::ldexp(1.0, 2 * m + 2) / (G * G * G);
    a.R_bound = 18.0 * std::pow(static_cast<double>(q), m - 1) * std::pow(G, 3.0 * m - 3.0);
    return a;
}

struct NAsymptotic {
    ScaledReal value;
    ScaledReal error_bound;  // |d_mn| (|T| + |R|) e^{-qG^3/3} G^{1-2m-2n}
    double imag_rel = 0;
};

/// Finite-sum asymptotic form of N(q,m,n) for q >= 1, G > 1, without the T and R terms.
inline NAsymptotic N_asymptotic_detailed(int q, int m, int n, double G) {
    if (q < 1) throw DomainError("N_asymptotic: q must be >= 1");
    if (m < 0 || n < 0 || m + n == 0) throw DomainError("N_asymptotic: need m, n >= 0 and m+n > 0");
    if (!(G > 1)) throw DomainError("N_asymptotic: G must exceed 1");
    const AsymptoticTerms a = asymptotic_terms(q, m, n, G);
    const double log_prefactor = -q * G * G * G / 3.0 - (2.0 * m + 2.0 * n - 1.0) * std::log(G);

    // the sum grows like G^{3m-3/2}; factor G^{3m} out to keep the terms in range
    const double lg3 = 3.0 * std::log(G);
    cplx sum{};
    double dfact = 1.0;  // (2s-1)!!, with 1 at s = 0
    for (int s = 0; s <= m; ++s) {
        if (s > 0) dfact *= 2.0 * s - 1.0;
        const double sign = (s % 2) ? -1.0 : 1.0;
        const double mag = std::sqrt(std::numbers::pi) * std::pow(2.0, 1.5) * std::pow(static_cast<double>(q), s - 0.5) / dfact *
                           std::exp(lg3 * (s - m) - 1.5 * std::log(G));
        sum += sign * mag * a.d[2 * m - 2 * s];
    }
    const cplx v = a.d_mn * sum;
    NAsymptotic r;
    r.value = ScaledReal(v.real(), log_prefactor + m * lg3);
    r.imag_rel = std::abs(v.imag()) / std::max(std::abs(v), 1e-300);
    r.error_bound = ScaledReal(std::abs(a.d_mn) * (a.T_bound + a.R_bound), log_prefactor);
    return r;
}

inline ScaledReal N_asymptotic(int q, int m, int n, double G) { return N_asymptotic_detailed(q, m, n, G).value; }

}  // namespace ertbp::melnikov
