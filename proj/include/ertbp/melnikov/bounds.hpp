#pragma once

#include <cmath>
#include <numbers>

#include "../kepler.hpp"
#include "../scaled_real.hpp"
#include "harmonics.hpp"

namespace ertbp::melnikov {

inline bool in_asymptotic_regime(double G, double e) { return G >= 32.0 && e * G <= 0.125; }

/// Leading-order harmonics for large G and small eG, in the table convention
/// L = sum L_{q,k} e^{i(qs + k alpha)}. The published constants for L_{0,1},
/// L_{1,-1} and L_{1,-2} are cosine amplitudes, i.e. twice these.
struct FourHarmonics {
    ScaledReal L00, L01, L1m1, L1m2;
    // relative envelopes: L = leading * (1 + E), |E| <= value
    double E00 = 0, E01 = 0, E1m1 = 0, E1m2 = 0;
    // absolute envelopes on the remainders of the first two s-harmonics and on L_{>=2}
    ScaledReal calE0, calE1, L_ge2;
    bool in_regime = false;
};

inline FourHarmonics four_harmonics(double G, double e) {
    if (!(G > 0)) throw DomainError("four_harmonics: G must be positive");
    kepler::detail::check_eccentricity(e);
    const double pi = std::numbers::pi, G3 = G * G * G;
    const double decay = -G3 / 3.0;
    FourHarmonics h;
    h.L00 = ScaledReal(pi / (2.0 * G3));
    h.L01 = ScaledReal(-15.0 * pi * e / (16.0 * G3 * G * G));
    h.L1m1 = ScaledReal(0.25 * std::sqrt(pi / 2.0) / std::sqrt(G), decay);
    h.L1m2 = ScaledReal(-1.5 * std::sqrt(2.0 * pi) * e * G * std::sqrt(G), decay);
    const double e2 = e * e, G4 = G * G * G * G;
    h.E00 = 4096.0 / G4 + 4.0 * 49.0 * e2;
    h.E01 = 8192.0 / G4 + e2;
    h.E1m1 = std::ldexp(1.0, 21) / G + 2.0 * 49.0 * e2;
    h.E1m2 = std::ldexp(1.0, 17) / G + 49.0 / 3.0 * e;
    h.calE0 = ScaledReal(16384.0 * e2 * std::pow(G, -7.0));
    h.calE1 = ScaledReal(std::ldexp(1.0, 19) * (std::pow(G, -3.5) + e2 * std::pow(G, 2.5) + e * std::pow(G, -1.5)), decay);
    h.L_ge2 = ScaledReal(std::ldexp(1.0, 28) * std::pow(G, 1.5), 2.0 * decay);
    h.in_regime = in_asymptotic_regime(G, e);
    return h;
}

/// Explicit bound B_{q,k} >= |L_{q,k}|, valid for G >= 32 and eG <= 1/8.
/// Euler's number appears as exp(q), exp(2q); e is the eccentricity.
inline ScaledReal bound_B(int q, int k, double G, double e) {
    if (q < 0) return bound_B(-q, -k, G, e);
    if (!(G > 0)) throw DomainError("bound_B: G must be positive");
    kepler::detail::check_eccentricity(e);
    const double lg = std::log(G), ln2 = std::numbers::ln2;
    auto le = [&](double p) { return p == 0 ? 0.0 : p * std::log(e); };  // log(e^p), 0^0 = 1
    const double decay = -q * G * G * G / 3.0;
    double L = 0;
    if (q == 0) {
        const int l = std::abs(k);
        if (l == 0) throw DomainError("bound_B: B_{0,0} is not defined");
        L = (8 + 2 * l) * ln2 + le(l) + (-2.0 * l - 3) * lg;
        return e == 0 ? ScaledReal(0.0) : ScaledReal::exp(L);
    }
    if (e == 0 && k != -q) return ScaledReal(0.0);
    if (k == 0)
        L = (9 + q) * ln2 + 2.0 * q + le(q) - 1.5 * lg;
    else if (k == 1)
        L = 7 * ln2 + q + 4.0 * std::log1p(e) - 3.5 * lg;
    else if (k == -1)
        L = (9 + q) * ln2 + 2.0 * q + le(std::abs(1 - q)) - 0.5 * lg;
    else if (k > 1)
        L = (5 + k) * ln2 + q + k * std::log1p(e) + (-2.0 * k - 0.5) * lg;
    else {
        const int K = -k;
        L = (5 + q + 2 * K) * ln2 + 2.0 * q + le(std::abs(K - q)) + (K - 0.5) * lg;
    }
    return ScaledReal::exp(L + decay);
}

/// |N(q,m,n)| <= 2^{n+m+3} exp(q) G^{m-2n-1/2} exp(-qG^3/3), q >= 1, G > 1.
inline ScaledReal bound_N(int q, int m, int n, double G) {
    if (q < 1 || m < 0 || n < 0 || m + n == 0) throw DomainError("bound_N: need q >= 1, m,n >= 0, m+n > 0");
    return ScaledReal::exp((n + m + 3) * std::numbers::ln2 + q + (m - 2.0 * n - 0.5) * std::log(G) - q * G * G * G / 3.0);
}

/// sum_k |L_{q,k}| <= 2^13 exp(-qG^3/3) (8 exp(2) G)^q G^{-1/2}, q >= 2.
inline ScaledReal bound_row_sum(int q, double G) {
    if (q < 2) throw DomainError("bound_row_sum: q must be >= 2");
    return ScaledReal::exp(13 * std::numbers::ln2 - q * G * G * G / 3.0 + q * (2.0 + 3 * std::numbers::ln2 + std::log(G)) -
                           0.5 * std::log(G));
}

/// |L_{>=2}| <= 2^28 G^{3/2} exp(-2G^3/3).
inline ScaledReal bound_tail(double G) {
    return ScaledReal(std::ldexp(1.0, 28) * std::pow(G, 1.5), -2.0 * G * G * G / 3.0);
}

/// sup over (alpha, s) of |L_{>=2}| as reconstructed from a table: 2 sum_{q>=2} sum_k |L_{q,k}|.
inline ScaledReal table_tail(const HarmonicTable& t) {
    ScaledReal acc(0.0);
    for (const auto& [key, v] : t.entries())
        if (key.first >= 2) acc += 2.0 * v.abs();
    return acc;
}

}  // namespace ertbp::melnikov
