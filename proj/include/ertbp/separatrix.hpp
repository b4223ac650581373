#pragma once

#include <cmath>
#include <numbers>

#include "dynamics.hpp"

namespace ertbp::separatrix {

struct SeparatrixParams {
    double alpha_star = 0;
    double G_star = 1;
    double s_star = 0;
    double sigma = 0;  // time offset along the orbit
};

/// Real root of t = (G^3/2)(tau + tau^3/3): Cardano, then one Newton step.
inline double tau_of_t(double t, double G) {
    if (!(G > 0)) throw DomainError("tau_of_t: G must be positive");
    const double c = 6.0 * t / (G * G * G);  // tau^3 + 3 tau = c
    const double h = 0.5 * std::fabs(c);
    // the two Cardano cube roots multiply to -1, so tau = A - 1/A
    const double A = std::cbrt(h + std::hypot(h, 1.0));
    double tau = A - 1.0 / A;
    if (c < 0) tau = -tau;
    for (int it = 0; it < 2; ++it) {
        const double F = tau * tau * tau + 3.0 * tau - c;
        const double dF = 3.0 * tau * tau + 3.0;
        tau -= F / dF;
    }
    return tau;
}

inline double t_of_tau(double tau, double G) { return 0.5 * G * G * G * (tau + tau * tau * tau / 3.0); }

inline dynamics::McGeheeExtState homoclinic_state_tau(double tau, double t, const SeparatrixParams& p) {
    if (!(p.G_star > 0)) throw DomainError("homoclinic_state: G must be positive");
    const double w = 1.0 + tau * tau;
    dynamics::McGeheeExtState z;
    z.x = 2.0 / (p.G_star * std::sqrt(w));
    z.alpha = p.alpha_star + std::numbers::pi + 2.0 * std::atan(tau);
    z.y = 2.0 * tau / (p.G_star * w);
    z.G = p.G_star;
    z.s = p.s_star + t;
    return z;
}

/// Point of the unperturbed separatrix at time t (shifted by sigma before the tau conversion).
inline dynamics::McGeheeExtState homoclinic_state(double t, const SeparatrixParams& p) {
    return homoclinic_state_tau(tau_of_t(t + p.sigma, p.G_star), t, p);
}

/// Large-|t| behaviour of x along the separatrix.
inline double x_asymptotic(double t) { return 2.0 / std::cbrt(6.0 * std::fabs(t)); }

}  // namespace ertbp::separatrix
