#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "../dynamics.hpp"
#include "../errors.hpp"
#include "../separatrix.hpp"
#include "harmonics.hpp"
#include "quadrature.hpp"

namespace ertbp::melnikov {

struct DirectOptions {
    double T = 0;         // |t| beyond which the tail expansion is used; <= 0 selects max(400, 50 G^3)
    int phase_nodes = 64; // samples per period for the tail's phase average
    double tol = 1e-10;   // absolute
    bool d_alpha = false; // integrate dDeltaU_0/dalpha instead, giving dL/dalpha
};

struct DirectResult {
    double value = 0;
    double error = 0;  // quadrature estimate plus the first neglected tail term
};

namespace detail {

// Delta U_0 on the separatrix at time t, with the primaries at phase phi.
inline double separatrix_integrand(double t, double phi, double alpha, double G, double e, bool d_alpha = false) {
    const double tau = separatrix::tau_of_t(t, G);
    const double x = 2.0 / (G * std::sqrt(1.0 + tau * tau));
    const double a0 = alpha + std::numbers::pi + 2.0 * std::atan(tau);
    const auto u = dynamics::delta_potential(x, a0, phi, dynamics::Params{0.0, e});
    return d_alpha ? u.d_alpha : u.value;
}

// Fourier modes in phi of the integrand at fixed t: h_j, j = 0..M/2.
inline std::vector<std::complex<double>> phase_modes(double t, double alpha, double G, double e, int M, bool d_alpha) {
    std::vector<double> g(M);
    for (int l = 0; l < M; ++l) g[l] = separatrix_integrand(t, 2.0 * std::numbers::pi * l / M, alpha, G, e, d_alpha);
    std::vector<std::complex<double>> h(M / 2 + 1);
    for (int j = 0; j <= M / 2; ++j) {
        std::complex<double> acc{};
        for (int l = 0; l < M; ++l) acc += g[l] * std::polar(1.0, -2.0 * std::numbers::pi * j * l / M);
        h[j] = acc / static_cast<double>(M);
    }
    return h;
}

}  // namespace detail

/// The Melnikov potential by quadrature along the separatrix. The core |t| <= T
/// is integrated panel by panel; beyond T the phase average is integrated in tau
/// and each oscillating mode is summed by two integrations by parts.
inline DirectResult melnikov_direct_detailed(double alpha, double G, double s, double e, const DirectOptions& opt = {}) {
    if (!(G > 0)) throw DomainError("melnikov_direct: G must be positive");
    kepler::detail::check_eccentricity(e);
    if (opt.phase_nodes < 8 || opt.phase_nodes % 2) throw DomainError("melnikov_direct: phase_nodes must be even and >= 8");
    const double G3 = G * G * G;
    const double T = opt.T > 0 ? opt.T : std::max(400.0, 50.0 * G3);
    const int M = opt.phase_nodes;

    auto core_f = [&](double t) { return detail::separatrix_integrand(t, s + t, alpha, G, e, opt.d_alpha); };
    const int panels = 2 * static_cast<int>(std::ceil(T / std::numbers::pi));
    const auto core = quad::adaptive(core_f, quad::linspace(-T, T, panels), 0.0, 0.25 * opt.tol, 20 * panels);

    // mean over the phase, integrated in v = tau_T / |tau| on (0, 1]
    auto mean_tail = [&](double sgn) {
        const double tauT = separatrix::tau_of_t(T, G);
        auto f = [&](double v) {
            if (v <= 0) return 0.0;
            const double tau = tauT / v;
            const double t = sgn * separatrix::t_of_tau(tau, G);
            double acc = 0;
            for (int l = 0; l < M; ++l) acc += detail::separatrix_integrand(t, 2.0 * std::numbers::pi * l / M, alpha, G, e, opt.d_alpha);
            return acc / M * 0.5 * G3 * (1.0 + tau * tau) * tauT / (v * v);
        };
        return quad::adaptive(f, std::vector<double>{0.0, 0.25, 0.5, 1.0}, 0.0, 0.05 * opt.tol);
    };
    const auto mp = mean_tail(1.0), mm = mean_tail(-1.0);

    // int_T^inf h e^{i w t} = -e^{i w T} [h/(iw) - h'/(iw)^2 + h''/(iw)^3 ...], and the mirror image
    auto osc_tail = [&](double sgn, double& third) {
        const double t0 = sgn * T, dt = 0.01 * T;
        const auto h0 = detail::phase_modes(t0, alpha, G, e, M, opt.d_alpha);
        const auto hp = detail::phase_modes(t0 + dt, alpha, G, e, M, opt.d_alpha);
        const auto hm = detail::phase_modes(t0 - dt, alpha, G, e, M, opt.d_alpha);
        double total = 0;
        for (int j = 1; j < M / 2; ++j) {
            const std::complex<double> iw(0, j);
            const std::complex<double> d1 = (hp[j] - hm[j]) / (2 * dt);
            const std::complex<double> d2 = (hp[j] - 2.0 * h0[j] + hm[j]) / (dt * dt);
            const std::complex<double> ph = std::polar(1.0, j * (s + t0));
            const std::complex<double> v = -sgn * ph * (h0[j] / iw - d1 / (iw * iw));
            // modes j and -j are complex conjugates
            total += 2.0 * v.real();
            third += 2.0 * std::abs(d2) / (j * j * j);
        }
        return total;
    };
    double third = 0;
    const double op = osc_tail(1.0, third), om = osc_tail(-1.0, third);

    DirectResult r;
    r.value = core.value + mp.value + mm.value + op + om;
    r.error = core.error + mp.error + mm.error + third;
    if (r.error > opt.tol) throw AccuracyError("melnikov_direct: tolerance not reached", r.error);
    return r;
}

inline double melnikov_direct(double alpha, double G, double s, double e, double tol = 1e-10) {
    DirectOptions o;
    o.tol = tol;
    return melnikov_direct_detailed(alpha, G, s, e, o).value;
}

struct GridHarmonics {
    HarmonicTable table;
    double noise_floor = 0;
    std::vector<std::pair<int, int>> zeroed;  // entries below the noise floor
};

/// L_{q,k} by 2-D DFT of samples f(alpha, s) on a uniform grid.
inline GridHarmonics harmonics_from_samples(const std::function<double(double, double)>& f, int alpha_nodes, int s_nodes,
                                            double noise_floor) {
    auto pow2 = [](int n) { return n >= 2 && (n & (n - 1)) == 0; };
    if (!pow2(alpha_nodes) || !pow2(s_nodes)) throw DomainError("harmonics_from_grid: node counts must be powers of two");
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> grid(static_cast<std::size_t>(alpha_nodes) * s_nodes);
    for (int i = 0; i < alpha_nodes; ++i)
        for (int j = 0; j < s_nodes; ++j)
            grid[static_cast<std::size_t>(i) * s_nodes + j] = f(two_pi * i / alpha_nodes, two_pi * j / s_nodes);

    GridHarmonics out;
    out.noise_floor = noise_floor;
    TableMeta meta;
    meta.tol = noise_floor;
    out.table = HarmonicTable(meta);
    const int qmax = s_nodes / 2 - 1, kmax = alpha_nodes / 2 - 1;
    for (int q = 0; q <= qmax; ++q) {
        for (int k = q == 0 ? 0 : -kmax; k <= kmax; ++k) {
            double acc = 0;
            for (int i = 0; i < alpha_nodes; ++i)
                for (int j = 0; j < s_nodes; ++j)
                    acc += grid[static_cast<std::size_t>(i) * s_nodes + j] *
                           std::cos(two_pi * (static_cast<double>(q) * j / s_nodes + static_cast<double>(k) * i / alpha_nodes));
            acc /= static_cast<double>(alpha_nodes) * s_nodes;
            if (std::fabs(acc) <= noise_floor) {
                out.zeroed.push_back({q, k});
                acc = 0;
            }
            out.table.set(q, k, ScaledReal(acc));
        }
    }
    return out;
}

/// harmonics_from_samples applied to melnikov_direct. The noise floor is the
/// quadrature tolerance; it must not exceed the requested tol.
inline GridHarmonics harmonics_from_grid(int alpha_nodes, int s_nodes, double G, double e, double tol,
                                         const DirectOptions& direct = {}) {
    DirectOptions o = direct;
    if (o.tol > tol) throw AccuracyError("harmonics_from_grid: quadrature noise floor exceeds tol", o.tol);
    auto f = [&](double a, double s) { return melnikov_direct_detailed(a, G, s, e, o).value; };
    GridHarmonics g = harmonics_from_samples(f, alpha_nodes, s_nodes, o.tol);
    TableMeta m = g.table.meta();
    m.G = G;
    m.e = e;
    HarmonicTable t(m);
    for (const auto& [key, v] : g.table.entries()) t.set(key.first, key.second, v);
    g.table = t;
    return g;
}

}  // namespace ertbp::melnikov
