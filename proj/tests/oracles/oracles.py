#!/usr/bin/env python3
"""Independent reference values, frozen into tests/oracle_values.hpp.

Run: python3 tests/oracles/oracles.py > tests/oracle_values.hpp
"""
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def kepler_E(t, e):
    # E - e sin E is increasing, so bisection brackets the root
    lo, hi = mp.mpf(t) - 1, mp.mpf(t) + 1
    for _ in range(200):
        mid = (lo + hi) / 2
        if mid - e * mp.sin(mid) < t:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def true_anomaly_ode(t, e):
    e = mp.mpf(e)
    k = 1 / (1 - e**2) ** mp.mpf(1.5)
    sol = mp.odefun(lambda tt, f: (1 + e * mp.cos(f)) ** 2 * k, 0, 0)
    return sol(mp.mpf(t))


def c_coeff(q, n, m, e):
    e = mp.mpf(e)

    def integrand(E):
        r = 1 - e * mp.cos(E)
        f = 2 * mp.atan2(mp.sqrt(1 + e) * mp.sin(E / 2), mp.sqrt(1 - e) * mp.cos(E / 2))
        t = E - e * mp.sin(E)
        return r ** (n + 1) * mp.cos(m * f - q * t)

    return mp.quad(integrand, [-mp.pi, 0, mp.pi]) / (2 * mp.pi)


def cardano_tau(t, G):
    # tau^3 + 3 tau - 6t/G^3 = 0
    p, qq = mp.mpf(3), -6 * mp.mpf(t) / mp.mpf(G) ** 3
    d = mp.sqrt(qq**2 / 4 + p**3 / 27)
    rcbrt = lambda v: mp.sign(v) * mp.cbrt(abs(v))
    return rcbrt(-qq / 2 + d) + rcbrt(-qq / 2 - d)


def dU0(x, alpha, f, r):
    c = mp.cos(alpha - f)
    return x**2 / mp.sqrt(4 + x**4 * r**2 + 4 * x**2 * r * c) + (x**2 / 2) ** 2 * r * c - x**2 / 2


def potential_at(x, alpha, s, e):
    E = kepler_E(s, e)
    r = 1 - e * mp.cos(E)
    f = 2 * mp.atan2(mp.sqrt(1 + e) * mp.sin(E / 2), mp.sqrt(1 - e) * mp.cos(E / 2))
    v = dU0(mp.mpf(x), mp.mpf(alpha), f, r)
    da = mp.diff(lambda a: dU0(mp.mpf(x), a, f, r), mp.mpf(alpha))
    dx = mp.diff(lambda xx: dU0(xx, mp.mpf(alpha), f, r), mp.mpf(x))
    # the same value from the expansion in powers of x^2 (Legendre series)
    a, cc = mp.mpf(x) ** 2 * r / 2, mp.cos(mp.mpf(alpha) - f)
    series = mp.mpf(x) ** 2 / 2 * mp.nsum(lambda l: (-a) ** l * mp.legendre(l, cc), [2, mp.inf])
    return v, da, dx, series


def N_shifted(q, m, n, G, delta=mp.mpf("0.5")):
    A = mp.mpf(q) * mp.mpf(G) ** 3 / 2

    def f(x):
        tau = mp.mpc(x, delta)
        return mp.exp(1j * A * (tau + tau**3 / 3)) / ((tau - 1j) ** (2 * m) * (tau + 1j) ** (2 * n))

    X = mp.sqrt(120 / (A * delta)) + 2
    pts = mp.linspace(-X, X, int(A * X**3 / 3) + 8)
    I = mp.quad(f, pts)
    D = 2 ** (m + n) * mp.binomial(-mp.mpf(1) / 2, m) * mp.binomial(-mp.mpf(1) / 2, n)
    return D * I.real / mp.mpf(G) ** (2 * m + 2 * n - 1)


# --- Melnikov potential by Gauss-Legendre in tau -------------------------------

def kepler_np(t, e):
    E = t + e * np.sin(t)
    for _ in range(30):
        E = E - (E - e * np.sin(E) - t) / (1 - e * np.cos(E))
    return E


def dU0_np(x, a0, phi, e, d_alpha):
    E = kepler_np(phi, e)
    r = 1 - e * np.cos(E)
    f = 2 * np.arctan2(np.sqrt(1 + e) * np.sin(E / 2), np.sqrt(1 - e) * np.cos(E / 2))
    c, s = np.cos(a0 - f), np.sin(a0 - f)
    den = 4 + x**4 * r**2 + 4 * x**2 * r * c
    if d_alpha:
        return 2 * x**4 * r * s * den**-1.5 - x**4 / 4 * r * s
    # the x^2 and x^4 terms cancel; with u = x^4 r^2/4 + x^2 r c the value is (x^2/2) g(u) - x^6 r^2/16
    u = x**4 * r**2 / 4 + x**2 * r * c
    g = np.expm1(-0.5 * np.log1p(u)) + u / 2
    return x**2 / 2 * g - x**6 * r**2 / 16


def melnikov_gl(alpha, G, s, e, d_alpha=False, tau_c=60.0, nodes=24):
    G3 = G**3
    t_of = lambda tau: G3 / 2 * (tau + tau**3 / 3)

    def F(tau):
        x = 2 / (G * np.sqrt(1 + tau**2))
        a0 = alpha + np.pi + 2 * np.arctan(tau)
        return dU0_np(x, a0, s + t_of(tau), e, d_alpha) * G3 / 2 * (1 + tau**2)

    # breakpoints where the phase t advances by pi/2
    tmax = t_of(tau_c)
    k = np.arange(0, math.ceil(tmax / (np.pi / 2)) + 1)
    tk = np.minimum(k * np.pi / 2, tmax)
    tauk = np.array([float(cardano_tau(v, G)) for v in tk[:: max(1, len(tk) // 4000)]])
    # refine with Newton from interpolated seeds (cheaper than mp for every node)
    seeds = np.interp(tk, tk[:: max(1, len(tk) // 4000)], tauk)
    tau_b = seeds
    for _ in range(8):
        tau_b = tau_b - (t_of(tau_b) - tk) / (G3 / 2 * (1 + tau_b**2))
    tau_b = np.unique(np.concatenate([-tau_b[::-1], tau_b]))

    def gl(n):
        xg, wg = np.polynomial.legendre.leggauss(n)
        a, b = tau_b[:-1, None], tau_b[1:, None]
        pts = 0.5 * (a + b) + 0.5 * (b - a) * xg
        return float(np.sum(F(pts) * 0.5 * (b - a) * wg))

    core, core2 = gl(nodes), gl(nodes + 8)

    # tails: phase average integrated in v = tau_c / tau, plus one integration by parts per mode
    M = 64
    phis = 2 * np.pi * np.arange(M) / M

    def mean_tail(sgn):
        xg, wg = np.polynomial.legendre.leggauss(60)
        v = 0.5 * (xg + 1)
        tau = tau_c / v
        x = 2 / (G * np.sqrt(1 + tau**2))
        a0 = alpha + np.pi + 2 * np.arctan(sgn * tau)
        vals = np.array([np.mean(dU0_np(xi, ai, phis, e, d_alpha)) for xi, ai in zip(x, a0)])
        return float(np.sum(vals * G3 / 2 * (1 + tau**2) * tau_c / v**2 * 0.5 * wg))

    def osc_tail(sgn):
        T = sgn * tmax
        tau = sgn * tau_c
        x = 2 / (G * np.sqrt(1 + tau**2))
        a0 = alpha + np.pi + 2 * np.arctan(tau)
        g = dU0_np(x, a0, phis, e, d_alpha)
        h = np.fft.rfft(g) / M
        tot = 0.0
        for j in range(1, M // 2):
            tot += 2 * (-sgn * np.exp(1j * j * (s + T)) * h[j] / (1j * j)).real
        return tot

    val = core2 + mean_tail(1) + mean_tail(-1) + osc_tail(1) + osc_tail(-1)
    return val, abs(core2 - core)


def emit(name, value, comment=""):
    if comment:
        print(f"// {comment}")
    print(f"inline constexpr double {name} = {mp.nstr(mp.mpf(value), 17, strip_zeros=False)};")


def main():
    print("// Generated by tests/oracles/oracles.py; do not edit by hand.")
    print("#pragma once\n")
    print("namespace oracle {\n")
    emit("kepler_E_t1_e01", kepler_E(1, mp.mpf("0.1")), "solve_kepler(1, 0.1), bisection")
    e = mp.mpf("0.05")
    E = kepler_E(mp.mpf("0.7"), e)
    f = true_anomaly_ode(mp.mpf("0.7"), e)
    emit("anom_E_t07_e005", E, "anomalies(0.7, 0.05): E by bisection, f by Taylor integration of df/dt")
    emit("anom_f_t07_e005", f)
    emit("anom_r_t07_e005", (1 - e**2) / (1 + e * mp.cos(f)))
    emit("c_1_3_1_e005", c_coeff(1, 3, 1, e), "c_1^{3,1}(0.05) by adaptive quadrature in E")
    emit("c_1_2_2_e005", c_coeff(1, 2, 2, e))
    emit("c_2_4_0_e01", c_coeff(2, 4, 0, mp.mpf("0.1")))
    emit("tau_t10_G2", cardano_tau(10, 2), "tau_of_t(10, 2), Cardano")
    v, da, dx, series = potential_at(mp.mpf("0.5"), 1, 0, mp.mpf("0.1"))
    emit("dU0_value", v, "Delta U_0 at x = 0.5, alpha = 1, s = 0, e = 0.1, direct formula")
    emit("dU0_d_alpha", da)
    emit("dU0_d_x", dx)
    emit("dU0_series", series, "the same value from the Legendre expansion in x^2")
    emit("N_1_2_1_G2", N_shifted(1, 2, 1, 2), "N(q,m,n) at G = 2 on the line Im tau = 1/2, 40 digits")
    emit("N_1_2_0_G2", N_shifted(1, 2, 0, 2))
    emit("N_2_1_1_G2", N_shifted(2, 1, 1, 2))
    emit("N_1_1_3_G2", N_shifted(1, 1, 3, 2))
    L, err = melnikov_gl(1.0, 2.0, 0.5, 0.05)
    emit("L_a1_G2_s05_e005", L, f"Melnikov potential at alpha = 1, G = 2, s = 0.5, e = 0.05 (GL in tau, est. {err:.1e})")
    L, err = melnikov_gl(1.0, 1.7, 0.0, 0.05, d_alpha=True)
    emit("dLda_a1_G17_s0_e005", L, f"dL/dalpha at alpha = 1, G = 1.7, s = 0, e = 0.05 (est. {err:.1e})")
    print("\n}  // namespace oracle")


if __name__ == "__main__":
    main()
