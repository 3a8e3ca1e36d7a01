"""Fixed-step Taylor-recurrence integrators.

These are deliberately written from scratch and share no code with the adaptive
Runge-Kutta transport in :mod:`odeim_bd.core`; they serve as an independent oracle.
Both integrate third-order scalar equations and return the state (y, y', y'').
"""
from __future__ import annotations

import math

import numpy as np


def _binomial_series(beta: float, x0: float, n_terms: int) -> np.ndarray:
    """Taylor coefficients of (x0 + h)^beta in h."""
    out = np.empty(n_terms)
    out[0] = x0**beta
    for n in range(1, n_terms):
        out[n] = out[n - 1] * (beta - n + 1) / (n * x0)
    return out


def _step(state, coeff_fn, h, n_terms):
    """Advance (y, y', y'') by h using the recurrence supplied by ``coeff_fn``.

    ``coeff_fn(a, n)`` must return a[n+3] given a[0..n+2].
    """
    a = np.zeros(n_terms + 3, dtype=complex)
    a[0] = state[0]
    a[1] = state[1]
    a[2] = state[2] / 2.0
    for n in range(n_terms):
        a[n + 3] = coeff_fn(a, n)
    powers = h ** np.arange(n_terms + 3)
    y = np.sum(a * powers)
    k = np.arange(1, n_terms + 3)
    dy = np.sum(k * a[1:] * powers[:-1])
    k2 = np.arange(2, n_terms + 3)
    d2y = np.sum(k2 * (k2 - 1) * a[2:] * powers[:-2])
    return np.array([y, dy, d2y])


def airy3_taylor(x_start: float, x_end: float, state0, h: float = 0.05, n_terms: int = 40):
    """Integrate y''' = x y from x_start to x_end with fixed Taylor steps."""
    state = np.asarray(state0, dtype=complex)
    n_steps = max(1, math.ceil(abs(x_end - x_start) / h))
    step = (x_end - x_start) / n_steps
    x0 = x_start
    for _ in range(n_steps):
        def coeff(a, n, x0=x0):
            prev = a[n - 1] if n >= 1 else 0.0
            return (x0 * a[n] + prev) / ((n + 1) * (n + 2) * (n + 3))

        state = _step(state, coeff, step, n_terms)
        x0 = x0 + step
    return state


def cong_taylor(
    x_start: float,
    x_end: float,
    state0,
    alpha: float,
    g: float,
    E: complex,
    n_terms: int = 40,
    h_max: float = 0.05,
):
    """Integrate y''' = G x^-2 y' - G x^-3 y - (x^{3a} - E) y on the positive real axis.

    The equation is multiplied through by x^3 so that every coefficient is a
    polynomial or a binomial series about the expansion point; steps are capped
    at a quarter of the distance to the singular point x = 0.
    """
    if x_start <= 0 or x_end <= 0:
        raise ValueError("Taylor oracle works on the positive real axis")
    G = g * (g + 2.0)
    state = np.asarray(state0, dtype=complex)
    x0 = float(x_start)
    direction = 1.0 if x_end > x_start else -1.0
    while direction * (x_end - x0) > 1e-15:
        h = min(h_max, x0 / 4.0, abs(x_end - x0))
        step = direction * h
        # the series of x^{3a+3} - E x^3 about x0
        V = _binomial_series(3 * alpha + 3, x0, n_terms + 3).astype(complex)
        V[:4] -= E * np.array([x0**3, 3 * x0**2, 3 * x0, 1.0])
        p3 = np.array([x0**3, 3 * x0**2, 3 * x0, 1.0])
        d = np.zeros(n_terms + 3, dtype=complex)

        def coeff(a, n, V=V, p3=p3, d=d, x0=x0):
            # d[n] is the h^n coefficient of y'''
            acc = 0.0j
            for j in range(1, 4):
                if n - j >= 0:
                    acc -= p3[j] * d[n - j]
            e_n = (n + 1) * a[n + 1]
            e_prev = n * a[n] if n >= 1 else 0.0
            acc += G * (x0 * e_n + e_prev) - G * a[n]
            acc -= np.dot(V[: n + 1], a[n::-1])
            d[n] = acc / p3[0]
            return d[n] / ((n + 1) * (n + 2) * (n + 3))

        state = _step(state, coeff, step, n_terms)
        x0 = x0 + step
    return state
