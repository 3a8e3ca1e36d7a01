"""The conformal-limit spectral problem

    y''' - G (x^-2 y' - x^-3 y) + (x^{3 alpha} - E) y = 0,     G = g (g + 2).

The subdominant solution y(x, E) is fixed by its large-x asymptotics
y ~ x^-alpha exp(-x^{alpha+1}/(alpha+1)). We initialize it from a full asymptotic
series for the logarithmic derivative, transport it inward with the exponential
factor stripped, and project onto the Frobenius basis at the origin.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.signal import convolve2d

from .core import ConvergenceError, ModelParams, integrate_ray, omega, theta_of_E, E_of_theta
from .qtypes import QTriple


class ResonanceError(ValueError):
    """Two local exponents differ by an element of the expansion lattice."""


# --------------------------------------------------------------------------------------
# small helpers


def _cpow(x, mu):
    """Principal-branch power that accepts real or complex arrays."""
    x = np.asarray(x, dtype=complex)
    return np.exp(mu * np.log(x))


def strip_exponent(x, alpha: float):
    """S(x) = x^{alpha+1}/(alpha+1), the exponent removed during transport."""
    return _cpow(x, alpha + 1.0) / (alpha + 1.0)


def _companion(x, E, params: ModelParams):
    """Matrix C with (y, y', y'')' = C (y, y', y''); batched over E."""
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    G = params.twist
    x = complex(x)
    C = np.zeros(E.shape + (3, 3), dtype=complex)
    C[..., 0, 1] = 1.0
    C[..., 1, 2] = 1.0
    C[..., 2, 0] = -G / x**3 - complex(_cpow(x, 3.0 * params.alpha)) + E
    C[..., 2, 1] = G / x**2
    return C


def sector_halfwidth(alpha: float) -> float:
    """Half opening angle of the region where the large-x asymptotics hold."""
    return 4.0 * math.pi / (3.0 * alpha + 3.0)


@dataclass(frozen=True)
class StokesSector:
    k: float
    alpha: float

    @property
    def centre(self) -> float:
        return 2.0 * math.pi * self.k / (3.0 * self.alpha + 3.0)

    @property
    def bounds(self) -> tuple[float, float]:
        w = math.pi / (3.0 * self.alpha + 3.0)
        return (self.centre - w, self.centre + w)

    def contains(self, x: complex) -> bool:
        lo, hi = self.bounds
        return lo < cmath.phase(x) < hi


# --------------------------------------------------------------------------------------
# large-x asymptotic series


@lru_cache(maxsize=64)
def asymptotic_coefficients(alpha: float, g: float, n_max: int = 40, m_max: int = 16) -> np.ndarray:
    """Coefficients a[n, m] of W with y'/y = x^alpha W(eps1, eps2).

    eps1 = x^-(alpha+1), eps2 = E x^-(3 alpha). W solves
    D2 D1 W + 3 W D1 W + W^3 - G eps1^2 W + G eps1^3 + 1 - eps2 = 0
    where D_j multiplies eps1^n eps2^m by (j alpha - n(alpha+1) - 3 alpha m)
    and raises n by one. Each order is linear in its own coefficient with
    weight 3 W00^2 = 3.
    """
    G = g * (g + 2.0)
    N, M = n_max + 1, m_max + 1
    n_idx = np.arange(N)[:, None]
    m_idx = np.arange(M)[None, :]
    w1 = alpha - n_idx * (alpha + 1.0) - 3.0 * alpha * m_idx
    w2 = 2.0 * alpha - n_idx * (alpha + 1.0) - 3.0 * alpha * m_idx

    def D(W, weight):
        out = np.zeros_like(W)
        out[1:, :] = (weight * W)[:-1, :]
        return out

    def conv(A, B):
        return convolve2d(A, B)[:N, :M]

    a = np.zeros((N, M))
    a[0, 0] = -1.0
    const = np.zeros((N, M))
    const[0, 0] = 1.0
    if M > 1:
        const[0, 1] = -1.0
    if N > 3:
        const[3, 0] = G
    for n in range(N):
        for m in range(M):
            if n == 0 and m == 0:
                continue
            # only the entries (n', m') <= (n, m) matter, so restrict the arrays
            sub = a[: n + 1, : m + 1]
            d1 = np.zeros_like(sub)
            d1[1:, :] = (w1[: n + 1, : m + 1] * sub)[:-1, :]
            d2d1 = np.zeros_like(sub)
            d2d1[1:, :] = (w2[: n + 1, : m + 1] * d1)[:-1, :]
            sq = convolve2d(sub, sub)[: n + 1, : m + 1]
            cube = convolve2d(sq, sub)[n, m]
            wd1 = convolve2d(sub, d1)[n, m]
            eps2w = G * sub[n - 2, m] if n >= 2 else 0.0
            R = d2d1[n, m] + 3.0 * wd1 + cube - eps2w + const[n, m]
            a[n, m] = -R / 3.0
    return a


def _log_terms(alpha: float, g: float):
    """Exponents and coefficients of log y = -alpha ln x + sum_c c E^m x^{p}."""
    a = asymptotic_coefficients(alpha, g)
    N, M = a.shape
    n = np.arange(N)[:, None]
    m = np.arange(M)[None, :]
    beta = alpha - n * (alpha + 1.0) - 3.0 * alpha * m
    return a, beta


def asymptotic_state(E, x: complex, params: ModelParams):
    """Stripped state v = (y, y', y'') exp(S(x)) from the asymptotic series.

    Returns (v, tail) with ``tail`` the magnitude of the outermost computed terms,
    a proxy for the truncation error. Batched over E.
    """
    alpha, g = params.alpha, params.g
    a, beta = _log_terms(alpha, g)
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    x = complex(x)
    N, M = a.shape
    lx = cmath.log(x)
    # x^beta for each (n,m)
    xb = np.exp(beta * lx)
    Em = E[:, None] ** np.arange(M)[None, :]  # (nE, M)
    terms = a[None, :, :] * xb[None, :, :] * Em[:, None, :]  # w = x^alpha W = sum terms
    w = terms.sum(axis=(1, 2))
    dw = (terms * (beta[None] / x)).sum(axis=(1, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        integ = np.where(np.abs(beta + 1.0) > 1e-12, terms * x / (beta[None] + 1.0), 0.0)
    bad = (np.abs(beta + 1.0) <= 1e-9) & (np.abs(a) > 0)
    bad[1, 0] = False
    bad[0, 0] = False
    if np.any(bad):
        raise ResonanceError("logarithmic term in the asymptotic series; alpha is exceptional")
    integ[:, 0, 0] = 0.0  # -x^{a+1}/(a+1) is the stripped exponent
    integ[:, 1, 0] = 0.0  # -alpha ln x handled separately
    logv = -alpha * lx + integ.sum(axis=(1, 2))
    y = np.exp(logv)
    v = np.stack([y, w * y, (dw + w * w) * y], axis=-1)
    mag = np.abs(terms)
    tail = np.maximum(mag[:, -1, :].max(axis=1), mag[:, :, -1].max(axis=1)) / np.abs(x) ** alpha
    return v, tail


def choose_x_max(E, params: ModelParams, tail_tol: float = 1e-15) -> float:
    """Smallest convenient x_max with x^{3 alpha} > 1e3 |E| and a negligible series tail."""
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    alpha = params.alpha
    x = max(6.0, 1.01 * (1e3 * float(np.max(np.abs(E)))) ** (1.0 / (3.0 * alpha)))
    for _ in range(60):
        _, tail = asymptotic_state(E, x, params)
        if np.all(tail < tail_tol):
            return x
        x *= 1.15
    raise ConvergenceError("could not find x_max with a converged asymptotic series")


# --------------------------------------------------------------------------------------
# transport


@dataclass(frozen=True)
class ConformalSolution:
    """(y, y', y'') of the subdominant solution at points x, stored stripped.

    The true state is ``v * exp(-S)`` with S = x^{alpha+1}/(alpha+1).
    """

    x: np.ndarray
    E: np.ndarray
    v: np.ndarray  # shape (nE, nx, 3)
    S: np.ndarray  # shape (nx,)
    x_max: float

    @property
    def states(self) -> np.ndarray:
        return self.v * np.exp(-self.S)[None, :, None]

    @property
    def y(self):
        return self.states[..., 0]

    @property
    def dy(self):
        return self.states[..., 1]

    @property
    def d2y(self):
        return self.states[..., 2]


def y_along_ray(
    E,
    params: ModelParams,
    arg: float,
    radii: Sequence[float],
    tol: float = 1e-12,
    x_max: Optional[float] = None,
) -> ConformalSolution:
    """Subdominant y(., E) at the points r e^{i arg}, r in ``radii``.

    Path: along the positive real axis from x_max to the largest radius, then
    along a circular arc to angle ``arg``, then radially inward along that ray.
    Every leg stays in the region where the solution is controlled.
    """
    alpha = params.alpha
    if abs(arg) >= sector_halfwidth(alpha):
        raise ValueError(f"arg {arg} outside the initialization sector |arg x| < 4 pi/(3 alpha + 3)")
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    order = np.argsort(-radii)
    r_sorted = radii[order]
    r_hi = float(r_sorted[0])
    if x_max is None:
        x_max = choose_x_max(E, params)
    if x_max <= r_hi:
        raise ValueError("x_max must exceed every requested radius")
    v0, _ = asymptotic_state(E, x_max, params)

    def real_leg(t):
        C = _companion(t, E, params)
        return -(C + (t**alpha) * np.eye(3))

    v = integrate_ray(real_leg, x_max, r_hi, v0, tol=tol).final
    if arg != 0.0:
        def arc(psi):
            xi = r_hi * cmath.exp(1j * psi)
            C = _companion(xi, E, params)
            return -1j * xi * (C + complex(_cpow(xi, alpha)) * np.eye(3))

        v = integrate_ray(arc, 0.0, arg, v, tol=tol).final
    e = cmath.exp(1j * arg)

    def radial(t):
        xi = t * e
        C = _companion(xi, E, params)
        return -e * (C + complex(_cpow(xi, alpha)) * np.eye(3))

    if r_sorted.size == 1 or r_sorted[-1] == r_hi:
        out = np.repeat(v[:, None, :], r_sorted.size, axis=1)
    else:
        tr = integrate_ray(radial, r_hi, float(r_sorted[-1]), v, tol=tol, t_eval=np.unique(r_sorted)[::-1])
        lookup = {float(t): s for t, s in zip(tr.t, tr.states)}
        out = np.stack([lookup[float(r)] for r in r_sorted], axis=1)
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    out = out[:, inv, :]
    xs = radii * e
    return ConformalSolution(x=xs, E=E, v=out, S=strip_exponent(xs, alpha), x_max=x_max)


def solve_y(
    E,
    params: ModelParams,
    x_grid: Optional[Sequence[float]] = None,
    x_max: Optional[float] = None,
    x_min: float = 0.1,
    tol: float = 1e-12,
    n_points: int = 50,
) -> ConformalSolution:
    """Subdominant solution on a real grid (default: log-spaced on [x_min, 2])."""
    E_arr = np.atleast_1d(np.asarray(E, dtype=complex))
    if x_max is not None and x_max ** (3 * params.alpha) <= 1e3 * np.max(np.abs(E_arr)):
        raise ValueError("x_max too small: need x_max^{3 alpha} > 1e3 |E|")
    if x_grid is None:
        x_grid = np.geomspace(x_min, 2.0, n_points)
    return y_along_ray(E_arr, params, 0.0, x_grid, tol=tol, x_max=x_max)


def rotated_y(k: float, E, params: ModelParams, x, tol: float = 1e-12):
    """y_k(x) = omega^k y(omega^-k x, omega^{-3 alpha k} E) with x-derivatives.

    ``x`` is an array of points on one ray. Returns an array (nE, nx, 3) of
    (y_k, y_k', y_k'').
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    args = np.angle(x)
    if not np.allclose(args, args[0], atol=1e-14):
        raise ValueError("evaluation points must share one ray")
    alpha = params.alpha
    w = omega(alpha)
    arg = float(args[0]) - 2.0 * math.pi * k / (3.0 * alpha + 3.0)
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    Ek = E * cmath.exp(-2j * math.pi * alpha * k / (alpha + 1.0))
    sol = y_along_ray(Ek, params, arg, np.abs(x), tol=tol)
    st = sol.states
    wk = cmath.exp(2j * math.pi * k / (3.0 * alpha + 3.0))
    return st * np.array([wk, 1.0, 1.0 / wk])


def wronskian3(k1, k2, k3, E, params: ModelParams, x, tol: float = 1e-12) -> np.ndarray:
    """det of rows (y_k, y_k', y_k'') for k in (k1, k2, k3); shape (nE, nx)."""
    rows = [rotated_y(k, E, params, x, tol=tol) for k in (k1, k2, k3)]
    mat = np.stack(rows, axis=-2)
    return np.linalg.det(mat)


def z_function(k1, k2, E, params: ModelParams, x, tol: float = 1e-12) -> np.ndarray:
    """z_{k1,k2} = y_k1 y_k2' - y_k2 y_k1'."""
    if abs(k1 - k2) >= 3:
        raise ValueError("need |k1 - k2| < 3")
    a = rotated_y(k1, E, params, x, tol=tol)
    b = rotated_y(k2, E, params, x, tol=tol)
    return a[..., 0] * b[..., 1] - b[..., 0] * a[..., 1]


def z_function_state(k1, k2, E, params: ModelParams, x, tol: float = 1e-12) -> np.ndarray:
    """(z, z', z'') for z = z_{k1,k2}, using y''' from the rotated equation."""
    a = rotated_y(k1, E, params, x, tol=tol)
    b = rotated_y(k2, E, params, x, tol=tol)
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    z = a[..., 0] * b[..., 1] - b[..., 0] * a[..., 1]
    dz = a[..., 0] * b[..., 2] - b[..., 0] * a[..., 2]
    # y_k''' = G x^-2 y' - G x^-3 y - e^{-2 pi i k} p(x) y
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    G = params.twist
    p = _cpow(x, 3 * params.alpha)[None, :] - E[:, None]

    def third(s, k):
        return G / x**2 * s[..., 1] - G / x**3 * s[..., 0] - cmath.exp(-2j * math.pi * k) * p * s[..., 0]

    d2z = a[..., 1] * b[..., 2] + a[..., 0] * third(b, k2) - b[..., 1] * a[..., 2] - b[..., 0] * third(a, k1)
    return np.stack([z, dz, d2z], axis=-1)


def cong_residual(state3, x, E, params: ModelParams, sign: complex = 1.0):
    """Residual of the equation given (y, y', y'', y''') arrays."""
    x = np.asarray(x, dtype=complex)
    G = params.twist
    y, dy, _, d3y = (state3[..., i] for i in range(4))
    p = _cpow(x, 3 * params.alpha) - E
    return d3y - G * (dy / x**2 - y / x**3) + sign * p * y


# --------------------------------------------------------------------------------------
# Frobenius basis at the origin


def indicial_roots(g: float) -> tuple[float, float, float]:
    """Roots of (mu - 1)[mu (mu - 2) - g (g + 2)], ordered as (chi+, chi0, chi-)."""
    return (-g, 1.0, g + 2.0)


def check_resonance(g: float, alpha: float, tol: float = 1e-6, depth: int = 40) -> None:
    """Raise if g+1 or 2g+2 lies within ``tol`` of the lattice 3a + (3 alpha + 3) b."""
    step2 = 3.0 * alpha + 3.0
    for d in (g + 1.0, 2.0 * g + 2.0):
        for b in range(depth):
            rest = d - step2 * b
            if rest < -tol:
                break
            a = round(rest / 3.0)
            if a >= 0 and (a > 0 or b > 0) and abs(rest - 3.0 * a) < tol:
                raise ResonanceError(
                    f"exponent difference {d} hits the series lattice at (3*{a} + {step2}*{b})"
                )


@dataclass(frozen=True)
class FrobeniusBasis:
    """Series solutions chi+, chi0, chi- ~ x^-g, x, x^{g+2} with unit leading coefficients."""

    params: ModelParams
    E: complex
    exponents: tuple[float, float, float]
    coeffs: tuple  # per solution: dict (a, b) -> coefficient
    max_order: int

    @classmethod
    def build(cls, E: complex, params: ModelParams, max_order: int = 60) -> "FrobeniusBasis":
        check_resonance(params.g, params.alpha)
        g = params.g
        step2 = 3.0 * params.alpha + 3.0

        def L(mu):
            return (mu - 1.0) * (mu - g - 2.0) * (mu + g)

        series = []
        for nu in indicial_roots(g):
            c = {(0, 0): 1.0 + 0j}
            for tot in range(1, max_order + 1):
                for b in range(0, tot + 1):
                    a = tot - b
                    num = E * c.get((a - 1, b), 0.0) - c.get((a, b - 1), 0.0)
                    c[(a, b)] = num / L(nu + 3.0 * a + step2 * b)
            series.append(c)
        return cls(params, complex(E), indicial_roots(g), tuple(series), max_order)

    def evaluate(self, x: complex, tail_tol: float = 1e-16) -> np.ndarray:
        """Matrix with columns (chi, chi', chi'') for chi+, chi0, chi- at x (rows = solutions)."""
        x = complex(x)
        lx = cmath.log(x)
        step2 = 3.0 * self.params.alpha + 3.0
        out = np.zeros((3, 3), dtype=complex)
        for i, (nu, c) in enumerate(zip(self.exponents, self.coeffs)):
            v = np.zeros(3, dtype=complex)
            scale = 0.0
            last_shell = 0.0
            for (a, b), ca in c.items():
                mu = nu + 3.0 * a + step2 * b
                try:
                    t = ca * cmath.exp(mu * lx)
                except OverflowError:
                    raise ConvergenceError(f"Frobenius series overflows at |x|={abs(x):.3g}") from None
                v += np.array([t, mu * t / x, mu * (mu - 1.0) * t / x**2])
                scale = max(scale, abs(t))
                if a + b == self.max_order:
                    last_shell = max(last_shell, abs(t))
            if last_shell > tail_tol * scale:
                raise ConvergenceError(
                    f"Frobenius series not converged at |x|={abs(x):.3g} (tail {last_shell / scale:.2e})"
                )
            out[i] = v
        return out


def default_match_point(E: complex, alpha: float) -> float:
    return float(min(0.8, 0.8 / max(1.0, abs(E)) ** (1.0 / (3.0 * alpha))))


def conformal_q_triple(
    E,
    params: ModelParams,
    x_match: Optional[float] = None,
    tol: float = 1e-12,
    theta=None,
) -> list[QTriple]:
    """Project the subdominant y onto the chi basis; gauge "chi-unit".

    ``E`` may be an array; one QTriple per entry is returned. The drift field
    records the largest relative change of the triple when the matching point is
    halved.
    """
    E_arr = np.atleast_1d(np.asarray(E, dtype=complex))
    if x_match is None:
        x_match = min(default_match_point(e, params.alpha) for e in E_arr)
    pts = [x_match, x_match / 2.0]
    sol = y_along_ray(E_arr, params, 0.0, pts, tol=tol)
    st = sol.states
    out = []
    for i, e in enumerate(E_arr):
        basis = FrobeniusBasis.build(e, params)
        qs = []
        conds = []
        for j, x in enumerate(pts):
            F = basis.evaluate(x)
            # y = sum_a Q_a chi_a  ->  state = F^T Q
            q = np.linalg.solve(F.T, st[i, j])
            qs.append(q)
            conds.append(np.linalg.cond(F.T))
        q0, q1 = qs
        drift = float(np.max(np.abs(q0 - q1) / np.maximum(np.abs(q0), 1e-300)))
        if theta is not None:
            th = complex(np.atleast_1d(theta)[i])
        else:
            # E = 0 has no rapidity
            th = theta_of_E(complex(e), params.alpha) if e != 0 else complex(float("nan"), 0.0)
        out.append(
            QTriple(complex(q0[0]), complex(q0[1]), complex(q0[2]), th, "chi-unit",
                    cond=float(conds[0]), drift=drift, E=complex(e))
        )
    return out


def conformal_q_at_theta(theta, params: ModelParams, **kw) -> list[QTriple]:
    """Conformal triple at E = exp(3 alpha theta/(alpha + 1))."""
    th = np.atleast_1d(np.asarray(theta, dtype=complex))
    E = np.array([E_of_theta(t, params.alpha) for t in th])
    return conformal_q_triple(E, params, theta=th, **kw)
