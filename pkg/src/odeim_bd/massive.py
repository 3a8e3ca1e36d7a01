"""The massive linear problem: transport of the subdominant solution and Q extraction.

On the real slice z = rho e^{i phi} the two first-order systems combine into a
radial system d Psi/d rho = -(e^{i phi} A_z + e^{-i phi} A_zbar) Psi and an angular
one d Psi/d phi = -i rho (e^{i phi} A_z - e^{-i phi} A_zbar) Psi. Transport is done
in t = ln(rho) with the WKB exponent stripped, so every state stays O(1).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import BSpline
from scipy.special import binom

from .core import ModelParams, integrate_ray, omega
from .field import FieldEvaluator, FieldSolution, eta_local, check_field_resonance
from .qtypes import QTriple


class FrameError(ValueError):
    pass


def _e(c: complex, theta) -> np.ndarray:
    """lambda^c on the uniformizing variable: exp(c theta), no branch cut."""
    return np.exp(c * np.asarray(theta, dtype=complex))


# --------------------------------------------------------------------------------------
# Lax matrices


@dataclass(frozen=True)
class LaxMatrices:
    """A_z and A_zbar at one point (rho, phi) and spectral parameter theta."""

    A_z: np.ndarray
    A_zbar: np.ndarray


def _p_cover(rho, phi, params: ModelParams, conj: bool = False):
    """p(z) (or p(zbar)) with z^{3a} = rho^{3a} e^{+-3 i a phi} on the cover."""
    sgn = -1.0 if conj else 1.0
    a = params.alpha
    return rho ** (3 * a) * np.exp(sgn * 3j * a * phi) - params.s ** (3 * a)


def eta_z_parts(d: dict, rho: float, phi: float):
    """eta_z, eta_zbar and eta_zz from polar derivatives."""
    em = cmath.exp(-1j * phi)
    ep = cmath.exp(1j * phi)
    et, ep_, ett, etp, epp = d["eta_t"], d["eta_phi"], d["eta_tt"], d["eta_tphi"], d["eta_phiphi"]
    eta_z = em / (2 * rho) * (et - 1j * ep_)
    eta_zb = ep / (2 * rho) * (et + 1j * ep_)
    eta_zz = em * em / (4 * rho * rho) * (ett - 2 * et - epp - 2j * etp + 2j * ep_)
    return eta_z, eta_zb, eta_zz


def lax_matrices(sol: FieldSolution, theta: complex, rho: float, phi: float) -> LaxMatrices:
    """The sl(3) connection components. Entries (2,1) and (3,2) of A_z carry +lambda,
    the sign for which the zero-curvature condition reproduces the field equation."""
    d = FieldEvaluator(sol)(rho, phi)
    eta = float(d["eta"])
    d = {k: float(v) for k, v in d.items()}
    ez, ezb, _ = eta_z_parts(d, rho, phi)
    lam = cmath.exp(theta)
    p = complex(_p_cover(rho, phi, sol.params))
    pb = complex(_p_cover(rho, phi, sol.params, conj=True))
    h = math.exp(-eta / 2)
    Az = np.array(
        [[ez / 2, 0, lam * math.exp(eta) * p], [lam * h, 0, 0], [0, lam * h, -ez / 2]], dtype=complex
    )
    Azb = np.array(
        [[-ezb / 2, h / lam, 0], [0, 0, h / lam], [pb * math.exp(eta) / lam, 0, ezb / 2]], dtype=complex
    )
    return LaxMatrices(Az, Azb)


class RayField:
    """Scalar splines of eta, eta_phi, eta_phiphi along a fixed ray, with t-derivatives."""

    def __init__(self, ev: FieldEvaluator, phi: float):
        k = ev.k
        c, s = np.cos(k * phi), np.sin(k * phi)
        coef = ev.spl.c  # (n_coef, M)
        cols = np.stack([coef @ c, coef @ (-k * s), coef @ (-k * k * c)], axis=1)
        self.spl = BSpline(ev.spl.t, cols, ev.spl.k)
        self.d1 = self.spl.derivative(1)
        self.d2 = self.spl.derivative(2)
        self.t_min, self.t_max = ev.t_min, ev.t_max

    def __call__(self, t: float) -> dict:
        if t < self.t_min - 1e-12 or t > self.t_max + 1e-12:
            raise ValueError("rho outside the field grid")
        v, v1, v2 = self.spl(t), self.d1(t), self.d2(t)
        return {
            "eta": v[0], "eta_phi": v[1], "eta_phiphi": v[2],
            "eta_t": v1[0], "eta_tphi": v1[1], "eta_tt": v2[0],
        }


def _local_field(sol: FieldSolution, phi: float):
    fit = sol.fit
    if not fit:
        raise FrameError("field solution carries no local expansion data")

    def f(t: float) -> dict:
        eta, et, ett, ep, etp, epp = eta_local(sol.params, fit, np.array(t), phi)
        return {"eta": float(eta), "eta_t": float(et), "eta_tt": float(ett),
                "eta_phi": float(ep), "eta_tphi": float(etp), "eta_phiphi": float(epp)}

    return f


def _radial_generator(fieldfn, params: ModelParams, theta: np.ndarray, phi: float, strip: bool):
    """Return t -> A(t) with dv/dt = -A v, batched over theta."""
    theta = np.asarray(theta, dtype=complex)
    lam = np.exp(theta)
    ilam = 1.0 / lam
    a = params.alpha
    ep, em = cmath.exp(1j * phi), cmath.exp(-1j * phi)
    ch = np.cosh(theta + 1j * (a + 1) * phi)
    n = theta.size

    def A(t):
        d = fieldfn(t)
        rho = math.exp(t)
        eta = d["eta"]
        h = math.exp(-eta / 2)
        E1 = math.exp(eta)
        p = complex(_p_cover(rho, phi, params))
        pb = complex(_p_cover(rho, phi, params, conj=True))
        out = np.zeros((n, 3, 3), dtype=complex)
        diag = -0.5j * d["eta_phi"]
        out[:, 0, 0] = diag
        out[:, 2, 2] = -diag
        out[:, 0, 1] = rho * em * ilam * h
        out[:, 1, 2] = rho * em * ilam * h
        out[:, 0, 2] = rho * ep * lam * E1 * p
        out[:, 1, 0] = rho * ep * lam * h
        out[:, 2, 1] = rho * ep * lam * h
        out[:, 2, 0] = rho * em * ilam * pb * E1
        if strip:
            sr = rho * 2.0 * rho**a * ch
            for i in range(3):
                out[:, i, i] -= sr
        return out

    return A


def radial_system(sol: FieldSolution, theta: complex, phi: float):
    """rho -> M(rho) = e^{i phi} A_z + e^{-i phi} A_zbar (so that dPsi/drho = -M Psi)."""
    rf = RayField(FieldEvaluator(sol), phi)
    gen = _radial_generator(rf, sol.params, np.array([theta]), phi, strip=False)

    def M(rho: float) -> np.ndarray:
        return gen(math.log(rho))[0] / rho

    return M


def _angular_generator(sol_ev: FieldEvaluator, params: ModelParams, theta: np.ndarray, rho: float):
    """phi -> B(phi) with dv/dphi = -(B - S_phi) v at fixed rho, batched over theta."""
    theta = np.asarray(theta, dtype=complex)
    lam = np.exp(theta)
    ilam = 1.0 / lam
    a = params.alpha
    t = math.log(rho)
    u, ut, utt = sol_ev.modes_at(t)
    k = sol_ev.k
    n = theta.size

    def B(phi):
        c, s = np.cos(k * phi), np.sin(k * phi)
        eta = float(u @ c)
        eta_t = float(ut @ c)
        h = math.exp(-eta / 2)
        E1 = math.exp(eta)
        ep, em = cmath.exp(1j * phi), cmath.exp(-1j * phi)
        p = complex(_p_cover(rho, phi, params))
        pb = complex(_p_cover(rho, phi, params, conj=True))
        out = np.zeros((n, 3, 3), dtype=complex)
        # i rho (e^{i phi} A_z - e^{-i phi} A_zbar); diagonal i eta_t / 2
        out[:, 0, 0] = 0.5j * eta_t
        out[:, 2, 2] = -0.5j * eta_t
        out[:, 0, 2] = 1j * rho * ep * lam * E1 * p
        out[:, 1, 0] = 1j * rho * ep * lam * h
        out[:, 2, 1] = 1j * rho * ep * lam * h
        out[:, 0, 1] = -1j * rho * em * ilam * h
        out[:, 1, 2] = -1j * rho * em * ilam * h
        out[:, 2, 0] = -1j * rho * em * ilam * pb * E1
        sphi = 2j * rho ** (a + 1) * np.sinh(theta + 1j * (a + 1) * phi)
        for i in range(3):
            out[:, i, i] -= sphi
        return out

    return B


def strip_exponent(rho: float, phi: float, theta, alpha: float):
    """S = 2 rho^{a+1} cosh(theta + i (a+1) phi)/(a+1)."""
    return 2.0 * rho ** (alpha + 1) * np.cosh(np.asarray(theta, dtype=complex) + 1j * (alpha + 1) * phi) / (alpha + 1)


# --------------------------------------------------------------------------------------
# WKB data at large rho


@dataclass(frozen=True)
class WKBVector:
    """Psi = prefactor * exp(log_factor), kept apart to avoid underflow."""

    prefactor: np.ndarray
    log_factor: complex

    def value(self) -> np.ndarray:
        return self.prefactor * cmath.exp(self.log_factor)


def subdominance_ok(theta: complex, phi: float, alpha: float) -> bool:
    return abs(complex(theta).imag + (alpha + 1) * phi) < math.pi / 2


def wkb_initial_vector(
    params: ModelParams, theta: complex, rho: float, phi: float, exact: bool = True, n_terms: int = 80
) -> WKBVector:
    """Subdominant vector at large rho.

    ``exact=False`` returns the leading form e^{theta/2}(e^{i a phi}, 1, e^{-i a phi})
    exp(-S). ``exact=True`` returns the solution that is exact when eta equals the
    vacuum -(1/3) ln|p|^2 (which the true field approaches exponentially fast):
    prefactors (p/pbar)^{+-1/6} and exponent -lambda w(z) - w(zbar)/lambda with
    w' = p^{1/3}; both reduce to the leading form as rho -> infinity.
    """
    params.require_wkb()
    if not subdominance_ok(theta, phi, params.alpha):
        raise ValueError("(theta, phi) outside the subdominance wedge |Im theta + (a+1) phi| < pi/2")
    a, s = params.alpha, params.s
    theta = complex(theta)
    S = complex(strip_exponent(rho, phi, theta, a))
    half = cmath.exp(theta / 2)
    if not exact or s == 0:
        pref = half * np.array([cmath.exp(1j * a * phi), 1.0, cmath.exp(-1j * a * phi)])
        return WKBVector(pref, -S)
    if rho <= s:
        raise ValueError("exact WKB start needs rho > s")
    r = (s / rho) ** (3 * a)
    u = r * cmath.exp(-3j * a * phi)
    ub = r * cmath.exp(3j * a * phi)
    ratio = cmath.exp(1j * a * phi) * (1 - u) ** (1 / 6) * (1 - ub) ** (-1 / 6)
    pref = half * np.array([ratio, 1.0, 1.0 / ratio])
    lam = cmath.exp(theta)
    tail = 0.0j
    for n in range(1, n_terms):
        ex = a + 1 - 3 * a * n
        cn = binom(1 / 3, n) * (-(s ** (3 * a))) ** n / ex
        term = cn * rho**ex * (lam * cmath.exp(1j * ex * phi) + cmath.exp(-1j * ex * phi) / lam)
        tail += term
        # stop on a magnitude bound: individual terms can cancel exactly by symmetry
        bound = abs(cn) * rho**ex * (abs(lam) + 1.0 / abs(lam))
        if bound < 1e-18 * (1 + abs(tail)):
            break
    return WKBVector(pref, -S - tail)


def default_start_radius(sol: FieldSolution, target: float = 45.0) -> float:
    a = sol.params.alpha
    r = (target * (a + 1) / math.sqrt(12.0)) ** (1.0 / (a + 1))
    r = max(r, 1.5 * sol.params.s)
    r = min(r, float(sol.rho[-1]))
    if r <= sol.params.s:
        raise ValueError("field grid does not extend beyond rho = s")
    return r


# --------------------------------------------------------------------------------------
# origin frame


@dataclass(frozen=True)
class OriginFrame:
    """Columns are Psi_+, Psi_0, Psi_- at rho (batched over theta: shape (n, 3, 3))."""

    rho: float
    phi: float
    theta: np.ndarray
    matrix: np.ndarray
    gauge: str = "Psi0-unit"

    @property
    def cond(self) -> np.ndarray:
        return np.linalg.cond(self.matrix)


def check_frame_resonance(g: float, tol: float = 1e-6) -> None:
    """The local exponents -g, 1, g+2 differ by g+1 and 2g+2; integer gaps are resonant."""
    for d in (g + 1.0, 2.0 * g + 2.0):
        if abs(d - round(d)) < tol:
            raise FrameError(f"resonant origin exponents: gap {d} is an integer")


def frame_limits(theta: np.ndarray, phi: float, g: float) -> np.ndarray:
    """Limit vectors of Psi_+, Psi_0, Psi_- at the apex, as columns."""
    theta = np.asarray(theta, dtype=complex)
    n = theta.size
    F = np.zeros((n, 3, 3), dtype=complex)
    F[:, 2, 0] = np.exp(-(1j * phi + theta) * g)
    F[:, 1, 1] = 1.0
    F[:, 0, 2] = np.exp((1j * phi + theta) * g)
    return F


def origin_frame(
    sol: FieldSolution,
    theta,
    rho_min: float,
    phi: float,
    t_tiny: float = -60.0,
    tol: float = 1e-12,
    rho_points: Optional[Sequence[float]] = None,
) -> list[OriginFrame]:
    """Psi_+, Psi_0, Psi_- at rho_min (and any extra ``rho_points``).

    Every solution of the linear problem tends to a constant vector at the apex
    (the generator in t = ln rho decays like a positive power of rho), so each
    frame solution is fixed by its limit vector. We start from the limit vectors
    at rho = e^{t_tiny} and integrate outward using the apex expansion of eta.
    """
    check_frame_resonance(sol.params.g)
    msg = check_field_resonance(sol.params)
    if msg:
        raise FrameError(msg)
    theta = np.atleast_1d(np.asarray(theta, dtype=complex))
    pts = sorted(set([float(rho_min)] + [float(r) for r in (rho_points or [])]))
    fit_lim = sol.fit.get("rho_fit", 0.1)
    if pts[-1] > fit_lim:
        raise FrameError(f"projection radius {pts[-1]} beyond the apex expansion window {fit_lim}")
    n = theta.size
    F0 = frame_limits(theta, phi, sol.params.g)
    # state layout (n, 3 columns, 3 components): integrate each column
    v0 = np.transpose(F0, (0, 2, 1)).reshape(n * 3, 3)
    th3 = np.repeat(theta, 3)
    gen = _radial_generator(_local_field(sol, phi), sol.params, th3, phi, strip=False)
    ts = [math.log(r) for r in pts]
    tr = integrate_ray(gen, t_tiny, ts[-1], v0, tol=tol, t_eval=np.array(ts) if len(ts) > 1 else None)
    states = tr.states if len(ts) > 1 else tr.states[-1:]
    out = []
    for r, st in zip(pts, states):
        mat = np.transpose(st.reshape(n, 3, 3), (0, 2, 1))
        out.append(OriginFrame(r, phi, theta, mat))
    return out


# --------------------------------------------------------------------------------------
# Q extraction


def adjusted_ray(theta: complex, alpha: float) -> float:
    """phi* = -Im(theta)/(alpha+1): the WKB exponent is real on this ray."""
    return -complex(theta).imag / (alpha + 1)


def _transport_inward(sol, ev, theta, phi, rho_start, rho_targets, tol):
    """Stripped WKB vector transported from rho_start to each target radius along phi."""
    theta = np.atleast_1d(np.asarray(theta, dtype=complex))
    a = sol.params.alpha
    v0 = []
    for th in theta:
        w = wkb_initial_vector(sol.params, th, rho_start, phi)
        S = complex(strip_exponent(rho_start, phi, th, a))
        v0.append(w.prefactor * cmath.exp(w.log_factor + S))
    v0 = np.array(v0)
    rf = RayField(ev, phi)
    gen = _radial_generator(rf, sol.params, theta, phi, strip=True)
    ts = sorted({math.log(r) for r in rho_targets}, reverse=True)
    tr = integrate_ray(gen, math.log(rho_start), ts[-1], v0, tol=tol, t_eval=np.array(ts))
    return {round(math.exp(t), 14): st for t, st in zip(tr.t, tr.states)}, tr


def compute_q_triple(
    sol: FieldSolution,
    theta,
    rho_proj: float = 2e-3,
    tol: float = 1e-12,
    rho_start: Optional[float] = None,
) -> list[QTriple]:
    """Q^{+,0,-}(theta) in gauge "Psi0-unit" for each theta (batched by ray)."""
    sol.params.require_wkb()
    theta = np.atleast_1d(np.asarray(theta, dtype=complex))
    a = sol.params.alpha
    ev = FieldEvaluator(sol)
    if rho_start is None:
        rho_start = default_start_radius(sol)
    if rho_proj < sol.rho[0]:
        raise ValueError("projection radius below the field grid")
    results: dict[int, QTriple] = {}
    rays: dict[float, list[int]] = {}
    for i, th in enumerate(theta):
        rays.setdefault(round(adjusted_ray(th, a), 15), []).append(i)
    for phi, idx in rays.items():
        ths = theta[idx]
        r1, r2 = rho_proj, 2 * rho_proj
        states, _ = _transport_inward(sol, ev, ths, phi, rho_start, [r1, r2], tol)
        frames = origin_frame(sol, ths, r1, phi, tol=tol, rho_points=[r2])
        qs = []
        for fr in frames:
            st = states[round(fr.rho, 14)]
            S = strip_exponent(fr.rho, phi, ths, a)
            psi = st * np.exp(-S)[:, None]
            q = np.linalg.solve(fr.matrix, psi[..., None])[..., 0]
            qs.append((q, fr.cond))
        (q1, c1), (q2, _) = qs
        drift = np.max(np.abs(q1 - q2) / np.maximum(np.abs(q1), 1e-300), axis=1)
        for j, i in enumerate(idx):
            results[i] = QTriple(
                complex(q1[j, 0]), complex(q1[j, 1]), complex(q1[j, 2]), complex(theta[i]),
                "Psi0-unit", cond=float(c1[j]), drift=float(drift[j]),
            )
    return [results[i] for i in range(theta.size)]


def chi_gauge_factors(theta: complex, params: ModelParams, eta0: float) -> tuple[complex, complex, complex]:
    """Multipliers taking "Psi0-unit" triples to the "chi-unit" gauge.

    In "chi-unit" the scalar solution in the variable x = z e^{theta/(a+1)},
    normalized as x^{-a} exp(...) at infinity, reads
    Q+ x^{-g}(1 + ...) + Q0 x (1 + ...) + Q- x^{g+2}(1 + ...).
    """
    a, g = params.alpha, params.g
    th = complex(theta)
    fp = cmath.exp(eta0 / 2) * cmath.exp(((1 + g) / (a + 1) - g - 1.5) * th)
    f0 = -cmath.exp(-0.5 * th) / (g + 1)
    fm = cmath.exp((g + 0.5 - (g + 1) / (a + 1)) * th) * cmath.exp(-eta0 / 2) / (2 * (g + 1) ** 2)
    return fp, f0, fm


def to_chi_gauge(q: QTriple, sol: FieldSolution) -> QTriple:
    if q.gauge == "chi-unit":
        return q
    f = chi_gauge_factors(q.theta, sol.params, sol.eta0)
    return q.scaled(*f, gauge="chi-unit")


# --------------------------------------------------------------------------------------
# rotated scalar solutions


@dataclass(frozen=True)
class PsiData:
    """Scalar data (psi_k, psi_k', psi_k'') with x-derivatives at radii along a ray."""

    k: float
    theta: np.ndarray
    rho: np.ndarray
    phi: float
    values: np.ndarray  # (n_theta, n_rho, 3)
    vectors: np.ndarray  # Psi(theta - 2 pi i k/3) at the points, (n_theta, n_rho, 3)


def _theta_k(theta, k):
    return np.asarray(theta, dtype=complex) - 2j * math.pi * k / 3.0


def massive_psi_k(
    sol: FieldSolution,
    theta,
    k: float,
    rho: Sequence[float],
    phi: float = 0.0,
    rho_hi: Optional[float] = None,
    tol: float = 1e-12,
) -> PsiData:
    """psi_k = omega^k psi evaluated at the spectral point theta - 2 pi i k/3.

    The vector solution for the shifted spectral point is built on its own
    subdominant ray, carried along an arc at rho_hi to the common ray ``phi`` and
    inward to the requested radii. Scalar data follow from the vector via
    psi = lambda^{-3/2} e^{eta/2} Psi_3, psi_z = eta_z psi - lambda^{-1/2} Psi_2 and
    psi_zz = lambda^{1/2} e^{-eta/2} Psi_1 + eta_zz psi + eta_z psi_z, and are
    rescaled to the x = z lambda^{1/(a+1)} normalization.
    """
    sol.params.require_wkb()
    a = sol.params.alpha
    theta = np.atleast_1d(np.asarray(theta, dtype=complex))
    rho = np.asarray(rho, dtype=float)
    if rho_hi is None:
        rho_hi = float(max(rho.max(), 2.0, 1.5 * sol.params.s))
    thk = _theta_k(theta, k)
    ev = FieldEvaluator(sol)
    rho_start = default_start_radius(sol)
    # group by the natural ray of each shifted theta (all equal when theta is real)
    phis = {round(adjusted_ray(t, a), 15) for t in thk}
    if len(phis) != 1:
        raise ValueError("theta values must share an imaginary part")
    phi_k = phis.pop()
    states, _ = _transport_inward(sol, ev, thk, phi_k, rho_start, [rho_hi], tol)
    v = states[round(rho_hi, 14)]
    if phi_k != phi:
        B = _angular_generator(ev, sol.params, thk, rho_hi)
        v = integrate_ray(B, phi_k, phi, v, tol=tol).final
    rf = RayField(ev, phi)
    gen = _radial_generator(rf, sol.params, thk, phi, strip=True)
    targets = np.unique(rho)[::-1]
    if targets[0] > rho_hi:
        raise ValueError("radii must not exceed rho_hi")
    t_eval = np.log(targets)
    if targets.size == 1 and targets[0] == rho_hi:
        sts = v[None]
    else:
        tr = integrate_ray(gen, math.log(rho_hi), float(t_eval[-1]), v, tol=tol, t_eval=t_eval)
        sts = tr.states
    lookup = {float(r): s for r, s in zip(targets, sts)}
    vec = np.stack([lookup[float(r)] for r in rho], axis=1)  # (n_theta, n_rho, 3)
    vals = np.empty_like(vec)
    wk = cmath.exp(2j * math.pi * k / (3 * a + 3))
    for j, r in enumerate(rho):
        S = strip_exponent(r, phi, thk, a)
        Psi = vec[:, j, :] * np.exp(-S)[:, None]
        vec[:, j, :] = Psi
        d = rf(math.log(r))
        ez, _, ezz = eta_z_parts(d, r, phi)
        eta = d["eta"]
        psi = _e(-1.5, thk) * math.exp(eta / 2) * Psi[:, 2]
        psi_z = ez * psi - _e(-0.5, thk) * Psi[:, 1]
        psi_zz = _e(0.5, thk) * math.exp(-eta / 2) * Psi[:, 0] + ezz * psi + ez * psi_z
        norm = wk * _e(1.0 / (a + 1), thk)
        vals[:, j, 0] = norm * psi
        vals[:, j, 1] = norm * _e(-1.0 / (a + 1), theta) * psi_z
        vals[:, j, 2] = norm * _e(-2.0 / (a + 1), theta) * psi_zz
    return PsiData(k, theta, rho, phi, vals, vec)


def massive_wronskian(sol: FieldSolution, theta, rho: Sequence[float], ks=(-1, 0, 1), **kw) -> np.ndarray:
    """W[psi_k1, psi_k2, psi_k3] in x-derivatives; shape (n_theta, n_rho)."""
    rows = [massive_psi_k(sol, theta, k, rho, **kw).values for k in ks]
    return np.linalg.det(np.stack(rows, axis=-2))


def massive_u(sol: FieldSolution, theta, k1: float, k2: float, rho: Sequence[float], **kw) -> np.ndarray:
    """u_{k1,k2} = psi_k1 psi_k2' - psi_k2 psi_k1'."""
    p1 = massive_psi_k(sol, theta, k1, rho, **kw).values
    p2 = massive_psi_k(sol, theta, k2, rho, **kw).values
    return p1[..., 0] * p2[..., 1] - p2[..., 0] * p1[..., 1]
