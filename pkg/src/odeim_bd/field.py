"""Solver for the modified Bullough-Dodd equation on the cone.

In t = ln(rho) and on the real slice the equation reads

    eta_tt + eta_phiphi + 4 e^{2t} (e^{-eta} - |P|^2 e^{2 eta}) = 0,
    |P|^2 = rho^{6a} - 2 s^{3a} rho^{3a} cos(3 a phi) + s^{6a}.

The field is expanded in cos(3 a m phi), m = 0..n_modes-1. Each mode profile is
discretized with fourth-order finite differences on a uniform t grid; the
nonlinear terms are evaluated pseudo-spectrally on Chebyshev-Gauss (DCT-II)
angle nodes and the whole system is relaxed by Newton's method.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import make_interp_spline
from scipy.sparse.linalg import spsolve

from .core import ConvergenceError, ModelParams

log = logging.getLogger(__name__)

FIELD_FORMAT = "odeim-bd/field/v1"


class ResonanceWarning(UserWarning):
    pass


class BoundaryClosureError(ValueError):
    pass


@dataclass(frozen=True)
class FieldConfig:
    rho_min: float = 1e-4
    rho_max: float = 12.0
    n_rho: int = 2000
    n_modes: int = 12
    newton_max_iter: int = 60
    newton_damping: float = 1.0
    residual_tol: float = 1e-8
    n_colloc: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.rho_min < self.rho_max:
            raise ValueError("need 0 < rho_min < rho_max")
        if self.n_rho < 7:
            raise ValueError("n_rho must be at least 7 for the fourth-order stencils")
        if self.n_modes < 1:
            raise ValueError("n_modes must be at least 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.newton_damping <= 1:
            raise ValueError("newton_damping must lie in (0, 1]")

    @property
    def collocation_points(self) -> int:
        return self.n_colloc or max(4 * self.n_modes, 16)


# --------------------------------------------------------------------------------------
# local expansion data at the apex


def small_rho_exponents(params: ModelParams) -> dict:
    """Exponents (in rho) and predicted coefficients of the leading mode-0 corrections.

    The three sources e^{-eta}, s^{6a} e^{2 eta} and rho^{6a} e^{2 eta} produce
    rho^{2g+2}, rho^{2-4g} and rho^{6a+2-4g} with coefficients fixed by eta0.
    """
    a, g, s = params.alpha, params.g, params.s
    return {
        "a1": 2.0 * g + 2.0,
        "a2": 2.0 - 4.0 * g,
        "a3": 6.0 * a + 2.0 - 4.0 * g,
        "c1": lambda eta0: -math.exp(-eta0) / (g + 1.0) ** 2,
        "c2": lambda eta0: s ** (6.0 * a) * math.exp(2.0 * eta0) / (1.0 - 2.0 * g) ** 2,
        "c3": lambda eta0: math.exp(2.0 * eta0) / (3.0 * a + 1.0 - 2.0 * g) ** 2,
    }


def check_field_resonance(params: ModelParams, tol: float = 1e-6, depth: int = 30) -> Optional[str]:
    """Return a message if g+1 or 1-2g meets the lattice {3m + 3 a n}, or if they coincide."""
    g, a = params.g, params.alpha
    if abs((g + 1.0) - (1.0 - 2.0 * g)) < tol:
        return f"exponents g+1 and 1-2g coincide at g={g}"
    for d in (g + 1.0, 1.0 - 2.0 * g):
        for n in range(depth):
            rest = d - 3.0 * a * n
            if rest < -tol:
                break
            m = round(rest / 3.0)
            if m >= 0 and (m > 0 or n > 0) and abs(rest - 3.0 * m) < tol:
                return f"exponent {d} meets the lattice at 3*{m} + 3a*{n}"
    return None


# --------------------------------------------------------------------------------------
# solution container


@dataclass(frozen=True)
class FieldSolution:
    params: ModelParams
    config: FieldConfig
    t: np.ndarray
    modes: np.ndarray  # shape (n_modes, n_rho)
    residual: float
    eta0: float
    gamma: tuple
    iterations: int = 0
    fit: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def rho(self) -> np.ndarray:
        return np.exp(self.t)

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]

    def eta_grid(self, phi) -> np.ndarray:
        """eta on the solve grid at the given angles, shape (len(phi), n_rho)."""
        phi = np.atleast_1d(phi)
        m = np.arange(self.n_modes)
        basis = np.cos(3.0 * self.params.alpha * np.outer(phi, m))
        return basis @ self.modes

    # -- serialization --------------------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "format": FIELD_FORMAT,
            "params": self.params.to_dict(),
            "config": asdict(self.config),
            "grid": {"t": self.t.tolist()},
            "modes": self.modes.tolist(),
            "eta0": self.eta0,
            "gamma": [x if math.isfinite(x) else None for x in self.gamma],
            "residual": self.residual,
            "iterations": self.iterations,
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "FieldSolution":
        doc = json.loads(text)
        if doc.get("format") != FIELD_FORMAT:
            raise ValueError(f"unsupported field document format {doc.get('format')!r}")
        params = ModelParams(**doc["params"])
        config = FieldConfig(**doc["config"])
        sol = cls(
            params=params,
            config=config,
            t=np.array(doc["grid"]["t"], dtype=float),
            modes=np.array(doc["modes"], dtype=float),
            residual=float(doc["residual"]),
            eta0=float(doc["eta0"]),
            gamma=tuple(float("nan") if x is None else float(x) for x in doc["gamma"]),
            iterations=int(doc.get("iterations", 0)),
        )
        # the local fit is a deterministic function of the modes; rebuild it
        try:
            fit = local_expansion_coeffs(sol)
        except ValueError:
            return sol
        return replace(sol, fit=fit)


# --------------------------------------------------------------------------------------
# discretization


def _d2_matrix(n: int, h: float) -> sp.csr_matrix:
    """Fourth-order second-derivative rows for 1..n-2 (rows 0 and n-1 left empty)."""
    D = sp.lil_matrix((n, n))
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    one_sided = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / (12.0 * h * h)
    D[1, 0:6] = one_sided
    D[n - 2, n - 6 : n] = one_sided[::-1]
    for i in range(2, n - 2):
        D[i, i - 2 : i + 3] = c
    return D.tocsr()


_D1_LEFT = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def _angle_transforms(n_modes: int, K: int, alpha: float):
    """Synthesis C (K x M) and analysis P (M x K) on DCT-II nodes of the half period."""
    psi = (np.arange(K) + 0.5) * np.pi / K
    m = np.arange(n_modes)
    C = np.cos(np.outer(psi, m))
    P = (2.0 / K) * np.cos(np.outer(m, psi))
    P[0] *= 0.5
    phi = psi / (3.0 * alpha)
    return C, P, phi


def p_abs2(rho, phi, params: ModelParams):
    """|p(z)|^2 on the real slice."""
    a, s = params.alpha, params.s
    r3 = np.asarray(rho) ** (3.0 * a)
    s3 = s ** (3.0 * a)
    return r3 * r3 - 2.0 * s3 * r3 * np.cos(3.0 * a * np.asarray(phi)) + s3 * s3


def vacuum_modes(rho: float, params: ModelParams, n_modes: int, K: int = 256) -> np.ndarray:
    """Cosine coefficients of eta_vac = -(1/3) ln|P|^2 at one radius (needs rho != s)."""
    C, P, phi = _angle_transforms(n_modes, K, params.alpha)
    vals = -np.log(p_abs2(rho, phi, params)) / 3.0
    return P @ vals


def initial_guess(t: np.ndarray, params: ModelParams) -> np.ndarray:
    """-2 (g + (a - g) sigma(rho)) ln rho with a smooth switch around rho = s (or 1)."""
    rs = params.s if params.s > 0 else 1.0
    x = 4.0 * (t - math.log(rs))
    sigma = 0.5 * (1.0 + np.tanh(x))
    return -2.0 * (params.g + (params.alpha - params.g) * sigma) * t


class _System:
    def __init__(self, params: ModelParams, config: FieldConfig):
        self.params = params
        self.config = config
        n = config.n_rho
        M = config.n_modes
        self.n, self.M = n, M
        self.t = np.linspace(math.log(config.rho_min), math.log(config.rho_max), n)
        self.h = self.t[1] - self.t[0]
        K = config.collocation_points
        self.C, self.P, self.phi = _angle_transforms(M, K, params.alpha)
        rho = np.exp(self.t)
        self.pp = p_abs2(rho[:, None], self.phi[None, :], params)  # (n, K)
        self.w = 4.0 * np.exp(2.0 * self.t)  # (n,)
        self.kk = (3.0 * params.alpha * np.arange(M)) ** 2
        self.D2 = _d2_matrix(n, self.h)
        self.exps = small_rho_exponents(params)
        self.right = vacuum_modes(config.rho_max, params, M) if params.s != config.rho_max else None
        # fixed linear part: D2 on interior rows, minus k^2 on interior rows
        interior = np.ones(n)
        interior[0] = interior[-1] = 0.0
        I_int = sp.diags(interior)
        self.L = (sp.kron(self.D2, sp.identity(M)) - sp.kron(I_int, sp.diags(self.kk))).tocsr()
        self.interior = interior.astype(bool)

    def nonlinear(self, U):
        """Projected source F (n, M), its Jacobian blocks (n, M, M) and scale (n, K)."""
        eta = U @ self.C.T  # (n, K)
        em = np.exp(-eta)
        e2 = self.pp * np.exp(2.0 * eta)
        F = (em - e2) @ self.P.T  # (n, M)
        dF = -em - 2.0 * e2  # (n, K)
        J = np.einsum("mk,ik,kj->imj", self.P, dF, self.C)
        scale = 1.0 + self.w[:, None] * (em + e2)
        return F, J, scale, eta

    def left_bc(self, U):
        """Robin rows at the apex: value and derivative rows wrt U[0..4, :]."""
        e = self.exps
        t0 = self.t[0]
        g = self.params.g
        d1 = _D1_LEFT @ U[:5] / self.h  # (M,)
        res = np.empty(self.M)
        # mode 0
        u0 = U[0, 0]
        eta0 = u0 + 2.0 * g * t0
        terms = []
        for k in ("1", "2", "3"):
            a = e["a" + k]
            c = e["c" + k](eta0)
            terms.append((a, c))
        target = -2.0 * g + sum(a * c * math.exp(a * t0) for a, c in terms)
        # derivative of the target wrt u0: c1 ~ e^{-eta0}, c2, c3 ~ e^{2 eta0}
        dtarget = sum(
            a * c * math.exp(a * t0) * (-1.0 if k == 0 else 2.0) for k, (a, c) in enumerate(terms)
        )
        res[0] = d1[0] - target
        # higher modes: regular, eta_m ~ rho^{3 a m}
        m = np.arange(1, self.M)
        res[1:] = d1[1:] - 3.0 * self.params.alpha * m * U[0, 1:]
        return res, dtarget

    def set_baseline(self, U) -> np.ndarray:
        """Fix an affine-in-t baseline for mode 0 and return the deviation U - baseline.

        Newton iterates on the deviation. The difference stencils annihilate
        affine functions exactly, so the baseline drops out of the derivative
        terms and its rounding is never amplified by 1/h^2.
        """
        u0 = U[:, 0]
        slope = (u0[-1] - u0[0]) / (self.t[-1] - self.t[0])
        self.base = np.zeros((self.n, self.M))
        self.base[:, 0] = u0[0] + slope * (self.t - self.t[0])
        return U - self.base

    def full(self, V):
        return V + self.base

    def residual(self, V):
        U = self.full(V)
        F, J, scale, eta = self.nonlinear(U)
        R = (self.L @ V.reshape(-1)).reshape(self.n, self.M) + self.w[:, None] * F
        R[0], self._dtarget = self.left_bc(U)
        if self.right is not None:
            R[-1] = U[-1] - self.right
        else:
            R[-1] = 0.0
        return R, J, scale, eta

    def jacobian(self, J):
        n, M = self.n, self.M
        blocks = self.w[:, None, None] * J
        blocks[0] = 0.0
        blocks[-1] = 0.0
        Jn = self.L + sp.block_diag(list(blocks), format="csr")
        Jn = Jn.tolil()
        # left boundary rows
        for m in range(M):
            row = m
            Jn.rows[row] = []
            Jn.data[row] = []
            for j in range(5):
                Jn[row, j * M + m] = _D1_LEFT[j] / self.h
        Jn[0, 0] = Jn[0, 0] - self._dtarget
        for m in range(1, M):
            Jn[m, m] = Jn[m, m] - 3.0 * self.params.alpha * m
        # right boundary rows: Dirichlet
        for m in range(M):
            row = (n - 1) * M + m
            Jn.rows[row] = []
            Jn.data[row] = []
            Jn[row, row] = 1.0
        return Jn.tocsc()

    def scaled_residual(self, R, U):
        """Max residual measured pointwise in the angle, relative to the source size."""
        _, _, scale, _ = self.nonlinear(U)
        Rphys = R[1:-1] @ self.C.T
        return float(np.max(np.abs(Rphys) / scale[1:-1]))


def closure_error_estimate(params: ModelParams, config: FieldConfig) -> dict:
    """Magnitude of the first neglected terms at each end of the grid."""
    e = small_rho_exponents(params)
    lo = min(e["a1"], e["a2"])
    left = config.rho_min ** (2.0 * lo) + config.rho_min ** (lo + 3.0 * params.alpha)
    a = params.alpha
    if params.s >= config.rho_max:
        right = float("inf")
    elif params.s == 0:
        right = 0.0
    else:
        right = math.exp(-math.sqrt(12.0) * config.rho_max ** (a + 1.0) / (a + 1.0)) * 10.0
    return {"left": left, "right": right}


def solve_field(params: ModelParams, config: FieldConfig = FieldConfig(), guess=None) -> FieldSolution:
    """Newton relaxation of the mode system; returns a FieldSolution meeting residual_tol."""
    msg = check_field_resonance(params)
    if msg:
        warnings.warn(msg, ResonanceWarning, stacklevel=2)
    closure = closure_error_estimate(params, config)
    if closure["right"] > config.residual_tol:
        raise BoundaryClosureError(
            f"outer closure error {closure['right']:.2e} exceeds residual_tol; increase rho_max"
        )
    if closure["left"] > config.residual_tol:
        warnings.warn(
            f"apex closure error estimate {closure['left']:.2e} exceeds residual_tol; consider a smaller rho_min",
            stacklevel=2,
        )
    sys_ = _System(params, config)
    n, M = sys_.n, sys_.M
    U = np.zeros((n, M))
    if guess is not None:
        U[:] = guess
    else:
        U[:, 0] = initial_guess(sys_.t, params)
    U = sys_.set_baseline(U)  # from here on U holds the deviation from the baseline
    R, J, scale, _ = sys_.residual(U)
    norm = np.max(np.abs(R) / (1.0 + sys_.w[:, None]))
    it = 0
    for it in range(1, config.newton_max_iter + 1):
        Jn = sys_.jacobian(J)
        dU = spsolve(Jn, -R.reshape(-1)).reshape(n, M)
        step = config.newton_damping
        while True:
            U_new = U + step * dU
            R_new, J_new, _, _ = sys_.residual(U_new)
            norm_new = np.max(np.abs(R_new) / (1.0 + sys_.w[:, None]))
            if np.isfinite(norm_new) and norm_new < norm:
                break
            step *= 0.5
            if step < 1e-3:
                break
        if not (np.isfinite(norm_new) and norm_new < norm):
            # no descent possible: either converged to rounding level or stuck
            break
        U, R, J, norm = U_new, R_new, J_new, norm_new
        upd = float(np.max(np.abs(step * dU)))
        log.debug("newton %d: residual %.3e step %.3g update %.3e", it, norm, step, upd)
        if upd < 1e-10:
            # quadratic convergence: the next correction would sit below rounding
            break
    res = sys_.scaled_residual(R, sys_.full(U))
    if not res <= config.residual_tol:
        raise ConvergenceError(f"Newton relaxation stalled: scaled residual {res:.3e} after {it} iterations")
    modes = sys_.full(U).T.copy()
    sol = FieldSolution(params, config, sys_.t.copy(), modes, res, float("nan"), (), iterations=it)
    try:
        data = local_expansion_coeffs(sol)
    except ValueError:
        return sol
    return FieldSolution(
        params, config, sol.t, modes, res, data["eta0"], tuple(data["gamma"]), iterations=it, fit=data
    )


# --------------------------------------------------------------------------------------
# evaluation


class FieldEvaluator:
    """Quintic-spline evaluation of eta and its derivatives at (rho, phi)."""

    def __init__(self, sol: FieldSolution):
        self.sol = sol
        self.alpha = sol.params.alpha
        self.spl = make_interp_spline(sol.t, sol.modes.T, k=5)
        self.d1 = self.spl.derivative(1)
        self.d2 = self.spl.derivative(2)
        self.t_min, self.t_max = float(sol.t[0]), float(sol.t[-1])
        self.k = 3.0 * self.alpha * np.arange(sol.n_modes)

    def modes_at(self, t):
        if np.any(np.asarray(t) < self.t_min - 1e-12) or np.any(np.asarray(t) > self.t_max + 1e-12):
            raise ValueError("rho outside the field grid")
        return self.spl(t), self.d1(t), self.d2(t)

    def __call__(self, rho, phi):
        """Return dict with eta, eta_rho, eta_phi, eta_rhorho, eta_rhophi, eta_phiphi."""
        rho = np.asarray(rho, dtype=float)
        t = np.log(rho)
        u, ut, utt = self.modes_at(t)
        ang = np.multiply.outer(np.asarray(phi, dtype=float), self.k)
        c, s = np.cos(ang), np.sin(ang)
        eta = np.sum(u * c, axis=-1)
        eta_t = np.sum(ut * c, axis=-1)
        eta_tt = np.sum(utt * c, axis=-1)
        eta_phi = -np.sum(u * s * self.k, axis=-1)
        eta_tphi = -np.sum(ut * s * self.k, axis=-1)
        eta_phiphi = -np.sum(u * c * self.k**2, axis=-1)
        return {
            "eta": eta,
            "eta_rho": eta_t / rho,
            "eta_phi": eta_phi,
            "eta_rhorho": (eta_tt - eta_t) / rho**2,
            "eta_rhophi": eta_tphi / rho,
            "eta_phiphi": eta_phiphi,
            "eta_t": eta_t,
            "eta_tt": eta_tt,
            "eta_tphi": eta_tphi,
        }


def eta_eval(sol: FieldSolution, rho, phi) -> dict:
    return FieldEvaluator(sol)(rho, phi)


def pde_residual_2d(sol: FieldSolution, n_rho: int = 2001, n_phi: int = 128) -> float:
    """Independent check with second-order finite differences on full (t, phi) grids.

    The mode profiles are resampled by the quintic splines onto a (t, phi) grid and
    its refinement by two; the two second-order residuals are Richardson-combined
    on the shared nodes. Returns the max of
    |residual| / (1 + 4 e^{2t}(e^{-eta} + |P|^2 e^{2 eta})) over interior nodes.
    """
    ev = FieldEvaluator(sol)
    period = 2.0 * math.pi / (3.0 * sol.params.alpha)

    def resid(nr, nphi):
        t = np.linspace(sol.t[0], sol.t[-1], nr)
        phi = np.linspace(0.0, period, nphi, endpoint=False)
        eta = ev.spl(t) @ np.cos(np.outer(ev.k, phi))
        ht = t[1] - t[0]
        hp = phi[1] - phi[0]
        ett = (eta[2:] - 2 * eta[1:-1] + eta[:-2]) / ht**2
        epp = (np.roll(eta, -1, axis=1) - 2 * eta + np.roll(eta, 1, axis=1))[1:-1] / hp**2
        e = eta[1:-1]
        rho = np.exp(t[1:-1])[:, None]
        pp = p_abs2(rho, phi[None, :], sol.params)
        src = 4.0 * rho**2 * (np.exp(-e) - pp * np.exp(2 * e))
        scale = 1.0 + 4.0 * rho**2 * (np.exp(-e) + pp * np.exp(2 * e))
        return (ett + epp + src) / scale

    coarse = resid(n_rho, n_phi)
    fine = resid(2 * n_rho - 1, 2 * n_phi)
    # interior coarse node i sits at fine interior index 2 i + 1, every other angle
    shared = fine[1::2, ::2]
    return float(np.max(np.abs((4.0 * shared - coarse) / 3.0)))


# --------------------------------------------------------------------------------------
# local data


def _mode0_exponents(params: ModelParams, cap: float) -> list[float]:
    e = small_rho_exponents(params)
    a1, a2 = e["a1"], e["a2"]
    six = 6.0 * params.alpha
    out = set()
    for n1 in range(0, 12):
        for n2 in range(0, 12):
            for n3 in range(0, 6):
                if n1 + n2 == 0:
                    continue
                v = n1 * a1 + n2 * a2 + n3 * six
                if v <= cap:
                    out.add(round(v, 12))
    return sorted(out)


def _merge_close(values: list[float], tol: float = 0.05) -> list[float]:
    out = []
    for v in sorted(values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def local_expansion_coeffs(sol: FieldSolution, rho_fit: Optional[float] = None, noise: float = 1e-11) -> dict:
    """Fit the apex data of each mode to its local expansion.

    Mode 0: -2 g ln rho + eta0 + c1 rho^{a1} + c2 rho^{a2} + ... with further
    exponents from the lattice n1 a1 + n2 a2 + 6 a n3 as free nuisance columns.
    Mode m >= 1: 2 gamma_m rho^{3 a m} (1 + corrections); gamma_m is nan when
    rho_fit^{3 a m} lies below ``noise``. Returns eta0, gamma,
    fitted and predicted c1, c2, and the condition number of the mode-0 fit.
    """
    params = sol.params
    msg = check_field_resonance(params)
    if msg:
        raise ValueError(f"resonant parameters, coefficient fit refused: {msg}")
    e = small_rho_exponents(params)
    t, U = sol.t, sol.modes
    g, a = params.g, params.alpha
    lo = min(e["a1"], e["a2"])
    if rho_fit is None:
        rho_fit = min(0.1, 0.5 * (params.s if params.s > 0 else 1.0))
    sel = t <= math.log(rho_fit)
    if sel.sum() < 20:
        raise ValueError("too few grid points in the fit window")
    tt = t[sel]
    cap = math.log(noise) / math.log(rho_fit)  # exponents beyond cap are below noise
    exps = _mode0_exponents(params, cap)
    exps = _merge_close(exps, 1e-6)
    y = U[0, sel] + 2.0 * g * tt
    cols = [np.ones_like(tt)] + [np.exp(x * tt) for x in exps]
    A = np.stack(cols, axis=1)
    # column scaling for conditioning
    colscale = np.max(np.abs(A), axis=0)
    As = A / colscale
    coef, *_ = np.linalg.lstsq(As, y, rcond=None)
    coef = coef / colscale
    cond = float(np.linalg.cond(As))
    eta0 = float(coef[0])
    fitted = {x: c for x, c in zip(exps, coef[1:])}

    def pick(x):
        k = min(fitted, key=lambda z: abs(z - x))
        return float(fitted[k])

    c1_fit = pick(e["a1"])
    c2_fit = pick(e["a2"]) if params.s > 0 else 0.0
    # higher modes
    gamma = []
    for m in range(1, sol.n_modes):
        base = 3.0 * a * m
        if base > cap:
            # the mode is below the noise floor throughout the window: undetermined
            gamma.append(float("nan"))
            continue
        ex = [base] + [base + x for x in exps if base + x <= cap]
        ex = _merge_close(ex, 1e-6)
        B = np.stack([np.exp(x * tt) for x in ex], axis=1)
        bs = np.max(np.abs(B), axis=0)
        cm, *_ = np.linalg.lstsq(B / bs, U[m, sel], rcond=None)
        gamma.append(float(cm[0] / bs[0]) / 2.0)
    return {
        "eta0": eta0,
        "gamma": gamma,
        "c1_fit": c1_fit,
        "c1_pred": e["c1"](eta0),
        "c2_fit": c2_fit,
        "c2_pred": e["c2"](eta0),
        "c2_pred_printed": -e["c2"](eta0),
        "cond": cond,
        "rho_fit": rho_fit,
        "exponents": exps,
        "mode0_coef": [float(c) for c in coef[1:]],
    }


def eta_local(params: ModelParams, fit: dict, t, phi):
    """The fitted apex expansion evaluated at (t = ln rho, phi), with t- and phi-derivatives."""
    a, g = params.alpha, params.g
    t = np.asarray(t, dtype=float)
    eta = -2.0 * g * t + fit["eta0"]
    eta_t = -2.0 * g * np.ones_like(t)
    eta_tt = np.zeros_like(t)
    eta_p = np.zeros_like(t)
    eta_tp = np.zeros_like(t)
    eta_pp = np.zeros_like(t)
    for x, c in zip(fit["exponents"], fit["mode0_coef"]):
        v = c * np.exp(x * t)
        eta = eta + v
        eta_t = eta_t + x * v
        eta_tt = eta_tt + x * x * v
    for m, gm in enumerate(fit["gamma"], start=1):
        if not math.isfinite(gm):
            continue
        k = 3.0 * a * m
        v = 2.0 * gm * np.exp(k * t)
        c, s = np.cos(k * phi), np.sin(k * phi)
        eta = eta + v * c
        eta_t = eta_t + k * v * c
        eta_tt = eta_tt + k * k * v * c
        eta_p = eta_p - k * v * s
        eta_tp = eta_tp - k * k * v * s
        eta_pp = eta_pp - k * k * v * c
    return eta, eta_t, eta_tt, eta_p, eta_tp, eta_pp
