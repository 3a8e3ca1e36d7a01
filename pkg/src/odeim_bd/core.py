"""Shared numerical substrate: model parameters, spectral maps, ray integration, root finding."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp


class IntegrationError(RuntimeError):
    """Raised when an adaptive transport fails (step underflow, non-finite data)."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver does not converge."""


class BranchError(ValueError):
    """Raised for inputs lying on a branch cut of a multivalued power."""


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    g: float
    s: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not -1.0 < self.g < 0.5:
            raise ValueError(f"g must satisfy -1 < g < 1/2, got {self.g}")
        if not self.s >= 0:
            raise ValueError(f"s must be non-negative, got {self.s}")

    def require_wkb(self):
        if not self.alpha > 0.5:
            raise ValueError(f"WKB initial data needs alpha > 1/2, got {self.alpha}")

    @property
    def twist(self) -> float:
        """g(g+2), the strength of the origin singularity in the scalar equations."""
        return self.g * (self.g + 2.0)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "g": self.g, "s": self.s}


@dataclass(frozen=True)
class SpectralPoint:
    theta: complex
    E: complex
    E_tilde: complex

    @classmethod
    def from_theta(cls, theta: complex, params: ModelParams) -> "SpectralPoint":
        E, Et = scaling_map(theta, params)
        return cls(complex(theta), E, Et)

    @property
    def lam(self) -> complex:
        return cmath.exp(self.theta)


def potential(z: complex, params: ModelParams) -> complex:
    """p(z) = z^{3 alpha} - s^{3 alpha} on the principal branch."""
    z = complex(z)
    mu = 3.0 * params.alpha
    s_pow = params.s ** mu
    if z == 0:
        return -s_pow
    if not float(mu).is_integer() and z.imag == 0.0 and z.real < 0:
        raise BranchError("z on the negative real axis with non-integer 3*alpha")
    if float(mu).is_integer():
        return z ** int(mu) - s_pow
    return cmath.exp(mu * cmath.log(z)) - s_pow


def omega(alpha: float) -> complex:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return cmath.exp(2j * math.pi / (3.0 * alpha + 3.0))


def scaling_map(theta: complex, params: ModelParams) -> tuple[complex, complex]:
    """(E, E~) = s^{3a} exp(+-3 a theta/(a+1))."""
    if params.s == 0:
        raise ValueError("scaling map is degenerate at s = 0")
    a = params.alpha
    base = params.s ** (3.0 * a)
    k = 3.0 * a / (a + 1.0)
    theta = complex(theta)
    return base * cmath.exp(k * theta), base * cmath.exp(-k * theta)


def theta_of_E(E: complex, alpha: float) -> complex:
    """Inverse of E = exp(3 alpha theta/(alpha+1)) on the principal logarithm."""
    return (alpha + 1.0) / (3.0 * alpha) * cmath.log(E)


def E_of_theta(theta: complex, alpha: float) -> complex:
    return cmath.exp(3.0 * alpha * complex(theta) / (alpha + 1.0))


# --------------------------------------------------------------------------------------
# ray integration


@dataclass(frozen=True)
class RayTrajectory:
    t: np.ndarray
    states: np.ndarray
    tol: float
    nfev: int
    dense: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.t.size > 1:
            d = np.diff(self.t)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("trajectory grid must be strictly monotone")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __call__(self, t):
        if self.dense is None:
            raise ValueError("trajectory was computed without dense output")
        return self.dense(t)


def integrate_ray(
    system: Callable[[float], np.ndarray],
    t_start: float,
    t_end: float,
    v0,
    tol: float = 1e-10,
    t_eval=None,
    dense: bool = False,
    first_step: Optional[float] = None,
) -> RayTrajectory:
    """Integrate dv/dt = -A(t) v between t_start and t_end.

    ``system(t)`` returns A with shape (..., n, n) matching ``v0`` of shape (..., n);
    leading axes are independent problems sharing one adaptive step sequence.
    Direction may be decreasing. Uses an embedded 8(5,3) Runge-Kutta pair.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    v0 = np.asarray(v0, dtype=complex)
    shape = v0.shape
    n = shape[-1]
    scale = max(float(np.max(np.abs(v0))), 1e-300)

    def rhs(t, y):
        A = np.asarray(system(t))
        if not np.all(np.isfinite(A)):
            raise IntegrationError(f"non-finite system matrix at t={t!r}")
        v = y.reshape(shape)
        return -np.einsum("...ij,...j->...i", A, v).reshape(-1)

    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
    kw = {}
    if first_step is not None:
        kw["first_step"] = first_step
    res = solve_ivp(
        rhs,
        (float(t_start), float(t_end)),
        v0.reshape(-1),
        method="DOP853",
        rtol=tol,
        atol=tol * scale * 1e-3,
        t_eval=t_eval,
        dense_output=dense,
        **kw,
    )
    if res.status != 0:
        raise IntegrationError(f"ray integration failed: {res.message}")
    states = res.y.T.reshape((res.t.size,) + shape)
    if not np.all(np.isfinite(states)):
        raise IntegrationError("non-finite state during transport")
    dense_fn = None
    if dense:
        sol = res.sol

        def dense_fn(t, _sol=sol, _shape=shape):
            t = np.asarray(t, dtype=float)
            out = _sol(t)
            if t.ndim == 0:
                return out.reshape(_shape)
            return out.T.reshape((t.size,) + _shape)

    return RayTrajectory(t=res.t, states=states, tol=tol, nfev=res.nfev, dense=dense_fn)


# --------------------------------------------------------------------------------------
# root finding


def find_zero(
    f: Callable[[complex], complex],
    seed: complex,
    tol: float = 1e-12,
    max_iter: int = 60,
    window: Optional[tuple[complex, float]] = None,
    step: float = 1e-3,
    ftol_abs: float = 0.0,
) -> complex:
    """Complex secant iteration from ``seed``.

    ``window`` is (centre, radius); iterates leaving it abort the search.
    The result must reduce |f| by a factor 1e6 relative to the seed value
    (or fall under ``ftol_abs``), otherwise ConvergenceError is raised.
    """
    x0 = complex(seed)
    x1 = x0 + step
    f0 = complex(f(x0))
    f_seed = abs(f0)
    if f_seed == 0.0:
        return x0
    f1 = complex(f(x1))
    for _ in range(max_iter):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not cmath.isfinite(x2):
            raise ConvergenceError("secant produced a non-finite iterate")
        if window is not None and abs(x2 - window[0]) > window[1]:
            raise ConvergenceError(f"root escaped the search window at {x2}")
        x0, f0 = x1, f1
        x1 = x2
        f1 = complex(f(x1))
        if f1 == 0.0 or abs(x1 - x0) <= tol * (1.0 + abs(x1)):
            break
    else:
        raise ConvergenceError(f"secant did not converge in {max_iter} iterations")
    if abs(f1) > max(1e-6 * f_seed, ftol_abs):
        raise ConvergenceError(
            f"|f| only reduced from {f_seed:.3e} to {abs(f1):.3e} near {x1}"
        )
    return x1
