"""Q-function scans, zero location, QQ and Bethe Ansatz residuals.

All residuals are formed from triples in the "chi-unit" gauge, in which the
functional relations hold with the constants exactly as stated:

    i sqrt3 Q+(t) = (g+1) [Q+(t + i pi/3) Q0(t - i pi/3) w^{-(g+1)/2}
                           - w^{(g+1)/2} Q+(t - i pi/3) Q0(t + i pi/3)]

    Q(t_n + 2 pi i/3) Q(t_n - i pi/3) / [Q(t_n - 2 pi i/3) Q(t_n + i pi/3)] = -w^{+-(g+1)}

with w = exp(2 pi i/(3 alpha + 3)).
"""
from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .conformal import conformal_q_at_theta, conformal_q_triple
from .core import ConvergenceError, ModelParams, find_zero, omega, scaling_map
from .field import FieldConfig, FieldSolution, solve_field
from .massive import compute_q_triple, to_chi_gauge
from .qtypes import QTriple

log = logging.getLogger(__name__)

SHIFT_QQ = (0.0, 1j * math.pi / 3, -1j * math.pi / 3)
SHIFT_BAE = (2j * math.pi / 3, -1j * math.pi / 3, -2j * math.pi / 3, 1j * math.pi / 3)
SHIFTS_ALL = (0.0, 1j * math.pi / 3, -1j * math.pi / 3, 2j * math.pi / 3, -2j * math.pi / 3)
WHICH = ("plus", "zero", "minus")


class ZeroSearchWarning(UserWarning):
    """A located zero lies off the real axis or fails the smallness check."""


# --------------------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class ConformalSource:
    """Q-functions of the conformal equation at E = exp(3 alpha theta/(alpha+1))."""

    params: ModelParams
    tol: float = 1e-12
    name: str = "conformal"

    def __call__(self, theta) -> list[QTriple]:
        return conformal_q_at_theta(theta, self.params, tol=self.tol)


@dataclass(frozen=True)
class MassiveSource:
    """Q-functions of the massive linear problem, converted to the chi gauge."""

    sol: FieldSolution
    tol: float = 1e-12
    rho_proj: float = 2e-3
    name: str = "massive"

    @property
    def params(self) -> ModelParams:
        return self.sol.params

    def __call__(self, theta) -> list[QTriple]:
        qs = compute_q_triple(self.sol, theta, rho_proj=self.rho_proj, tol=self.tol)
        return [to_chi_gauge(q, self.sol) for q in qs]


def _key(theta: complex) -> tuple[float, float]:
    return (round(theta.real, 11), round(theta.imag, 11))


def _eval_chunk(args):
    source, thetas = args
    return _eval_points(source, thetas)


def _eval_points(source, thetas: np.ndarray) -> list:
    """Evaluate a batch; on failure retry point by point so errors stay local."""
    try:
        return list(source(thetas))
    except Exception:  # noqa: BLE001 - per-point fallback below records the cause
        out = []
        for t in thetas:
            try:
                out.append(source(np.array([t]))[0])
            except Exception as exc:  # noqa: BLE001
                out.append(f"{type(exc).__name__}: {exc}")
        return out


def evaluate_many(source, thetas: Sequence[complex], jobs: int = 1) -> list:
    """QTriples (or error strings) for each theta, batched by imaginary part."""
    thetas = np.asarray(thetas, dtype=complex)
    groups: dict[float, list[int]] = {}
    for i, t in enumerate(thetas):
        groups.setdefault(round(t.imag, 12), []).append(i)
    tasks = []
    for idx in groups.values():
        chunks = np.array_split(np.array(idx), max(1, min(jobs, len(idx))))
        tasks += [c for c in chunks if c.size]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_eval_chunk, [(source, thetas[c]) for c in tasks]))
    else:
        results = [_eval_points(source, thetas[c]) for c in tasks]
    out: list = [None] * thetas.size
    for c, res in zip(tasks, results):
        for i, r in zip(c, res):
            out[i] = r
    return out


# --------------------------------------------------------------------------------------
# scan container


@dataclass(frozen=True)
class ZeroRecord:
    theta: complex
    which: str
    abs_q: float
    bae_residual: complex = complex("nan")
    note: str = ""


@dataclass(frozen=True)
class SpectralScan:
    """Q-triples over a real theta grid and a set of imaginary shifts."""

    source: str
    params: ModelParams
    theta_grid: np.ndarray
    shifts: tuple
    values: dict = field(repr=False)
    errors: dict = field(default_factory=dict, repr=False)
    zeros: tuple = ()
    evaluator: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        g = np.asarray(self.theta_grid, dtype=float)
        if g.size > 1 and not np.all(np.diff(g) > 0):
            raise ValueError("theta grid must be strictly increasing")
        object.__setattr__(self, "theta_grid", g)

    def has(self, theta: complex) -> bool:
        return _key(complex(theta)) in self.values

    def triple(self, theta: complex) -> QTriple:
        """Stored triple at theta, or a fresh evaluation when the scan carries a source."""
        k = _key(complex(theta))
        if k in self.values:
            return self.values[k]
        if k in self.errors:
            raise ConvergenceError(f"evaluation failed at theta={theta}: {self.errors[k]}")
        if self.evaluator is None:
            raise KeyError(f"no data at theta={theta} and no evaluator attached")
        return self.evaluator([complex(theta)])[0]

    def triples(self, thetas: Sequence[complex]) -> list[QTriple]:
        thetas = [complex(t) for t in thetas]
        missing = [t for t in thetas if not self.has(t) and _key(t) not in self.errors]
        if missing and self.evaluator is not None:
            fresh = dict(zip(map(_key, missing), self.evaluator(np.array(missing))))
        else:
            fresh = {}
        return [fresh[_key(t)] if _key(t) in fresh else self.triple(t) for t in thetas]

    def column(self, which: str, shift: complex = 0.0) -> np.ndarray:
        """Q_which on the grid at one shift (nan where evaluation failed)."""
        out = np.full(self.theta_grid.size, complex("nan"))
        for i, t in enumerate(self.theta_grid):
            k = _key(complex(t) + shift)
            if k in self.values:
                out[i] = self.values[k].get(which)
        return out

    def rows(self, shift: complex = 0.0) -> list[QTriple]:
        return [self.values[_key(complex(t) + shift)] for t in self.theta_grid
                if _key(complex(t) + shift) in self.values]

    def with_zeros(self, zeros: Sequence[ZeroRecord]) -> "SpectralScan":
        z = tuple(sorted(zeros, key=lambda r: (r.theta.real, r.which)))
        return SpectralScan(self.source, self.params, self.theta_grid, self.shifts,
                            self.values, self.errors, z, self.evaluator)


def scan_q(
    source,
    theta_grid: Sequence[float],
    shifts: Sequence[complex] = (0.0,),
    jobs: int = 1,
) -> SpectralScan:
    """Evaluate Q-triples at theta + shift for every grid point and shift.

    ``source`` is a :class:`MassiveSource`, a :class:`ConformalSource`, a
    :class:`FieldSolution` (wrapped as massive) or ``ModelParams`` (conformal).
    Failures at individual points are recorded in ``errors`` and do not abort.
    """
    if isinstance(source, FieldSolution):
        source = MassiveSource(source)
    elif isinstance(source, ModelParams):
        source = ConformalSource(source)
    grid = np.asarray(theta_grid, dtype=float)
    pts = [complex(t) + complex(s) for s in shifts for t in grid]
    res = evaluate_many(source, pts, jobs=jobs)
    values, errors = {}, {}
    for t, r in zip(pts, res):
        if isinstance(r, QTriple) and r.is_finite():
            values[_key(t)] = r
        else:
            errors[_key(t)] = r if isinstance(r, str) else "non-finite triple"
            log.warning("Q evaluation failed at theta=%s: %s", t, errors[_key(t)])
    return SpectralScan(source.name, source.params, grid, tuple(complex(s) for s in shifts),
                        values, errors, (), source)


# --------------------------------------------------------------------------------------
# residuals


def qq_terms(q0: QTriple, q_up: QTriple, q_dn: QTriple, g: float, alpha: float):
    """(lhs, first product, second product) of the QQ relation at theta.

    q_up and q_dn are the triples at theta + i pi/3 and theta - i pi/3.
    """
    w = omega(alpha)
    e = (g + 1) / 2
    lhs = 1j * math.sqrt(3) * q0.q_plus
    t1 = (g + 1) * q_up.q_plus * q_dn.q_zero * w ** (-e)
    t2 = (g + 1) * w**e * q_dn.q_plus * q_up.q_zero
    return lhs, t1, t2


def qq_residual_from_triples(q0: QTriple, q_up: QTriple, q_dn: QTriple, g: float, alpha: float) -> complex:
    lhs, t1, t2 = qq_terms(q0, q_up, q_dn, g, alpha)
    scale = max(abs(lhs), abs(t1), abs(t2))
    return (lhs - (t1 - t2)) / scale if scale > 0 else 0j


def qq_residual(scan: SpectralScan, theta: complex) -> complex:
    """Relative residual of the QQ relation at theta, from the scan data."""
    th = complex(theta)
    shifted = [th, th + 1j * math.pi / 3, th - 1j * math.pi / 3]
    if scan.evaluator is None and not all(scan.has(t) for t in shifted):
        raise KeyError(f"scan lacks the shifted values needed at theta={theta}")
    q0, qu, qd = scan.triples(shifted)
    p = scan.params
    return qq_residual_from_triples(q0, qu, qd, p.g, p.alpha)


def bae_ratio(q: Sequence[QTriple], which: str) -> complex:
    """Q(t+2pi i/3) Q(t-i pi/3) / [Q(t-2pi i/3) Q(t+i pi/3)] from triples in SHIFT_BAE order."""
    a, b, c, d = (t.get(which) for t in q)
    return a * b / (c * d)


def bae_residual(scan: SpectralScan, theta_n: complex, which: str = "plus") -> complex:
    """ratio * w^{-+(g+1)} + 1 at a zero of Q+ (upper sign) or Q- (lower sign)."""
    if which not in ("plus", "minus"):
        raise ValueError("Bethe Ansatz equations are stated for Q+ and Q- only")
    th = complex(theta_n)
    q = scan.triples([th + s for s in SHIFT_BAE])
    sign = 1 if which == "plus" else -1
    w = omega(scan.params.alpha)
    return bae_ratio(q, which) * w ** (-sign * (scan.params.g + 1)) + 1


def bae_residual_via_qq(scan: SpectralScan, theta_n: complex) -> complex:
    """BAE residual for Q+ with Q+(t_n +- i pi/3) replaced by the QQ right-hand side.

    At a true zero both routes coincide up to the QQ residual; this reproduces
    the derivation of the Bethe equations from the QQ relation.
    """
    th = complex(theta_n)
    g, a = scan.params.g, scan.params.alpha
    w = omega(a)
    e = (g + 1) / 2
    q_p2, q_m1, q_m2, q_p1 = scan.triples([th + s for s in SHIFT_BAE])
    q_0 = scan.triple(th)
    k = (g + 1) / (1j * math.sqrt(3))
    up = k * (q_p2.q_plus * q_0.q_zero * w ** (-e) - w**e * q_0.q_plus * q_p2.q_zero)
    dn = k * (q_0.q_plus * q_m2.q_zero * w ** (-e) - w**e * q_m2.q_plus * q_0.q_zero)
    ratio = q_p2.q_plus * dn / (q_m2.q_plus * up)
    return ratio * w ** (-(g + 1)) + 1


# --------------------------------------------------------------------------------------
# zeros


def _local_minima(v: np.ndarray) -> list[int]:
    a = np.abs(v)
    return [i for i in range(1, a.size - 1)
            if np.isfinite(a[i]) and a[i] <= a[i - 1] and a[i] <= a[i + 1]]


def find_q_zeros(
    scan: SpectralScan,
    which: str = "plus",
    window: Optional[tuple[float, float]] = None,
    strip: float = 0.2,
    tol: float = 1e-12,
    func: Optional[Callable[[complex], complex]] = None,
    with_bae: bool = True,
) -> list[ZeroRecord]:
    """Refine grid minima of |Q_which| to zeros by complex secant iteration.

    ``window`` bounds the real part (defaults to the grid span); zeros with
    |Im theta| >= strip or outside the window are discarded. ``func`` replaces
    the Q-function (used to self-test the harness).
    """
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    grid = scan.theta_grid
    lo, hi = window if window is not None else (float(grid[0]), float(grid[-1]))
    if func is None:
        def func(t):
            return scan.triple(complex(t)).get(which)
        column = scan.column(which)
    else:
        column = np.array([func(complex(t)) for t in grid])
    median = float(np.nanmedian(np.abs(column)))
    centre = complex(0.5 * (lo + hi), 0.0)
    radius = math.hypot(0.5 * (hi - lo), strip)
    h = float(np.min(np.diff(grid))) if grid.size > 1 else 1e-2
    found: list[ZeroRecord] = []
    for i in _local_minima(column):
        try:
            z = find_zero(func, complex(grid[i]), tol=tol, window=(centre, radius), step=0.05 * h)
        except ConvergenceError as exc:
            log.info("seed %s skipped: %s", grid[i], exc)
            continue
        if not (lo <= z.real <= hi) or abs(z.imag) >= strip:
            continue
        if any(abs(z - r.theta) < 1e-6 * max(1.0, abs(z)) for r in found):
            continue
        aq = abs(func(z))
        note = ""
        if abs(z.imag) > 1e-8 * max(1.0, abs(z.real)):
            note = "complex zero"
            warnings.warn(f"zero of Q_{which} off the real axis at {z}", ZeroSearchWarning, stacklevel=2)
        if median > 0 and aq > 1e-6 * median:
            note = (note + "; " if note else "") + "weak zero"
            warnings.warn(f"|Q_{which}| = {aq:.2e} at {z} is not small", ZeroSearchWarning, stacklevel=2)
        res = complex("nan")
        if with_bae and which != "zero" and scan.evaluator is not None:
            res = bae_residual(scan, z, which)
        found.append(ZeroRecord(z, which, aq, res, note))
    found.sort(key=lambda r: r.theta.real)
    return found


ZERO_COLUMNS = ["theta_re", "theta_im", "which", "abs_q_at_zero",
                "bae_residual_re", "bae_residual_im", "bae_residual_abs"]


def zeros_to_csv(zeros: Sequence[ZeroRecord], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ZERO_COLUMNS)
    for z in zeros:
        r = z.bae_residual
        w.writerow([repr(z.theta.real), repr(z.theta.imag), z.which, repr(float(z.abs_q)),
                    repr(r.real), repr(r.imag), repr(abs(r))])
    return buf.getvalue()


# --------------------------------------------------------------------------------------
# conformal limit


@dataclass(frozen=True)
class LimitRow:
    s: float
    theta: float
    E: complex
    massive: tuple
    conformal: tuple
    ratio: tuple  # massive / conformal in the chi gauge, per (plus, zero, minus)
    discrepancy: tuple  # |ratio - 1|


@dataclass(frozen=True)
class ConformalLimitTable:
    which: str
    rows: tuple
    normalized: tuple  # ratio / ratio at the largest s
    drift: tuple  # |normalized_n - normalized_{n-1}|

    @property
    def discrepancy(self) -> tuple:
        i = WHICH.index(self.which)
        return tuple(r.discrepancy[i] for r in self.rows)

    @property
    def converging(self) -> bool:
        d = self.discrepancy
        ok = all(b < a for a, b in zip(d, d[1:]))
        return ok and all(b < a for a, b in zip(self.drift, self.drift[1:]))


def conformal_limit_study(
    params: ModelParams,
    theta: float,
    s_sequence: Sequence[float],
    which: str = "plus",
    field_config: FieldConfig = FieldConfig(),
    fixed_E: Optional[complex] = None,
    tol: float = 1e-12,
    solutions: Optional[dict] = None,
) -> ConformalLimitTable:
    """Compare massive Q(theta, s) with conformal Q(E(theta, s)) along decreasing s.

    With ``fixed_E`` the spectral parameter follows theta_s = (a+1)/(3a) ln(E/s^{3a}),
    the scaling limit proper; otherwise theta is held fixed. ``solutions`` may
    supply pre-computed fields keyed by s.
    """
    s_seq = [float(s) for s in s_sequence]
    if any(b >= a for a, b in zip(s_seq, s_seq[1:])):
        raise ValueError("s_sequence must be strictly decreasing")
    if any(s <= 0 for s in s_seq):
        raise ValueError("the conformal limit needs s > 0")
    a = params.alpha
    rows = []
    for s in s_seq:
        p = ModelParams(a, params.g, s)
        sol = (solutions or {}).get(s) or solve_field(p, field_config)
        if fixed_E is not None:
            th = (a + 1) / (3 * a) * (np.log(complex(fixed_E)) - 3 * a * math.log(s))
        else:
            th = complex(theta)
        E, _ = scaling_map(th, p)
        qm = MassiveSource(sol, tol=tol)([th])[0]
        qc = conformal_q_triple(E, p, tol=tol, theta=th)[0]
        ratio = tuple(m / c for m, c in zip(qm.as_tuple(), qc.as_tuple()))
        rows.append(LimitRow(s, th, E, qm.as_tuple(), qc.as_tuple(), ratio,
                             tuple(abs(r - 1) for r in ratio)))
    i = WHICH.index(which)
    r0 = rows[0].ratio[i]
    norm = tuple(r.ratio[i] / r0 for r in rows)
    drift = tuple(abs(b - a_) for a_, b in zip(norm, norm[1:]))
    return ConformalLimitTable(which, tuple(rows), norm, drift)
