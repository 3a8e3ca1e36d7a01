"""Named identity suites: measured residual against a fixed tolerance.

Each suite returns a list of :class:`CheckResult`; the command-line ``check``
subcommand prints them as a table and the acceptance tests assert on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .bethe import (
    SHIFTS_ALL,
    ConformalSource,
    MassiveSource,
    SpectralScan,
    conformal_limit_study,
    find_q_zeros,
    qq_residual,
    scan_q,
)
from .conformal import solve_y, wronskian3, z_function
from .core import ModelParams
from .field import FieldConfig, FieldSolution, solve_field
from .massive import massive_psi_k, massive_u, massive_wronskian
from .qtypes import QTriple

SUITES = ("wronskian", "zfun", "ufun", "qq", "bae", "conf-limit")
SQRT3I = 1j * math.sqrt(3.0)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    measured: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.measured) and self.measured < self.tol)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag:4s}  {self.suite:10s}  {self.name:38s}  {self.measured:10.3e}  < {self.tol:8.1e}  {self.detail}"


@dataclass
class CheckContext:
    """Inputs shared between suites; the massive field is solved once on demand."""

    alpha: float = 1.0
    g: float = 0.1
    s: float = 1.0
    field: Optional[FieldSolution] = None
    field_config: FieldConfig = dc_field(default_factory=FieldConfig)
    qscan: Optional[SpectralScan] = None
    tol: float = 1e-12

    def conformal_params(self) -> ModelParams:
        return ModelParams(self.alpha, self.g, 0.0)

    def massive(self) -> FieldSolution:
        if self.field is None:
            self.field = solve_field(ModelParams(self.alpha, self.g, self.s), self.field_config)
        return self.field


# --------------------------------------------------------------------------------------
# suites


def suite_wronskian(ctx: CheckContext, E_values: Sequence[complex] = (0.0, 1.3, 2 + 1j, -1.5, 4.0),
                    x_points: Sequence[float] = (0.4, 0.8, 1.5)) -> list[CheckResult]:
    P = ctx.conformal_params()
    W = wronskian3(-1, 0, 1, list(E_values), P, list(x_points), tol=ctx.tol)
    dev = float(np.max(np.abs(W + 3j * math.sqrt(3.0))))
    spread = float(np.max(np.abs(W - W[:, :1]) / np.abs(W[:, :1])))
    return [
        CheckResult("wronskian", "|W[-1,0,1] + 3i sqrt3| (conformal)", dev, 1e-8,
                    f"alpha={P.alpha} g={P.g} nE={len(E_values)}"),
        CheckResult("wronskian", "x-independence of W (relative)", spread, 1e-8),
    ]


def suite_zfun(ctx: CheckContext, E_values: Sequence[complex] = (0.5, 2.0, 1 - 1j),
               x_points: Optional[Sequence[float]] = None) -> list[CheckResult]:
    P = ctx.conformal_params()
    x = np.linspace(0.2, 2.0, 20) if x_points is None else np.asarray(x_points, dtype=float)
    z = z_function(-0.5, 0.5, list(E_values), P, x, tol=ctx.tol)
    y = solve_y(list(E_values), P, x_grid=x, tol=ctx.tol).y
    dev = float(np.max(np.abs(z - SQRT3I * y) / np.abs(SQRT3I * y)))
    return [CheckResult("zfun", "|z[-1/2,1/2] - i sqrt3 y| / |i sqrt3 y|", dev, 1e-7,
                        f"{x.size} x-points, {len(E_values)} E-values")]


def suite_ufun(ctx: CheckContext, thetas: Sequence[float] = (-0.5, 0.0, 0.7),
               rho: Optional[Sequence[float]] = None) -> list[CheckResult]:
    sol = ctx.massive()
    W = massive_wronskian(sol, list(thetas), [0.3, 1.0], tol=ctx.tol)
    wdev = float(np.max(np.abs(W + 3j * math.sqrt(3.0))))
    r = np.linspace(0.15, 1.5, 10) if rho is None else np.asarray(rho, dtype=float)
    th = [0.2]
    u = massive_u(sol, th, -0.5, 0.5, r, tol=ctx.tol)
    p0 = massive_psi_k(sol, th, 0, r, tol=ctx.tol).values[..., 0]
    udev = float(np.max(np.abs(u - SQRT3I * p0) / np.abs(SQRT3I * p0)))
    return [
        CheckResult("ufun", "|W[psi-1,psi0,psi1] + 3i sqrt3| (massive)", wdev, 1e-6,
                    f"s={sol.params.s} {len(thetas)} theta values"),
        CheckResult("ufun", "|u[-1/2,1/2] - i sqrt3 psi0| / |i sqrt3 psi0|", udev, 1e-6,
                    f"{r.size} ray points"),
    ]


def suite_qq(ctx: CheckContext, thetas: Sequence[float] = tuple(np.linspace(-1.0, 2.0, 5))) -> list[CheckResult]:
    out = []
    conf = scan_q(ConformalSource(ctx.conformal_params(), tol=ctx.tol), thetas, SHIFTS_ALL[:3])
    rc = max(abs(qq_residual(conf, t)) for t in thetas)
    out.append(CheckResult("qq", "QQ relation, conformal (relative)", rc, 1e-6, f"{len(thetas)} points"))
    mass = scan_q(MassiveSource(ctx.massive(), tol=ctx.tol), thetas, SHIFTS_ALL[:3])
    rm = max(abs(qq_residual(mass, t)) for t in thetas)
    out.append(CheckResult("qq", "QQ relation, massive (relative)", rm, 1e-5,
                           f"s={ctx.massive().params.s}, {len(thetas)} points"))
    return out


def _bae_checks(scan: SpectralScan, label: str, n: dict, tol: float, window) -> list[CheckResult]:
    out = []
    for which, count in n.items():
        zs = find_q_zeros(scan, which, window=window)[:count]
        if len(zs) < count:
            out.append(CheckResult("bae", f"BAE Q{'+' if which == 'plus' else '-'} {label}",
                                   float("inf"), tol, f"found {len(zs)} of {count} zeros"))
            continue
        worst = max(abs(z.bae_residual) for z in zs)
        where = " ".join(f"{z.theta.real:.6f}" for z in zs)
        out.append(CheckResult("bae", f"BAE Q{'+' if which == 'plus' else '-'} {label}, {count} zeros",
                               worst, tol, f"zeros at {where}"))
    return out


def suite_bae(ctx: CheckContext) -> list[CheckResult]:
    if ctx.qscan is not None:
        sc = ctx.qscan
        tol = 1e-3 if sc.source == "massive" else 1e-4
        return _bae_checks(sc, f"{sc.source} (from file)", {"plus": 2, "minus": 2}, tol, None)
    grid = np.linspace(-1.0, 2.6, 37)
    conf = scan_q(ConformalSource(ctx.conformal_params(), tol=ctx.tol), grid)
    out = _bae_checks(conf, "conformal", {"plus": 3, "minus": 3}, 1e-4, None)
    mass = scan_q(MassiveSource(ctx.massive(), tol=ctx.tol), np.linspace(-1.0, 2.5, 36))
    out += _bae_checks(mass, "massive", {"plus": 2, "minus": 2}, 1e-3, None)
    return out


def suite_conf_limit(ctx: CheckContext, theta: float = 0.3,
                     s_sequence: Sequence[float] = (0.4, 0.2, 0.1)) -> list[CheckResult]:
    out = []
    P = ModelParams(ctx.alpha, ctx.g, s_sequence[0])
    sols = {s: solve_field(ModelParams(ctx.alpha, ctx.g, s), ctx.field_config) for s in s_sequence}
    for which in ("plus", "zero"):
        tab = conformal_limit_study(P, theta, s_sequence, which=which, solutions=sols, tol=ctx.tol)
        d = tab.discrepancy
        # measured: largest ratio of consecutive discrepancies (must stay below 1)
        worst = max(b / a for a, b in zip(d, d[1:]))
        dd = tab.drift
        worst_drift = max((b / a for a, b in zip(dd, dd[1:])), default=0.0)
        out.append(CheckResult("conf-limit", f"Q{'+' if which == 'plus' else '0'} discrepancy ratio d(s_n+1)/d(s_n)",
                               worst, 1.0, "d = " + ", ".join(f"{v:.2e}" for v in d)))
        out.append(CheckResult("conf-limit", f"Q{'+' if which == 'plus' else '0'} drift ratio",
                               worst_drift, 1.0, "drift = " + ", ".join(f"{v:.2e}" for v in dd)))
    return out


SUITE_FUNCS = {
    "wronskian": suite_wronskian,
    "zfun": suite_zfun,
    "ufun": suite_ufun,
    "qq": suite_qq,
    "bae": suite_bae,
    "conf-limit": suite_conf_limit,
}


def run_suites(names: Sequence[str], ctx: CheckContext) -> list[CheckResult]:
    if "all" in names:
        names = SUITES
    bad = [n for n in names if n not in SUITE_FUNCS]
    if bad:
        raise KeyError(f"unknown suite(s) {bad}; choose from {SUITES + ('all',)}")
    out: list[CheckResult] = []
    for n in names:
        out += SUITE_FUNCS[n](ctx)
    return out


# --------------------------------------------------------------------------------------
# scans rebuilt from a Q table


@dataclass(frozen=True)
class InterpolatedSource:
    """Cubic-spline interpolation in Re theta of tabulated triples, one spline per shift."""

    params: ModelParams
    name: str
    splines: dict  # imaginary part -> (CubicSpline over (plus, zero, minus), (lo, hi))

    def __call__(self, theta) -> list[QTriple]:
        out = []
        for t in np.atleast_1d(np.asarray(theta, dtype=complex)):
            key = round(t.imag, 9)
            if key not in self.splines:
                raise KeyError(f"no tabulated shift with Im theta = {t.imag}")
            sp, (lo, hi) = self.splines[key]
            if not lo <= t.real <= hi:
                raise ValueError(f"Re theta = {t.real} outside the tabulated range")
            v = sp(t.real)
            out.append(QTriple(complex(v[0]), complex(v[1]), complex(v[2]), complex(t), "chi-unit"))
        return out


def scan_from_table(rows: Sequence[QTriple], params: ModelParams, source: str) -> SpectralScan:
    """Rebuild a scan (with an interpolating evaluator) from a qscan CSV table."""
    by_shift: dict[float, list[QTriple]] = {}
    for q in rows:
        by_shift.setdefault(round(q.theta.imag, 9), []).append(q)
    if 0.0 not in by_shift:
        raise ValueError("table has no unshifted rows")
    splines = {}
    for key, qs in by_shift.items():
        qs = sorted(qs, key=lambda q: q.theta.real)
        x = np.array([q.theta.real for q in qs])
        y = np.array([q.as_tuple() for q in qs])
        if x.size < 4:
            raise ValueError("need at least 4 rows per shift to interpolate")
        splines[key] = (CubicSpline(x, y, axis=0), (x[0], x[-1]))
    base = sorted(by_shift[0.0], key=lambda q: q.theta.real)
    grid = np.array([q.theta.real for q in base])
    values = {(round(q.theta.real, 11), round(q.theta.imag, 11)): q for q in rows}
    ev = InterpolatedSource(params, source, splines)
    shifts = tuple(sorted((complex(0, k) for k in by_shift), key=lambda c: c.imag))
    return SpectralScan(source, params, grid, shifts, values, {}, (), ev)
