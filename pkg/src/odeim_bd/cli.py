"""Command-line front end: ``odeim-bd <subcommand> [options]``.

Subcommands: solve-field, qscan, zeros, check, conf-limit. Every option may also
be given in a JSON file passed with --config (keys are the option names with
dashes replaced by underscores); explicit flags override the file, which
overrides built-in defaults. Exit status is 0 on success, 1 on a numerical or
check failure, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .bethe import (
    SHIFTS_ALL,
    ConformalSource,
    MassiveSource,
    conformal_limit_study,
    find_q_zeros,
    scan_q,
    zeros_to_csv,
)
from .checks import SUITES, CheckContext, run_suites, scan_from_table
from .core import ConvergenceError, IntegrationError, ModelParams
from .field import FieldConfig, FieldSolution, solve_field
from .qtypes import qtriples_from_csv, qtriples_to_csv

log = logging.getLogger("odeim_bd")

SHIFT_SETS = {
    "none": (0.0,),
    "qq": SHIFTS_ALL[:3],
    "bae": SHIFTS_ALL,
    "all": SHIFTS_ALL,
}

DEFAULTS = {
    "common": {"jobs": None, "log_level": "WARNING", "version": __version__},
    "solve-field": {
        "alpha": 1.0, "g": 0.1, "s": 1.0, "rho_min": 1e-4, "rho_max": 12.0,
        "points": 2000, "modes": 12, "tol": 1e-8, "out": None, "plot": None,
    },
    "qscan": {
        "alpha": 1.0, "g": 0.1, "field": None, "conformal": False, "theta": "-1:2:16",
        "shifts": "none", "tol": 1e-12, "out": None, "plot": None, "strict": False,
    },
    "zeros": {
        "alpha": 1.0, "g": 0.1, "field": None, "conformal": False, "qfile": None,
        "theta": "-1:2.6:37", "which": "plus,minus", "window": None, "tol": 1e-12,
        "out": None, "plot": None,
    },
    "check": {
        "alpha": 1.0, "g": 0.1, "s": 1.0, "suite": "all", "field": None, "qfile": None,
        "tol": 1e-12,
    },
    "conf-limit": {
        "alpha": 1.0, "g": 0.1, "theta": 0.3, "s_seq": "0.4,0.2,0.1", "which": "plus",
        "fixed_E": None, "tol": 1e-12, "out": None,
    },
}


class UsageError(Exception):
    """Bad arguments or configuration; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict
    version: str = __version__

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError as exc:
            raise AttributeError(name) from exc


# --------------------------------------------------------------------------------------
# parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse's exit status 2, route through UsageError
        raise UsageError(message)


def _add_common(p):
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--jobs", type=int, help="worker processes (default: $ODEIM_BD_JOBS or 1)")
    p.add_argument("--log-level", dest="log_level", help="logging level")


def _add_params(p, with_s=True):
    p.add_argument("--alpha", type=float)
    p.add_argument("--g", type=float)
    if with_s:
        p.add_argument("--s", type=float)


def _add_source(p):
    p.add_argument("--field", help="field JSON from solve-field (massive source)")
    p.add_argument("--conformal", action="store_const", const=True, help="use the conformal equation")
    p.add_argument("--theta", help="real theta grid start:stop:count")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="odeim-bd", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=f"odeim-bd {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve-field", help="solve the field equation and write JSON")
    _add_common(p)
    _add_params(p)
    p.add_argument("--rho-min", dest="rho_min", type=float)
    p.add_argument("--rho-max", dest="rho_max", type=float)
    p.add_argument("--points", type=int, help="radial grid points")
    p.add_argument("--modes", type=int, help="angular Fourier modes")
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--out", help="output JSON path")
    p.add_argument("--plot", help="SVG of the radial mode profiles")

    p = sub.add_parser("qscan", help="tabulate Q-triples over a theta grid")
    _add_common(p)
    _add_params(p, with_s=False)
    _add_source(p)
    p.add_argument("--shifts", choices=sorted(SHIFT_SETS), help="imaginary shifts to include")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="output CSV path (default: standard output)")
    p.add_argument("--plot", help="SVG of log|Q| against theta")
    p.add_argument("--strict", action="store_const", const=True, help="fail on any per-point error")

    p = sub.add_parser("zeros", help="locate zeros of Q and report Bethe residuals")
    _add_common(p)
    _add_params(p, with_s=False)
    _add_source(p)
    p.add_argument("--qfile", help="Q table from qscan --shifts bae (interpolated)")
    p.add_argument("--which", help="comma list of plus, zero, minus")
    p.add_argument("--window", help="real window lo:hi")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="output CSV path (default: standard output)")
    p.add_argument("--plot", help="SVG of |Q| with located zeros")

    p = sub.add_parser("check", help="run identity suites")
    _add_common(p)
    _add_params(p)
    p.add_argument("--suite", help=f"comma list from {', '.join(SUITES + ('all',))}")
    p.add_argument("--field", help="field JSON for the massive suites")
    p.add_argument("--qfile", help="Q table for the bae suite")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("conf-limit", help="conformal-limit convergence study")
    _add_common(p)
    _add_params(p, with_s=False)
    p.add_argument("--theta", type=float)
    p.add_argument("--s-seq", dest="s_seq", help="decreasing comma list of s values")
    p.add_argument("--which", choices=["plus", "zero", "minus"])
    p.add_argument("--fixed-E", dest="fixed_E", type=float, help="follow theta_s at fixed E instead")
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="output CSV path (default: standard output)")
    return top


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the --config file and explicit flags (in increasing priority)."""
    cmd = args.command
    values = dict(DEFAULTS["common"])
    values.update(DEFAULTS[cmd])
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(doc) - set(values))
        if unknown:
            raise UsageError(f"unknown config keys for {cmd}: {unknown}")
        for k, v in doc.items():
            d = values[k]
            if d is not None and not isinstance(d, str) and not isinstance(v, type(d)):
                if not (isinstance(d, float) and isinstance(v, int) and not isinstance(v, bool)):
                    raise UsageError(f"config key {k!r} expects {type(d).__name__}")
            values[k] = v
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        values[k] = v
    if values["jobs"] is None:
        env = os.environ.get("ODEIM_BD_JOBS", "1")
        try:
            values["jobs"] = int(env)
        except ValueError as exc:
            raise UsageError(f"ODEIM_BD_JOBS must be an integer, got {env!r}") from exc
    if values["jobs"] < 1:
        raise UsageError("--jobs must be at least 1")
    return RunConfig(cmd, values, str(values["version"]))


def _grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise UsageError(f"grid must read start:stop:count, got {spec!r}") from exc
    if n < 1 or (n > 1 and not b > a):
        raise UsageError("grid needs count >= 1 and stop > start")
    return np.linspace(a, b, n)


def _window(spec: Optional[str]):
    if spec is None:
        return None
    try:
        lo, hi = (float(v) for v in spec.split(":"))
    except ValueError as exc:
        raise UsageError(f"window must read lo:hi, got {spec!r}") from exc
    if not hi > lo:
        raise UsageError("window needs hi > lo")
    return lo, hi


def _params(cfg: RunConfig, s: float = 0.0) -> ModelParams:
    try:
        return ModelParams(float(cfg.alpha), float(cfg.g), float(s))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_field(path: str) -> FieldSolution:
    try:
        with open(path) as fh:
            return FieldSolution.from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read field file {path}: {exc}") from exc


def _source(cfg: RunConfig):
    if cfg.field and cfg.conformal:
        raise UsageError("choose either --field or --conformal")
    if cfg.field:
        return MassiveSource(_load_field(cfg.field), tol=cfg.tol)
    if cfg.conformal:
        return ConformalSource(_params(cfg), tol=cfg.tol)
    raise UsageError("a source is required: --field FILE or --conformal")


def _header(cfg: RunConfig, params: ModelParams, extra=()) -> list[str]:
    lines = [
        f"odeim-bd {cfg.version} {cfg.command}",
        f"params alpha={params.alpha!r} g={params.g!r} s={params.s!r}",
    ]
    lines += list(extra)
    return lines


def _stamp() -> str:
    return "generated " + _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plot_setup():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "odeim-bd"
    import matplotlib.pyplot as plt

    return plt


def _savefig(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


# --------------------------------------------------------------------------------------
# subcommands


def cmd_solve_field(cfg: RunConfig) -> int:
    if not cfg.out:
        raise UsageError("--out is required")
    params = _params(cfg, cfg.s)
    try:
        fc = FieldConfig(rho_min=cfg.rho_min, rho_max=cfg.rho_max, n_rho=cfg.points,
                         n_modes=cfg.modes, residual_tol=cfg.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    sol = solve_field(params, fc)
    with open(cfg.out, "w") as fh:
        fh.write(sol.to_json())
    print(f"residual {sol.residual:.3e}  eta0 {sol.eta0:.12f}  iterations {sol.iterations}")
    if cfg.plot:
        plt = _plot_setup()
        fig, ax = plt.subplots(figsize=(6, 4))
        for m in range(min(sol.n_modes, 4)):
            ax.plot(sol.rho, sol.modes[m], label=f"mode {m}")
        ax.set_xscale("log")
        ax.set_xlabel("rho")
        ax.set_ylabel("eta_m(rho)")
        ax.set_title(f"alpha={params.alpha} g={params.g} s={params.s}")
        ax.legend()
        _savefig(fig, cfg.plot)
    return 0


def cmd_qscan(cfg: RunConfig) -> int:
    src = _source(cfg)
    grid = _grid(cfg.theta)
    scan = scan_q(src, grid, SHIFT_SETS[cfg.shifts], jobs=cfg.jobs)
    rows = [scan.values[k] for k in sorted(scan.values, key=lambda k: (k[1], k[0]))]
    comments = _header(cfg, src.params, [f"source {src.name}", "gauge chi-unit", _stamp()])
    for k, msg in sorted(scan.errors.items()):
        comments.append(f"error theta=({k[0]!r},{k[1]!r}) {msg}")
    _emit(qtriples_to_csv(rows, comments=comments), cfg.out)
    if cfg.plot:
        plt = _plot_setup()
        fig, ax = plt.subplots(figsize=(6, 4))
        for which, lab in (("plus", "Q+"), ("zero", "Q0"), ("minus", "Q-")):
            ax.plot(grid, np.log10(np.abs(scan.column(which))), label=f"log10|{lab}|")
        ax.set_xlabel("Re theta")
        ax.legend()
        _savefig(fig, cfg.plot)
    if scan.errors:
        print(f"{len(scan.errors)} point(s) failed", file=sys.stderr)
        if cfg.strict:
            return 1
    return 0


def cmd_zeros(cfg: RunConfig) -> int:
    which = [w.strip() for w in cfg.which.split(",") if w.strip()]
    if not which or any(w not in ("plus", "zero", "minus") for w in which):
        raise UsageError("--which takes a comma list of plus, zero, minus")
    if cfg.qfile:
        params = _params(cfg)
        try:
            with open(cfg.qfile) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.qfile}: {exc}") from exc
        params, source = _table_meta(text, params)
        scan = scan_from_table(qtriples_from_csv(text), params, source)
    else:
        src = _source(cfg)
        scan = scan_q(src, _grid(cfg.theta), (0.0,), jobs=cfg.jobs)
        params = src.params
    zeros = []
    for w in which:
        zeros += find_q_zeros(scan, w, window=_window(cfg.window), tol=cfg.tol)
    zeros.sort(key=lambda z: (z.theta.real, z.which))
    _emit(zeros_to_csv(zeros, _header(cfg, params, [f"source {scan.source}", _stamp()])), cfg.out)
    if cfg.plot:
        plt = _plot_setup()
        fig, ax = plt.subplots(figsize=(6, 4))
        for w in which:
            ax.semilogy(scan.theta_grid, np.abs(scan.column(w)), label=f"|Q {w}|")
            zs = [z.theta.real for z in zeros if z.which == w]
            ax.plot(zs, [np.nanmin(np.abs(scan.column(w)))] * len(zs), "v")
        ax.set_xlabel("Re theta")
        ax.legend()
        _savefig(fig, cfg.plot)
    return 0


def _table_meta(text: str, fallback: ModelParams):
    params, source = fallback, "conformal"
    for line in text.splitlines():
        if not line.startswith("#"):
            continue
        body = line[1:].strip()
        if body.startswith("params "):
            kv = dict(item.split("=") for item in body.split()[1:])
            params = ModelParams(float(kv["alpha"]), float(kv["g"]), float(kv["s"]))
        elif body.startswith("source "):
            source = body.split()[1]
    return params, source


def cmd_check(cfg: RunConfig) -> int:
    names = [n.strip() for n in cfg.suite.split(",") if n.strip()]
    bad = [n for n in names if n not in SUITES + ("all",)]
    if bad or not names:
        raise UsageError(f"unknown suite(s) {bad}; choose from {', '.join(SUITES + ('all',))}")
    ctx = CheckContext(alpha=cfg.alpha, g=cfg.g, s=cfg.s, tol=cfg.tol)
    _params(cfg, cfg.s)
    if cfg.field:
        ctx.field = _load_field(cfg.field)
    if cfg.qfile:
        try:
            with open(cfg.qfile) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {cfg.qfile}: {exc}") from exc
        params, source = _table_meta(text, _params(cfg))
        ctx.qscan = scan_from_table(qtriples_from_csv(text), params, source)
    results = run_suites(names, ctx)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed} passed, {failed} failed")
    return 0 if failed == 0 else 1


def cmd_conf_limit(cfg: RunConfig) -> int:
    try:
        s_seq = [float(v) for v in str(cfg.s_seq).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --s-seq {cfg.s_seq!r}") from exc
    if not s_seq or any(b >= a for a, b in zip(s_seq, s_seq[1:])) or min(s_seq) <= 0:
        raise UsageError("--s-seq must be a strictly decreasing list of positive values")
    params = _params(cfg, s_seq[0])
    tab = conformal_limit_study(params, float(cfg.theta), s_seq, which=cfg.which,
                                fixed_E=cfg.fixed_E, tol=cfg.tol)
    i = ("plus", "zero", "minus").index(cfg.which)
    lines = [f"# {c}" for c in _header(cfg, params, [f"which {cfg.which}", _stamp()])]
    lines.append("s,theta_re,theta_im,ratio_re,ratio_im,discrepancy,normalized_re,normalized_im,drift")
    for n, r in enumerate(tab.rows):
        drift = tab.drift[n - 1] if n else math.nan
        lines.append(",".join(repr(float(v)) for v in (
            r.s, r.theta.real, r.theta.imag, r.ratio[i].real, r.ratio[i].imag, r.discrepancy[i],
            tab.normalized[n].real, tab.normalized[n].imag, drift)))
    _emit("\n".join(lines) + "\n", cfg.out)
    status = "converging" if tab.converging else "NOT converging"
    print(f"conformal limit {status}: discrepancy " + ", ".join(f"{d:.3e}" for d in tab.discrepancy),
          file=sys.stderr)
    return 0 if tab.converging else 1


COMMANDS = {
    "solve-field": cmd_solve_field,
    "qscan": cmd_qscan,
    "zeros": cmd_zeros,
    "check": cmd_check,
    "conf-limit": cmd_conf_limit,
}


_VALUE_OPTS = ("--theta", "--window", "--s-seq", "--fixed-E", "--alpha", "--g")


def _join_negative_values(argv):
    """Let grid specs and values start with a minus sign (``--theta -1:2:5``)."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_OPTS:
            nxt = next(it, None)
            if nxt is not None and nxt[:1] == "-" and nxt[1:2] in set("0123456789."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        logging.basicConfig(level=str(cfg.log_level).upper(), format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"odeim-bd: error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, IntegrationError, ArithmeticError, ValueError, KeyError, RuntimeError) as exc:
        print(f"odeim-bd: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
