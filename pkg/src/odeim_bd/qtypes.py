"""Connection-coefficient records and their CSV serialization."""
from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

GAUGES = ("Psi0-unit", "chi-unit")

Q_COLUMNS = [
    "theta_re",
    "theta_im",
    "q_plus_re",
    "q_plus_im",
    "q_zero_re",
    "q_zero_im",
    "q_minus_re",
    "q_minus_im",
    "cond",
    "drift",
]


@dataclass(frozen=True)
class QTriple:
    """Coefficients of the subdominant solution in the origin basis at one spectral point."""

    q_plus: complex
    q_zero: complex
    q_minus: complex
    theta: complex
    gauge: str
    cond: float = float("nan")
    drift: float = float("nan")
    E: Optional[complex] = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.gauge not in GAUGES:
            raise ValueError(f"unknown gauge tag {self.gauge!r}")

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return (self.q_plus, self.q_zero, self.q_minus)

    def get(self, which: str) -> complex:
        return {"plus": self.q_plus, "zero": self.q_zero, "minus": self.q_minus}[which]

    def is_finite(self) -> bool:
        return all(cmath.isfinite(q) for q in self.as_tuple())

    def scaled(self, f_plus: complex, f_zero: complex, f_minus: complex, gauge: str) -> "QTriple":
        return replace(
            self,
            q_plus=self.q_plus * f_plus,
            q_zero=self.q_zero * f_zero,
            q_minus=self.q_minus * f_minus,
            gauge=gauge,
        )


def _fmt(x: float) -> str:
    return repr(float(x))


def qtriples_to_csv(rows: Sequence[QTriple], with_E: bool = False, comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    cols = list(Q_COLUMNS) + (["E_re", "E_im"] if with_E else [])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for q in rows:
        rec = [
            q.theta.real, q.theta.imag,
            q.q_plus.real, q.q_plus.imag,
            q.q_zero.real, q.q_zero.imag,
            q.q_minus.real, q.q_minus.imag,
            q.cond, q.drift,
        ]
        if with_E:
            E = q.E if q.E is not None else complex("nan")
            rec += [E.real, E.imag]
        w.writerow([_fmt(v) for v in rec])
    return buf.getvalue()


def qtriples_from_csv(text: str, gauge: Optional[str] = None) -> list[QTriple]:
    lines = []
    for line in text.splitlines():
        if line.startswith("#"):
            if gauge is None and "gauge" in line:
                tag = line.split("gauge", 1)[1].strip(" :=")
                if tag in GAUGES:
                    gauge = tag
            continue
        if line.strip():
            lines.append(line)
    reader = csv.DictReader(lines)
    missing = set(Q_COLUMNS) - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"CSV lacks columns {sorted(missing)}")
    out = []
    for r in reader:
        c = lambda k: complex(float(r[k + "_re"]), float(r[k + "_im"]))  # noqa: E731
        E = c("E") if "E_re" in r else None
        out.append(
            QTriple(
                q_plus=c("q_plus"),
                q_zero=c("q_zero"),
                q_minus=c("q_minus"),
                theta=c("theta"),
                gauge=gauge or "chi-unit",
                cond=float(r["cond"]),
                drift=float(r["drift"]),
                E=E,
            )
        )
    return out


def rel_diff(a: complex, b: complex) -> float:
    d = max(abs(a), abs(b))
    return 0.0 if d == 0 else abs(a - b) / d


def log_close(a: float, b: float, rtol: float) -> bool:
    return math.isclose(a, b, rel_tol=rtol)
