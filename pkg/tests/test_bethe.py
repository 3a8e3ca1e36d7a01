import csv
import io
import math

import numpy as np
import pytest

from odeim_bd.bethe import (
    SHIFT_QQ,
    SHIFTS_ALL,
    ZERO_COLUMNS,
    ConformalSource,
    MassiveSource,
    SpectralScan,
    ZeroRecord,
    bae_residual,
    bae_residual_via_qq,
    conformal_limit_study,
    evaluate_many,
    find_q_zeros,
    qq_residual,
    qq_residual_from_triples,
    scan_q,
    zeros_to_csv,
)
from odeim_bd.core import ConvergenceError, ModelParams
from odeim_bd.qtypes import QTriple


@pytest.fixture(scope="module")
def conf_zero_scan(params_conformal):
    """Conformal scan around the lowest zeros of Q+ (1.2769) and Q- (1.5411)."""
    return scan_q(params_conformal, np.linspace(1.1, 1.7, 7))


@pytest.fixture(scope="module")
def mass_zero_scan(field_s1):
    """Massive scan around the lowest zeros of Q+ (-0.2868) and Q- (+0.2868)."""
    return scan_q(field_s1, np.linspace(-0.5, 0.5, 9))


class FailingSource:
    """Fake source that refuses Re theta > 1."""

    name = "fake"
    params = ModelParams(1.0, 0.1, 0.0)

    def __call__(self, theta):
        out = []
        for t in np.atleast_1d(theta):
            if t.real > 1.0:
                raise ValueError("refused")
            out.append(QTriple(complex(t), 1.0, 2.0, complex(t), "chi-unit"))
        return out


def test_single_point_scan(params_conformal):
    sc = scan_q(params_conformal, [0.3])
    q = sc.triple(0.3)
    assert q.gauge == "chi-unit" and sc.has(0.3) and not sc.errors


def test_batching_consistency(params_conformal):
    src = ConformalSource(params_conformal)
    batch = src(np.array([0.1, 0.7, 1.3]))
    for t, q in zip((0.1, 0.7, 1.3), batch):
        one = src(np.array([t]))[0]
        assert np.allclose(q.as_tuple(), one.as_tuple(), rtol=1e-8)


def test_grid_must_increase(params_conformal):
    with pytest.raises(ValueError):
        SpectralScan("x", params_conformal, np.array([0.0, 0.5, 0.2]), (0.0,), {})


@pytest.mark.parametrize("kind", ["conformal", "massive"])
def test_qq_relation(kind, params_conformal, field_s1):
    src = ConformalSource(params_conformal) if kind == "conformal" else MassiveSource(field_s1)
    sc = scan_q(src, [-0.6, 0.4, 1.5], SHIFT_QQ)
    tol = 1e-9 if kind == "conformal" else 1e-8
    for t in (-0.6, 0.4, 1.5):
        assert abs(qq_residual(sc, t)) < tol


def test_qq_detects_corruption(params_conformal):
    src = ConformalSource(params_conformal)
    q0, qu, qd = src(np.array([0.4, 0.4 + 1j * math.pi / 3, 0.4 - 1j * math.pi / 3]))
    bad = [q.scaled(1.0, 1.01, 1.0, gauge="chi-unit") for q in (q0, qu, qd)]
    r = abs(qq_residual_from_triples(*bad, 0.1, 1.0))
    assert 1e-3 < r < 5e-2


def test_qq_needs_data(params_conformal):
    sc = SpectralScan("x", params_conformal, np.array([0.0]), (0.0,), {})
    with pytest.raises(KeyError):
        qq_residual(sc, 0.0)


def test_zero_finder_harness(params_conformal):
    sc = SpectralScan("x", params_conformal, np.linspace(0.0, 1.2, 13), (0.0,), {})
    zs = find_q_zeros(sc, func=lambda t: (t - 0.3) * (t - 0.9), with_bae=False)
    assert [round(z.theta.real, 10) for z in zs] == [0.3, 0.9]
    assert all(abs(z.theta - r) < 1e-10 for z, r in zip(zs, (0.3, 0.9)))


def test_which_validated(conf_zero_scan):
    with pytest.raises(ValueError):
        find_q_zeros(conf_zero_scan, "middle")
    with pytest.raises(ValueError):
        bae_residual(conf_zero_scan, 1.0, "zero")


def test_conformal_zeros_and_bae(conf_zero_scan):
    zp = find_q_zeros(conf_zero_scan, "plus")
    zm = find_q_zeros(conf_zero_scan, "minus")
    assert zp[0].theta.real == pytest.approx(1.276862, abs=2e-6)
    assert zm[0].theta.real == pytest.approx(1.541063, abs=2e-6)
    for z in zp[:1] + zm[:1]:
        assert abs(z.bae_residual) < 1e-9
        assert abs(z.theta.imag) < 1e-10 and z.note == ""
    # away from a zero the same expression is O(1)
    assert abs(bae_residual(conf_zero_scan, zp[0].theta + 0.1, "plus")) > 0.05
    assert abs(bae_residual_via_qq(conf_zero_scan, zp[0].theta) - zp[0].bae_residual) < 1e-8


def test_zero_tolerance_stability(params_conformal):
    lo = [find_q_zeros(scan_q(ConformalSource(params_conformal, tol=t), np.linspace(1.1, 1.45, 5)),
                       "plus", with_bae=False)[0].theta.real for t in (1e-8, 1e-10)]
    assert lo[0] == pytest.approx(lo[1], abs=5e-7)


def test_massive_zeros_and_bae(mass_zero_scan):
    zp = find_q_zeros(mass_zero_scan, "plus")
    zm = find_q_zeros(mass_zero_scan, "minus")
    assert zp[0].theta.real == pytest.approx(-0.286849, abs=2e-6)
    assert zm[0].theta.real == pytest.approx(0.286849, abs=2e-6)
    assert abs(zp[0].bae_residual) < 1e-6 and abs(zm[0].bae_residual) < 1e-6
    # Q+ and Q- have different zero sets; the mirror theta -> -theta exchanges them
    assert abs(zp[0].theta.real - zm[0].theta.real) > 0.5
    assert zp[0].theta.real == pytest.approx(-zm[0].theta.real, abs=1e-8)


def test_zero_csv_columns():
    z = ZeroRecord(1.0 + 0j, "plus", 1e-14, 2e-12 + 0j)
    text = zeros_to_csv([z], comments=["params alpha=1.0 g=0.1 s=0.0"])
    lines = text.splitlines()
    assert lines[0].startswith("#")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    assert rows[0] == ZERO_COLUMNS and float(rows[1][6]) == pytest.approx(2e-12)


def test_errors_recorded():
    sc = scan_q(FailingSource(), [0.0, 0.5, 1.5, 2.0])
    assert sc.has(0.5) and not sc.has(1.5)
    assert len(sc.errors) == 2 and "refused" in next(iter(sc.errors.values()))
    assert np.isnan(sc.column("plus")[2])
    with pytest.raises(ConvergenceError):
        sc.triple(1.5)


def test_parallel_matches_serial(params_conformal):
    src = ConformalSource(params_conformal)
    pts = [0.1, 0.5, 0.1 + 1j * math.pi / 3, 0.5 - 1j * math.pi / 3]
    a = evaluate_many(src, pts, jobs=1)
    b = evaluate_many(src, pts, jobs=2)
    # the batch composition fixes the shared matching point, so agreement is to rounding only
    assert np.allclose([q.as_tuple() for q in a], [q.as_tuple() for q in b], rtol=1e-10)


def test_shift_bookkeeping(params_conformal):
    sc = scan_q(FailingSource(), [0.0, 0.5], SHIFTS_ALL)
    assert len(sc.values) == 10
    assert sc.column("zero", 1j * math.pi / 3)[0] == 1.0
    assert len(sc.rows(-2j * math.pi / 3)) == 2


def test_conf_limit_validation(params_massive):
    with pytest.raises(ValueError):
        conformal_limit_study(params_massive, 0.3, [0.1, 0.2])
    with pytest.raises(ValueError):
        conformal_limit_study(params_massive, 0.3, [0.2, 0.0])


def test_conf_limit_single_s(params_massive, limit_fields):
    tab = conformal_limit_study(params_massive, 0.3, [0.2], solutions=limit_fields)
    assert tab.drift == () and len(tab.rows) == 1


def test_conf_limit_converges(params_massive, limit_fields):
    for which in ("plus", "zero"):
        tab = conformal_limit_study(params_massive, 0.3, [0.4, 0.2, 0.1], which=which, solutions=limit_fields)
        d = tab.discrepancy
        assert d[0] > d[1] > d[2] and tab.converging
    assert tab.discrepancy[2] < 1e-3
