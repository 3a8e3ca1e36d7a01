import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odeim_bd.core import ModelParams
from odeim_bd.field import (
    BoundaryClosureError,
    FieldConfig,
    FieldEvaluator,
    FieldSolution,
    ResonanceWarning,
    check_field_resonance,
    eta_eval,
    pde_residual_2d,
    small_rho_exponents,
    solve_field,
)


def test_exact_case(field_exact):
    # alpha = g: the vacuum -2g ln rho solves the equation exactly at s = 0
    sol = field_exact
    assert sol.residual < 1e-10
    assert sol.iterations <= 2
    eta = sol.eta_grid([0.0, 0.5])
    exact = -0.6 * sol.t
    assert np.max(np.abs(eta - exact)) < 1e-9
    assert abs(sol.eta0) < 1e-9
    d = eta_eval(sol, 0.8, 0.0)
    assert d["eta_rho"] == pytest.approx(-0.6 / 0.8, rel=1e-9)
    assert abs(d["eta_phi"]) < 1e-12


def test_massive_eight_modes():
    sol = solve_field(ModelParams(1.0, 0.1, 1.0), FieldConfig(n_modes=8))
    assert sol.residual < 1e-8
    assert math.isfinite(sol.eta0)


def test_massive_s1(field_s1):
    sol = field_s1
    assert sol.residual < 1e-8
    assert sol.eta0 == pytest.approx(-0.28813668339, abs=1e-9)
    assert pde_residual_2d(sol) < 1e-7


def test_mode_truncation_converged(field_s1):
    s8 = solve_field(field_s1.params, FieldConfig(n_modes=8))
    assert np.max(np.abs(s8.modes[0] - field_s1.modes[0])) < 1e-10


def test_apex_coefficients(field_s1):
    fit = field_s1.fit
    assert fit["c1_fit"] == pytest.approx(fit["c1_pred"], rel=1e-4)
    assert fit["c2_fit"] == pytest.approx(fit["c2_pred"], rel=1e-5)
    # leading higher-mode coefficients decrease with m
    g = field_s1.gamma
    assert g[0] > g[1] > g[2] > 0


def test_exponents_table():
    e = small_rho_exponents(ModelParams(1.0, 0.1, 1.0))
    assert e["a1"] == pytest.approx(2.2)
    assert e["a2"] == pytest.approx(1.6)
    assert e["a3"] == pytest.approx(7.6)
    assert e["c2"](0.0) == pytest.approx(1 / 0.64)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 8.0), st.floats(-3.0, 3.0))
def test_evenness_and_period(field_s1, rho, phi):
    ev = FieldEvaluator(field_s1)
    e = ev(rho, phi)["eta"]
    assert ev(rho, -phi)["eta"] == pytest.approx(e, abs=1e-13)
    assert ev(rho, phi + 2 * math.pi / 3)["eta"] == pytest.approx(e, abs=1e-12)


def test_evaluator_derivatives(field_s1):
    ev = FieldEvaluator(field_s1)
    r, p, h = 0.7, 0.4, 1e-5
    d = ev(r, p)
    dr = [ev(r + s * h, p) for s in (1, -1)]
    dp = [ev(r, p + s * h) for s in (1, -1)]
    assert (dr[0]["eta"] - dr[1]["eta"]) / (2 * h) == pytest.approx(d["eta_rho"], abs=1e-6)
    assert (dr[0]["eta_rho"] - dr[1]["eta_rho"]) / (2 * h) == pytest.approx(d["eta_rhorho"], abs=1e-6)
    assert (dp[0]["eta"] - dp[1]["eta"]) / (2 * h) == pytest.approx(d["eta_phi"], abs=1e-6)
    assert (dp[0]["eta_phi"] - dp[1]["eta_phi"]) / (2 * h) == pytest.approx(d["eta_phiphi"], abs=1e-6)
    assert (dp[0]["eta_rho"] - dp[1]["eta_rho"]) / (2 * h) == pytest.approx(d["eta_rhophi"], abs=1e-6)


def test_evaluator_outside_grid(field_s1):
    with pytest.raises(ValueError):
        eta_eval(field_s1, 100.0, 0.0)


def test_json_round_trip(field_s1):
    back = FieldSolution.from_json(field_s1.to_json())
    assert np.array_equal(back.modes, field_s1.modes)
    assert back.eta0 == field_s1.eta0
    assert back.params == field_s1.params and back.config == field_s1.config
    assert all((a == b) or (math.isnan(a) and math.isnan(b)) for a, b in zip(back.gamma, field_s1.gamma))
    assert back.fit["eta0"] == pytest.approx(field_s1.fit["eta0"], abs=1e-14)
    with pytest.raises(ValueError):
        FieldSolution.from_json('{"format": "other"}')


def test_config_validation():
    for bad in (dict(rho_min=0.0), dict(rho_min=2.0, rho_max=1.0), dict(n_rho=5),
                dict(n_modes=0), dict(residual_tol=0.0), dict(newton_damping=1.5)):
        with pytest.raises(ValueError):
            FieldConfig(**bad)
    assert FieldConfig(n_modes=3).collocation_points == 16


def test_outer_closure_error():
    with pytest.raises(BoundaryClosureError):
        solve_field(ModelParams(1.0, 0.1, 1.0), FieldConfig(rho_max=2.0))


def test_resonance_warning():
    assert check_field_resonance(ModelParams(1.0, 0.0, 1.0)) is not None
    assert check_field_resonance(ModelParams(1.0, 0.1, 1.0)) is None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        with pytest.warns(ResonanceWarning):
            sol = solve_field(ModelParams(1.0, 0.0, 1.0), FieldConfig(n_modes=4))
    assert sol.residual < 1e-8
    assert not sol.fit  # coefficient fit refused at resonance
