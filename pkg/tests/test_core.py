import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odeim_bd.core import (
    BranchError,
    ConvergenceError,
    IntegrationError,
    ModelParams,
    RayTrajectory,
    SpectralPoint,
    find_zero,
    integrate_ray,
    omega,
    potential,
    scaling_map,
)
from odeim_bd.taylor import airy3_taylor

alphas = st.floats(min_value=0.05, max_value=5.0)
thetas = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_model_params_validation():
    ModelParams(1.0, 0.1, 1.0)
    with pytest.raises(ValueError):
        ModelParams(0.0, 0.1)
    with pytest.raises(ValueError):
        ModelParams(1.0, 0.5)
    with pytest.raises(ValueError):
        ModelParams(1.0, -1.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 0.1, -0.1)
    with pytest.raises(ValueError):
        ModelParams(0.4, 0.1).require_wkb()
    assert ModelParams(1.0, 0.1).twist == pytest.approx(0.21)


def test_potential_examples():
    p = ModelParams(1.3, 0.1, 0.7)
    assert abs(potential(0.7, p)) < 1e-14
    assert potential(0.0, p) == pytest.approx(-(0.7 ** 3.9))
    assert potential(2.0, ModelParams(1.0, 0.1, 0.0)) == 8.0


def test_potential_rejects_cut():
    with pytest.raises(BranchError):
        potential(-1.0, ModelParams(0.5, 0.1, 1.0))
    # integer 3 alpha has no cut
    assert potential(-1.0, ModelParams(1.0, 0.1, 0.0)) == -1.0


def test_omega_alpha_one():
    assert omega(1.0) == pytest.approx(cmath.exp(1j * math.pi / 3))


@given(alphas)
def test_omega_unit_root(a):
    w = omega(a)
    assert abs(abs(w) - 1) < 1e-14
    assert abs(cmath.exp((3 * a + 3) * cmath.log(w)) - 1) < 1e-12


def test_scaling_map_at_zero():
    p = ModelParams(1.0, 0.1, 0.6)
    E, Et = scaling_map(0.0, p)
    assert E == pytest.approx(0.6**3) and Et == pytest.approx(0.6**3)
    with pytest.raises(ValueError):
        scaling_map(0.0, ModelParams(1.0, 0.1, 0.0))


@given(thetas, st.floats(0.6, 3.0), st.floats(0.1, 2.0))
def test_scaling_map_product(theta, a, s):
    p = ModelParams(a, 0.1, s)
    E, Et = scaling_map(theta, p)
    assert E * Et == pytest.approx(s ** (6 * a), rel=1e-12)
    pt = SpectralPoint.from_theta(theta, p)
    assert pt.E == E and pt.lam == pytest.approx(cmath.exp(theta))


@given(thetas, st.floats(0.6, 3.0))
def test_scaling_map_rotation(theta, a):
    p = ModelParams(a, 0.1, 1.0)
    E, Et = scaling_map(theta, p)
    E1, Et1 = scaling_map(theta - 2j * math.pi / 3, p)
    w3 = cmath.exp(2j * math.pi * 3 * a / (3 * a + 3))
    assert E1 == pytest.approx(E / w3, rel=1e-12)
    assert Et1 == pytest.approx(Et * w3, rel=1e-12)


def test_integrate_ray_exponential():
    tr = integrate_ray(lambda t: -np.eye(3), 0.0, 1.0, np.ones(3), tol=1e-12)
    assert np.allclose(tr.final, math.e, rtol=1e-11)


def test_integrate_ray_inward_and_batched():
    A = lambda t: np.stack([-np.eye(3), -2 * np.eye(3)])  # noqa: E731
    tr = integrate_ray(A, 1.0, 0.0, np.ones((2, 3)), tol=1e-12, t_eval=np.array([0.5, 0.0]))
    assert np.allclose(tr.final[0], math.exp(-1.0), rtol=1e-11)
    assert np.allclose(tr.final[1], math.exp(-2.0), rtol=1e-11)
    assert np.all(np.diff(tr.t) < 0)


def test_integrate_ray_nonfinite():
    with pytest.raises(IntegrationError):
        integrate_ray(lambda t: np.full((3, 3), np.nan), 0.0, 1.0, np.ones(3))


def _airy_companion(t):
    return -np.array([[0, 1, 0], [0, 0, 1], [t, 0, 0]], dtype=complex)


def test_integrate_ray_vs_taylor_oracle():
    v0 = np.array([1.0, -0.3, 0.2], dtype=complex)
    ref = airy3_taylor(0.0, 2.0, v0, h=0.05, n_terms=40)
    got = integrate_ray(_airy_companion, 0.0, 2.0, v0, tol=1e-12).final
    assert np.max(np.abs(got - ref) / np.abs(ref)) < 1e-10


def test_integrate_ray_tolerance_scaling():
    v0 = np.array([1.0, -0.3, 0.2], dtype=complex)
    ref = airy3_taylor(0.0, 2.0, v0, h=0.05, n_terms=40)

    def dev(tol):
        return np.max(np.abs(integrate_ray(_airy_companion, 0.0, 2.0, v0, tol=tol).final - ref))

    ratios = [dev(tol / 2) / dev(tol) for tol in (1e-6, 1e-7, 1e-8, 1e-9)]
    # step-size control is not exactly proportional: single halvings scatter around 1/2
    assert max(ratios) < 0.55
    assert math.exp(np.mean(np.log(ratios))) <= 0.5


def test_ray_trajectory_monotone():
    with pytest.raises(ValueError):
        RayTrajectory(np.array([0.0, 1.0, 0.5]), np.zeros((3, 3)), 1e-8, 0)


def test_find_zero_examples():
    assert find_zero(lambda t: t * t - 1, 0.9) == pytest.approx(1.0, abs=1e-12)
    assert abs(find_zero(cmath.sin, 3.0) - math.pi) < 1e-12


def test_find_zero_window_and_failure():
    with pytest.raises(ConvergenceError):
        find_zero(lambda t: t - 5.0, 0.0, window=(0.0, 1.0))
    with pytest.raises(ConvergenceError):
        find_zero(lambda t: abs(t) + 1.0, 0.3)  # no root at all


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-1, 1))
def test_find_zero_linear(re, im):
    root = complex(re, im)
    z = find_zero(lambda t: 3.0 * (t - root), root + 0.5)
    assert abs(z - root) < 1e-12
