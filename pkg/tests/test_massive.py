import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odeim_bd.core import ModelParams
from odeim_bd.field import FieldEvaluator, eta_eval
from odeim_bd.massive import (
    FrameError,
    _transport_inward,
    check_frame_resonance,
    chi_gauge_factors,
    compute_q_triple,
    default_start_radius,
    frame_limits,
    lax_matrices,
    massive_psi_k,
    massive_u,
    massive_wronskian,
    origin_frame,
    radial_system,
    strip_exponent,
    subdominance_ok,
    wkb_initial_vector,
)

SQ3 = math.sqrt(3.0)


def test_lax_structure(field_s1):
    th = 0.3 + 0.2j
    L = lax_matrices(field_s1, th, 0.8, 0.4)
    assert abs(np.trace(L.A_z)) < 1e-15 and abs(np.trace(L.A_zbar)) < 1e-15
    eta = float(eta_eval(field_s1, 0.8, 0.4)["eta"])
    p = 0.8**3 * cmath.exp(1.2j) - 1.0
    assert L.A_z[0, 2] == pytest.approx(cmath.exp(th) * math.exp(eta) * p, rel=1e-14)
    assert L.A_z[1, 0] == pytest.approx(cmath.exp(th) * math.exp(-eta / 2), rel=1e-14)
    L2 = lax_matrices(field_s1, th + 2j * math.pi, 0.8, 0.4)
    assert np.max(np.abs(L2.A_z - L.A_z)) < 1e-14
    assert np.max(np.abs(L2.A_zbar - L.A_zbar)) < 1e-14


def test_rotation_covariance(field_s1):
    # z -> z e^{i delta}, lambda -> lambda e^{-i delta} with delta = 2 pi/(3 alpha) leaves the connection fixed
    d = 2 * math.pi / 3
    M1 = radial_system(field_s1, 0.3, 0.2)
    M2 = radial_system(field_s1, 0.3 - 1j * d, 0.2 + d)
    for r in (0.3, 1.0, 2.5):
        assert np.max(np.abs(M1(r) - M2(r))) < 1e-12


def test_wkb_leading_form(params_massive):
    errs = []
    for r in (3.0, 6.0, 12.0):
        a = wkb_initial_vector(params_massive, 0.2, r, 0.1, exact=True).value()
        b = wkb_initial_vector(params_massive, 0.2, r, 0.1, exact=False).value()
        errs.append(np.max(np.abs(a / b - 1)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] * 12 < 1.0  # O(1/rho)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(2.0, 8.0), st.floats(-0.5, 0.5))
def test_wkb_conjugate_components(params_massive, theta, rho, phi):
    w = wkb_initial_vector(params_massive, theta, rho, phi)
    assert w.prefactor[2] == pytest.approx(np.conj(w.prefactor[0]), rel=1e-12)


def test_wkb_wedge(params_massive):
    assert subdominance_ok(0.0, 0.0, 1.0)
    assert not subdominance_ok(2.0j, 0.0, 1.0)
    with pytest.raises(ValueError):
        wkb_initial_vector(params_massive, 2.0j, 5.0, 0.0)
    with pytest.raises(ValueError):
        wkb_initial_vector(params_massive, 0.0, 0.5, 0.0)


@pytest.mark.parametrize("phi", [0.0, 0.3])
def test_transport_vs_vacuum_oracle(field_s1, phi):
    # at rho = 3 the field equals its vacuum up to exp(-sqrt(12) rho^2/2)
    sol = field_s1
    th = np.array([0.2 - 2j * phi])
    st, _ = _transport_inward(sol, FieldEvaluator(sol), th, phi, default_start_radius(sol), [3.0], 1e-12)
    w = wkb_initial_vector(sol.params, th[0], 3.0, phi)
    ref = w.prefactor * cmath.exp(w.log_factor + complex(strip_exponent(3.0, phi, th[0], 1.0)))
    assert np.max(np.abs(st[3.0][0] - ref)) / np.max(np.abs(ref)) < 1e-4


def test_origin_frame_limits(field_s1):
    th = np.array([0.2, 0.5 + 0.1j])
    lim = frame_limits(th, 0.1, 0.1)
    errs = [np.max(np.abs(origin_frame(field_s1, th, r, 0.1)[0].matrix - lim)) for r in (1e-4, 1e-6)]
    assert errs[1] < errs[0] and errs[1] < 1e-4


def test_origin_frame_window(field_s1):
    with pytest.raises(FrameError):
        origin_frame(field_s1, [0.0], 0.5, 0.0)


def test_frame_resonance():
    check_frame_resonance(0.1)
    with pytest.raises(FrameError):
        check_frame_resonance(0.0)
    with pytest.raises(FrameError):
        check_frame_resonance(-0.5)


def test_q_independent_of_start_radius(field_s1):
    a = compute_q_triple(field_s1, [0.3])[0]
    b = compute_q_triple(field_s1, [0.3], rho_start=0.8 * default_start_radius(field_s1))[0]
    va, vb = np.array(a.as_tuple()), np.array(b.as_tuple())
    assert np.max(np.abs(va - vb)) / np.max(np.abs(va)) < 1e-6
    assert a.gauge == "Psi0-unit"


def test_q_independent_of_projection_radius(field_s1):
    # doubling the projection radius changes each Q by < 1e-5 relative
    a = np.array(compute_q_triple(field_s1, [0.3])[0].as_tuple())
    for rp in (1e-3, 4e-3):
        b = np.array(compute_q_triple(field_s1, [0.3], rho_proj=rp)[0].as_tuple())
        assert np.max(np.abs(a - b) / np.abs(a)) < 1e-5
    assert compute_q_triple(field_s1, [0.3 - 0.4j])[0].drift < 1e-5


def test_q_real_for_real_theta(field_s1):
    for q in compute_q_triple(field_s1, [-0.4, 0.3, 1.1]):
        v = np.array(q.as_tuple())
        assert np.max(np.abs(v.imag)) < 1e-10 * np.max(np.abs(v))


def test_chi_gauge_factors(params_massive):
    fp, f0, fm = chi_gauge_factors(0.0, params_massive, 0.0)
    assert f0 == pytest.approx(-1 / 1.1)
    assert fm == pytest.approx(1 / (2 * 1.1**2))
    assert fp == pytest.approx(1.0)


def test_psi_k0_is_transported_vector(field_s1):
    rho = [0.5, 1.0]
    d = massive_psi_k(field_s1, [0.3], 0, rho)
    st, _ = _transport_inward(field_s1, FieldEvaluator(field_s1), np.array([0.3]), 0.0,
                              default_start_radius(field_s1), rho, 1e-12)
    for j, r in enumerate(rho):
        ref = st[r][0] * np.exp(-strip_exponent(r, 0.0, 0.3, 1.0))
        assert np.allclose(d.vectors[0, j], ref, rtol=1e-8)
    assert np.max(np.abs(d.values.imag)) < 1e-12


def test_massive_wronskian_and_u(field_s1):
    W = massive_wronskian(field_s1, [-0.5, 0.7], [0.3, 1.0])
    assert np.max(np.abs(W + 3j * SQ3)) < 1e-6
    r = np.linspace(0.2, 1.5, 6)
    u = massive_u(field_s1, [0.2], -0.5, 0.5, r)
    p0 = massive_psi_k(field_s1, [0.2], 0, r).values[..., 0]
    assert np.max(np.abs(u - 1j * SQ3 * p0) / np.abs(p0)) < 1e-6


def test_psi_k_conjugation(field_s1):
    # for real theta psi_{-k} is the complex conjugate of psi_k
    a = massive_psi_k(field_s1, [0.2], 0.5, [0.6]).values
    b = massive_psi_k(field_s1, [0.2], -0.5, [0.6]).values
    assert np.allclose(a, np.conj(b), rtol=1e-8)


def test_psi_k_requires_common_ray(field_s1):
    with pytest.raises(ValueError):
        massive_psi_k(field_s1, [0.2, 0.2 + 0.3j], 0, [0.5])


def test_require_wkb_guard():
    from odeim_bd.field import solve_field, FieldConfig

    sol = solve_field(ModelParams(0.4, 0.1, 1.0), FieldConfig(n_modes=4))
    with pytest.raises(ValueError):
        compute_q_triple(sol, [0.0])
