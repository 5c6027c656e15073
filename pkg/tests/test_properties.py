"""Randomized invariants of the integrator and the three profile families."""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from lamsol.cylindrical import closed_form_cyl, conserved_along, integrate_cyl
from lamsol.geomtypes import make_params
from lamsol.integrate import (
    IntegrationConfig,
    integrate_adaptive,
    polyline_self_intersections,
    polyline_self_intersections_bruteforce,
)
from lamsol.phaseplane import find_singularities, pp_rhs, trace_trajectory
from lamsol.rotational import (
    integrate_rot,
    integrate_rot_from_axis,
    monotone_functional,
    rot_rhs,
)
from lamsol.transtype import integrate_gg, translation_residual

E3 = (0.0, 0.0, 1.0)
FAST = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])

lams = st.floats(-2.0, 2.0)
pos_lams = st.floats(0.01, 2.0)
v3s = st.floats(0.2, 1.0)
angles = st.floats(0.0, 2 * math.pi, exclude_max=True)


def _v(v3):
    return (math.sqrt(1.0 - v3 * v3), 0.0, v3)


# ---------------------------------------------------------------------------
# integrator

def test_halving_tolerance_never_hurts():
    # the three closed-form references: critical, grim reaper, supercritical;
    # the step cap is lifted so that the tolerance alone sets the step size
    for lam, span in ((0.5, 10.0), (0.0, 10.0), (1.0, 1.7)):
        p = make_params(lam, E3)
        errs = []
        for tol in (1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5):
            cfg = IntegrationConfig(rel_tol=tol, abs_tol=tol, max_step=10.0)
            c = integrate_cyl(p, 0.0, (-span, span), cfg)
            errs.append(np.max(np.abs(c.states - np.column_stack(closed_form_cyl(p, c.s)))))
        assert all(b <= a for a, b in zip(errs, errs[1:])), errs


@FAST
@given(lam=lams, v3=v3s, th0=angles, span=st.floats(0.5, 8.0))
def test_backward_then_forward_returns(lam, v3, th0, span):
    rhs_p = make_params(lam, _v(v3))
    fwd = integrate_cyl(rhs_p, th0, (0.0, span))
    end = fwd.states[-1]

    def rhs(s, y):
        c = math.cos(y[2])
        return np.array((c, math.sin(y[2]), 2 * lam + v3 * c))

    back = integrate_adaptive(rhs, end, (span, 0.0))
    tol = 1e-10
    assert np.max(np.abs(back.final - (0.0, 0.0, th0))) < 10 * tol * max(1.0, np.max(np.abs(end)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(4, 200))
def test_polyline_matches_bruteforce(seed, n):
    pts = np.random.default_rng(seed).uniform(-1, 1, size=(n, 2))
    fast = polyline_self_intersections(pts)
    slow = polyline_self_intersections_bruteforce(pts)
    assert [(c.i, c.j) for c in fast] == [(c.i, c.j) for c in slow]
    for a, b in zip(fast, slow):
        assert np.allclose(a.point, b.point, atol=1e-9)


# ---------------------------------------------------------------------------
# cylindrical

@FAST
@given(lam=st.floats(0.0, 2.0), v3=v3s, th0=angles)
def test_conservation_bound(lam, v3, th0):
    c = integrate_cyl(make_params(lam, _v(v3)), th0)
    e = conserved_along(c)
    assert np.max(np.abs(e - e[0])) <= 100 * 1e-10 * abs(e[0]) + 1e-12


@FAST
@given(lam=lams, v3=v3s, th0=angles)
def test_line_dichotomy(lam, v3, th0):
    c = integrate_cyl(make_params(lam, _v(v3)), th0)
    d = c.derivs[:, 2]
    if np.any(np.abs(d) < 1e-13):
        th = c.column("theta")
        assert np.max(np.abs(th - th[0])) < 1e-10


@pytest.mark.parametrize("lam", [0.5, 1.0 / 3.0])
def test_line_data_stay_straight(lam):
    v3 = 2 * lam if 2 * lam <= 1 else 1.0
    th0 = math.acos(-2 * lam / v3)
    c = integrate_cyl(make_params(lam, _v(v3)), th0)
    assert np.max(np.abs(c.column("theta") - th0)) < 1e-10


@pytest.mark.parametrize("lam", [0.3, 0.5, 1.0])
@pytest.mark.parametrize("th0", [0.0, math.pi / 3])
def test_cylindrical_sign_flip_grid(lam, th0):
    s = np.linspace(-10, 10, 201)
    a = integrate_cyl(make_params(lam, E3), th0, s_eval=s)
    b = integrate_cyl(make_params(-lam, E3), math.pi - th0, s_eval=s)
    assert np.max(np.abs(a.column("y") + b.column("y"))) < 1e-7
    assert np.max(np.abs(a.column("z") - b.column("z"))) < 1e-7


@FAST
@given(lam=pos_lams, v3=v3s, th0=angles)
def test_theta_monotone(lam, v3, th0):
    if abs(2 * lam + v3 * math.cos(th0)) < 1e-13:
        return
    d = integrate_cyl(make_params(lam, _v(v3)), th0).derivs[:, 2]
    assert np.all(d > 0) or np.all(d < 0)


@FAST
@given(v3=v3s, excess=st.floats(0.01, 1.0), th0=angles)
def test_supercritical_bound(v3, excess, th0):
    lam = v3 / 2 + excess
    d = integrate_cyl(make_params(lam, _v(v3)), th0).derivs[:, 2]
    assert np.min(d) >= 2 * lam - v3 - 1e-12


# ---------------------------------------------------------------------------
# rotational

@FAST
@given(lam=lams, x0=st.floats(0.2, 4.0), th0=angles)
def test_monotone_functional(lam, x0, th0):
    c = integrate_rot(make_params(lam, E3), x0, th0, (-8, 8))
    assert np.all(np.diff(monotone_functional(c)) >= -1e-9)


@FAST
@given(lam=lams, x0=st.floats(0.2, 4.0), th0=angles)
def test_axis_hits_are_orthogonal(lam, x0, th0):
    c = integrate_rot(make_params(lam, E3), x0, th0, (-8, 8))
    for e in c.events:
        if e.tag == "axis":
            assert abs(math.sin(e.state[2])) < 1e-4


@FAST
@given(lam=pos_lams)
def test_axis_start_positive_lambda(lam):
    c = integrate_rot_from_axis(make_params(lam, E3), (0.0, 20.0))
    th = c.column("theta")[1:]
    assert np.all((th > 0) & (th < math.pi))
    assert np.max(c.column("x")) < 1 / lam


@pytest.mark.parametrize("lam", [0.3, -0.6, 1.2])
@pytest.mark.parametrize("th0", [0.4, 2.5])
def test_rotational_sign_flip_grid(lam, th0):
    s = np.linspace(-3, 3, 61)
    a = integrate_rot(make_params(lam, E3), 1.5, th0, (-3, 3), s_eval=s)
    b = integrate_rot(make_params(-lam, E3), 1.5, th0 + math.pi, (-3, 3), s_eval=s)
    common = np.intersect1d(a.s, -b.s)
    assert common.size > 10
    ia, ib = np.searchsorted(a.s, common), np.searchsorted(b.s, -common)
    assert np.max(np.abs(a.states[ia, :2] - b.states[ib, :2])) < 1e-7


@pytest.mark.parametrize("lam", [1.0, 0.25, 0.15, 0.0, -0.25, -1.0])
def test_series_handoff(lam):
    p = make_params(lam, E3)
    a = integrate_rot_from_axis(p, (0, 1.0), s_eps=1e-4, s_eval=[1.0])
    b = integrate_rot_from_axis(p, (0, 1.0), s_eps=5e-5, s_eval=[1.0])
    assert np.max(np.abs(a.states[-1, :2] - b.states[-1, :2])) < 1e-8


# ---------------------------------------------------------------------------
# phase plane

@FAST
@given(lam=lams, x=st.floats(0.05, 5.0), th=st.floats(-math.pi, math.pi))
def test_phase_field_is_scaled_profile_field(lam, x, th):
    _, _, dth = rot_rhs((x, 0.0, th), make_params(lam, E3))
    a, b = pp_rhs(th, x, lam)
    assert abs(dth - a / x) < 1e-14 * max(1.0, abs(a / x))
    assert abs(math.cos(th) - b / x) < 1e-14


@pytest.mark.parametrize("lam", [0.1, 0.15, 0.2, 0.25, 0.5, 1.0, -0.1, -0.15, -0.2, -0.25, -0.5, -1.0])
def test_trace_classify_coherence(lam):
    q = find_singularities(lam)[-1]
    stable = q.stability.value.startswith("Stable")
    start = np.array(q.location) + (0.6e-2, 0.8e-2)
    orb = trace_trajectory(start, lam, (0, 80))
    dist = np.hypot(*(orb.final - np.array(q.location)))
    if stable:
        assert orb.s[-1] == 80 and dist < 1e-3
    else:
        assert dist > 1e-1


# ---------------------------------------------------------------------------
# translation type

@FAST
@given(a=st.floats(-2, 2), lam=st.floats(-1, 1), th=st.floats(0, math.pi),
       ph=st.floats(0, 2 * math.pi))
def test_translation_residual_small(a, lam, th, ph):
    v = (math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th))
    c = integrate_gg(a, v, lam, (-0.3, 0.3))
    assert translation_residual(a, 0.0, c, v, lam)["max"] < 10 * 1e-10 * max(1.0, np.max(np.abs(c.derivs)))


@FAST
@given(lam=st.floats(-0.8, 0.8), tilt=st.floats(-0.6, 0.6))
def test_translation_matches_cylindrical(lam, tilt):
    # a = 0 and v = (0, v2, v3): rotate the v = e3 cylindrical profile so that e3
    # goes to v; its graph over the rotated y-axis must be g
    v = (0.0, -math.sin(tilt), math.cos(tilt))
    cyl = integrate_cyl(make_params(lam, E3), -tilt, (-0.4, 0.4))
    y, z = cyl.column("y"), cyl.column("z")
    Y = y * math.cos(tilt) - z * math.sin(tilt)
    Z = y * math.sin(tilt) + z * math.cos(tilt)
    assert np.all(np.diff(Y) > 0)
    g = integrate_gg(0.0, v, lam, (Y[0], Y[-1]), s_eval=Y)
    assert g.s.size == Y.size
    assert np.max(np.abs(g.column("g") - Z)) < 1e-6
