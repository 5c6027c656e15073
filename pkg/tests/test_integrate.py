import math

import numpy as np
import pytest

from lamsol.geomtypes import BudgetExceeded, IntegrationStalled
from lamsol.integrate import (
    IntegrationConfig,
    detect_events,
    hermite_eval,
    integrate_adaptive,
    integrate_two_sided,
    polyline_self_intersections,
    polyline_self_intersections_bruteforce,
)


def exp_rhs(s, y):
    return y


def oscillator(s, y):
    return np.array([y[1], -y[0]])


def test_exponential_growth():
    tr = integrate_adaptive(exp_rhs, [1.0], (0.0, 1.0))
    assert tr.final[0] == pytest.approx(math.e, abs=1e-8)


def test_oscillator_period_and_energy():
    tr = integrate_adaptive(oscillator, [1.0, 0.0], (0.0, 2 * math.pi))
    np.testing.assert_allclose(tr.final, [1.0, 0.0], atol=1e-7)
    energy = tr.y[:, 0] ** 2 + tr.y[:, 1] ** 2
    assert np.max(np.abs(energy - 1.0)) < 1e-8


def test_backward_integration():
    tr = integrate_adaptive(exp_rhs, [1.0], (0.0, -2.0))
    assert tr.s[-1] == -2.0
    assert tr.final[0] == pytest.approx(math.exp(-2.0), rel=1e-9)
    asc = tr.ascending()
    assert np.all(np.diff(asc.s) > 0)


def test_s_eval_lands_exactly():
    pts = np.linspace(0.0, 3.0, 7)
    tr = integrate_adaptive(oscillator, [1.0, 0.0], (0.0, 3.0), s_eval=pts)
    np.testing.assert_array_equal(tr.s, pts)
    np.testing.assert_allclose(tr.y[:, 0], np.cos(pts), atol=1e-9)


def test_s_eval_near_start_is_recorded():
    pts = [-1e-17, -0.5, -1.0]
    tr = integrate_adaptive(exp_rhs, [1.0], (0.0, -1.0), s_eval=pts)
    np.testing.assert_array_equal(tr.s, pts)


def test_s_eval_outside_range_rejected():
    with pytest.raises(ValueError):
        integrate_adaptive(exp_rhs, [1.0], (0.0, 1.0), s_eval=[2.0])


def test_terminal_event_is_bisected():
    tr = integrate_adaptive(oscillator, [1.0, 0.0], (0.0, 10.0),
                            terminal=[("zero", lambda y: y[0])])
    assert tr.status == "terminated:zero"
    assert tr.events[0].s == pytest.approx(math.pi / 2, abs=1e-9)
    assert tr.s[-1] == tr.events[0].s


def test_two_sided_has_single_start_sample():
    tr = integrate_two_sided(oscillator, [1.0, 0.0], 0.0, (-2.0, 3.0))
    assert np.count_nonzero(tr.s == 0.0) == 1
    assert np.all(np.diff(tr.s) > 0)
    np.testing.assert_allclose(tr.y[:, 0], np.cos(tr.s), atol=1e-9)


def test_dense_output_accuracy():
    tr = integrate_two_sided(oscillator, [1.0, 0.0], 0.0, (-2.0, 3.0))
    u = np.linspace(-2.0, 3.0, 101)
    np.testing.assert_allclose(tr(u)[:, 0], np.cos(u), atol=1e-6)


def test_hermite_scalar_and_vector_shapes():
    s = np.array([0.0, 1.0])
    y = np.array([[0.0], [1.0]])
    dy = np.array([[1.0], [1.0]])
    assert hermite_eval(s, y, dy, 0.5).shape == (1,)
    assert hermite_eval(s, y, dy, [0.25, 0.5]).shape == (2, 1)


def test_stall_reports_last_state():
    # y' = y^2 blows up at s = 1
    with pytest.raises(IntegrationStalled) as exc:
        integrate_adaptive(lambda s, y: y * y, [1.0], (0.0, 2.0))
    assert exc.value.s == pytest.approx(1.0, abs=1e-3)


def test_budget():
    cfg = IntegrationConfig(max_step=0.01, max_samples=50)
    with pytest.raises(BudgetExceeded):
        integrate_adaptive(exp_rhs, [1.0], (0.0, 1.0), cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegrationConfig(rel_tol=-1.0)
    assert IntegrationConfig().with_tol(1e-6).rel_tol == 1e-6


def test_detect_events_on_samples():
    tr = integrate_two_sided(oscillator, [1.0, 0.0], 0.0, (0.0, 8.0))
    ev = detect_events(tr, {"x": lambda y: y[0]})
    np.testing.assert_allclose([e.s for e in ev], [math.pi / 2, 3 * math.pi / 2, 5 * math.pi / 2],
                               atol=1e-8)


def test_polyline_figure_eight():
    # start off the double point so the crossing is interior to two segments
    t = np.linspace(0.3, 2 * math.pi + 0.3, 400)
    pts = np.column_stack([np.sin(t), np.sin(2 * t)])
    cr = polyline_self_intersections(pts)
    assert len(cr) == 1
    np.testing.assert_allclose(cr[0].point, (0.0, 0.0), atol=1e-6)
    assert cr == polyline_self_intersections_bruteforce(pts)


def test_polyline_simple_curve_has_no_crossings():
    x = np.linspace(-3, 3, 200)
    assert polyline_self_intersections(np.column_stack([x, x**2])) == []


def test_collinear_overlap_is_not_transverse():
    pts = np.array([[0, 0], [1, 0], [2, 0], [1.5, 0], [3, 0]], dtype=float)
    assert polyline_self_intersections(pts) == polyline_self_intersections_bruteforce(pts)
