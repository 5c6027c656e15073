import math

import numpy as np
import pytest

from lamsol.geomtypes import (
    CurveKind,
    CylState,
    InvalidDensityVector,
    ProfileCurve,
    RegimeReport,
    SolitonParams,
    SurfaceGrid,
    make_params,
)


def test_make_params_normalizes():
    p = make_params(0.5, (0.0, 0.0, 2.0))
    assert p.v == (0.0, 0.0, 1.0)
    assert p.v3 == 1.0
    q = make_params(0.5, (3.0, 0.0, 4.0))
    assert q.v == pytest.approx((0.6, 0.0, 0.8), abs=1e-15)


def test_make_params_is_idempotent():
    q = make_params(1.0, (1.0, 2.0, 3.0))
    assert make_params(q.lam, q.v) == q


@pytest.mark.parametrize("v", [(0, 0, 0), (1, 2), (math.nan, 0, 1), (math.inf, 0, 0)])
def test_make_params_rejects_bad_vectors(v):
    with pytest.raises(InvalidDensityVector):
        make_params(0.0, v)


def test_params_require_unit_vector():
    with pytest.raises(InvalidDensityVector):
        SolitonParams(0.0, (0.0, 0.0, 2.0))


def test_flipped_negates_lambda_only():
    p = make_params(0.3, (0.6, 0.0, 0.8))
    assert p.flipped() == SolitonParams(-0.3, p.v)


def _curve(n=5):
    s = np.linspace(0.0, 1.0, n)
    states = np.column_stack([s, s**2, np.zeros(n)])
    derivs = np.column_stack([np.ones(n), 2 * s, np.zeros(n)])
    return ProfileCurve(CurveKind.Cylindrical, make_params(0.0), s, states, derivs, (), {"theta0": 0.0})


def test_profile_curve_is_read_only():
    c = _curve()
    with pytest.raises(ValueError):
        c.states[0, 0] = 1.0
    with pytest.raises(TypeError):
        c.meta["x"] = 1


def test_profile_curve_rejects_unsorted_parameter():
    s = np.array([0.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        ProfileCurve(CurveKind.Cylindrical, make_params(0.0), s, np.zeros((3, 3)), np.zeros((3, 3)))


def test_profile_curve_equality_and_columns():
    a, b = _curve(), _curve()
    assert a == b
    assert a.columns == ("y", "z", "theta")
    np.testing.assert_array_equal(a.column("z"), a.s**2)
    assert a.samples[1] == CylState(0.25, 0.25, 0.0625, 0.0)


def test_dense_output_reproduces_cubic():
    # z = s^2 is reproduced exactly by cubic Hermite interpolation
    c = _curve()
    u = np.linspace(0.0, 1.0, 17)
    np.testing.assert_allclose(c(u)[:, 1], u**2, atol=1e-15)


def test_report_json_keys():
    rep = RegimeReport("GrimReaper", 0.0, 1.0, 0.0, residual={"max": float("nan"), "mean": 0.0})
    d = rep.to_json_dict()
    assert list(d)[:4] == ["regime", "lambda", "v3", "theta0"]
    assert d["residual"]["max"] is None


def test_surface_grid_from_positions():
    pos = np.zeros((3, 4, 3))
    g = SurfaceGrid.from_positions(np.arange(3.0), np.arange(4.0), pos)
    assert g.shape == (3, 4)
    assert np.isnan(g.mean_curvature).all()
