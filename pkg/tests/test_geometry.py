import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullcontact.errors import GeometryError, NotFutureError, NotNullError
from nullcontact.geometry import (ETA, CausalKind, ConformalMap, Dilation, Event, Lorentz,
                                  NullRay, TimeOrientation, Translation, apply_conformal,
                                  apply_conformal_ray, boost, causal_character,
                                  chart_of_geodesic, contact_form_eval, reduce_angle,
                                  rotation, sky, wrap_angle)

coord = st.floats(-3, 3, allow_nan=False)
angle = st.floats(0, 2 * math.pi, allow_nan=False)


@pytest.mark.parametrize("v, kind, orient", [
    ((1, 0, 0), CausalKind.TIMELIKE, TimeOrientation.FUTURE),
    ((-2, 1, 0), CausalKind.TIMELIKE, TimeOrientation.PAST),
    ((1, 0.6, 0.8), CausalKind.NULL, TimeOrientation.FUTURE),
    ((0, 1, 0), CausalKind.SPACELIKE, None),
    ((0, 0, 0), CausalKind.ZERO, None),
])
def test_causal_character(v, kind, orient):
    c = causal_character(v)
    assert c.kind is kind and c.orientation is orient


def test_angle_reductions():
    assert reduce_angle(-0.5) == pytest.approx(2 * math.pi - 0.5)
    assert 0.0 <= reduce_angle(7 * math.pi) < 2 * math.pi
    assert wrap_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert wrap_angle(math.pi) == pytest.approx(math.pi)


@settings(max_examples=50, deadline=None)
@given(coord, coord, coord, angle, st.floats(-2, 2))
def test_chart_independent_of_point_on_ray(t, x, y, th, s):
    v = (1.0, math.cos(th), math.sin(th))
    a = chart_of_geodesic((t, x, y), v)
    b = chart_of_geodesic((t + s, x + s * v[1], y + s * v[2]), (2.0 * v[0], 2.0 * v[1], 2.0 * v[2]))
    assert np.allclose(a.q, b.q, atol=1e-12)
    assert abs(wrap_angle(a.theta - b.theta)) < 1e-12
    # the chart ray passes through the point it came from
    e = a.event(t)
    assert np.allclose(e, (t, x, y), atol=1e-12)


def test_chart_rejects_non_null_and_past():
    with pytest.raises(NotNullError):
        chart_of_geodesic((0, 0, 0), (1, 0.5, 0))
    with pytest.raises(NotFutureError):
        chart_of_geodesic((0, 0, 0), (-1, 1, 0))


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, angle)
def test_skies_are_legendrian(t, x, y, th):
    s = sky((t, x, y))
    dq, _ = s.tangent(th)
    assert abs(contact_form_eval(s(th), dq)) < 1e-12
    # every ray of the sky passes through the point
    assert np.allclose(s(th).event(t), (t, x, y), atol=1e-12)


def test_contact_form_kernel():
    r = NullRay(0.3, -0.2, 0.7)
    assert contact_form_eval(r, (-math.sin(0.7), math.cos(0.7))) == pytest.approx(0.0, abs=1e-15)
    assert contact_form_eval(r, (math.cos(0.7), math.sin(0.7))) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), angle)
def test_boost_is_lorentz(chi, a):
    m = boost(chi, (math.cos(a), math.sin(a))).array
    assert np.allclose(m.T @ ETA @ m, ETA, atol=1e-9 * math.cosh(chi) ** 2)


def test_lorentz_validation():
    with pytest.raises(GeometryError):
        Lorentz(((2, 0, 0), (0, 1, 0), (0, 0, 1)))
    with pytest.raises(GeometryError):
        Lorentz(((-1, 0, 0), (0, 1, 0), (0, 0, 1)))
    with pytest.raises(GeometryError):
        Dilation(0.0)
    with pytest.raises(GeometryError):
        boost(1.0, (0.0, 0.0))


def _sample_map():
    return ConformalMap((boost(0.5, (1.0, 0.0)), rotation(0.3), Dilation(1.7),
                         Translation(Event(0.3, 0.2, -0.1))))


def test_factor_order():
    m = ConformalMap((Dilation(2.0), Translation(Event(1.0, 0.0, 0.0))))
    assert apply_conformal(m, (1.0, 0.0, 0.0)) == Event(3.0, 0.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(coord, coord, coord)
def test_inverse_roundtrip(t, x, y):
    m = _sample_map()
    p = apply_conformal(m.inverse(), apply_conformal(m, (t, x, y)))
    assert np.allclose(p, (t, x, y), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(coord, coord, angle, st.floats(-2, 2))
def test_conformal_maps_rays_to_rays(q1, q2, th, s):
    m = _sample_map()
    img = apply_conformal_ray(m, NullRay(q1, q2, th))
    p = apply_conformal(m, NullRay(q1, q2, th).event(s))
    back = chart_of_geodesic(p, (1.0, math.cos(img.theta), math.sin(img.theta)))
    assert np.allclose(back.q, img.q, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(coord, coord, coord, angle)
def test_conformal_maps_preserve_skies(t, x, y, th):
    # a sky maps to the sky of the image point, so the contact structure is preserved
    m = _sample_map()
    img = apply_conformal_ray(m, sky((t, x, y))(th))
    p = apply_conformal(m, (t, x, y))
    assert np.allclose(img.event(p.t), p, atol=1e-9)
