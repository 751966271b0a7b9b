import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullcontact.boundary import tangency_point
from nullcontact.errors import RegionError
from nullcontact.foliation import (Branch, DiamondTorus, RevolutionTorus, Terminal,
                                   boundary_torus, chart_foliation_direction, contact_form_on,
                                   dividing_set, foliation_consistency, integrate_leaf,
                                   leaf_chart_tangent, lower_circle_start,
                                   revolution_torus_point, singular_set, torus_surface)
from nullcontact.geometry import ConformalMap, Event, Translation, boost
from nullcontact.regions import DiamondRegion, ellipsoid, make_revolution, transform

BALL_ANGLE = 2 * math.pi * (math.sqrt(2) - 1)


@pytest.fixture(scope="module")
def boosted():
    return transform(make_revolution(ellipsoid(1.0, 1.0)),
                     ConformalMap((boost(0.5), Translation(Event(0.3, 0.2, -0.1)))))


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_torus_rays_graze_the_ball(phi, s):
    ball = make_revolution(ellipsoid(1.0, 1.0))
    pt = torus_surface(ball).torus_point(phi, s)
    assert np.allclose(pt.chart.event(pt.t), pt.event, atol=1e-12)
    tg = tangency_point(ball, pt.chart)
    assert abs(tg.G) < 1e-12


def test_torus_sheets(ball):
    surf = torus_surface(ball)
    assert isinstance(surf, RevolutionTorus)
    assert surf.torus_point(0.3, 0.0).branch is None
    assert surf.torus_point(0.3, math.pi).branch is None
    assert surf.torus_point(0.3, 1.0).branch is Branch.PLUS
    assert surf.torus_point(0.3, 4.0).branch is Branch.MINUS
    assert surf.torus_point(0.3, 0.0).t == pytest.approx(ball.t_minus)
    assert surf.torus_point(0.3, math.pi).t == pytest.approx(ball.t_plus)


@pytest.mark.parametrize("phi, s", [(0.1, 0.5), (2.0, 2.5), (4.0, 3.5), (5.5, 5.9)])
def test_analytic_tangents_match_differences(ellipsoid12, phi, s):
    surf = torus_surface(ellipsoid12)
    for a, b in zip(surf.tangents(phi, s), surf.fd_tangents(phi, s)):
        assert np.allclose(a, b, atol=1e-7)


def test_singular_points(ball):
    surf = torus_surface(ball)
    assert chart_foliation_direction(surf, 0.7, 0.0).singular
    assert chart_foliation_direction(surf, 0.7, math.pi).singular
    d = chart_foliation_direction(surf, 0.7, 1.0)
    assert not d.singular
    # the foliation line lies in the contact plane
    assert abs(contact_form_on(surf.embed(0.7, 1.0)[2], d.vector)) < 1e-12


def test_singular_set_ball(ball):
    ss = singular_set(ball, n_phi=8)
    assert ss.method == "chart-detection" and ss.mismatch < 1e-6


def test_singular_set_diamond():
    ss = singular_set(DiamondRegion(), n_phi=8, tol=1e-8)
    for ray in ss.detected_lower + ss.detected_upper:
        assert math.hypot(*ray.q) == pytest.approx(1.0, abs=1e-12)
        off = (ray.theta - math.atan2(ray.q2, ray.q1)) % math.pi
        assert min(off, math.pi - off) < 1e-8


def test_singular_set_general(boosted):
    ss = singular_set(boosted, n_phi=8)
    assert ss.method == "tangency" and ss.mismatch < 1e-6


def test_ball_leaf_half_turn(ball):
    up = integrate_leaf(ball, lower_circle_start(ball, 0.4), branch=Branch.PLUS)
    assert up.terminal is Terminal.UPPER
    assert up.end.t == ball.t_plus and up.end.branch is None  # the two families merge
    assert up.delta_phi == pytest.approx(BALL_ANGLE / 2, abs=1e-9)
    assert np.all(np.diff(up.times) > 0)
    down = integrate_leaf(ball, up.end, branch=Branch.MINUS, backward=True)
    assert down.terminal is Terminal.LOWER
    assert up.delta_phi + down.delta_phi == pytest.approx(BALL_ANGLE, abs=1e-9)


def test_leaf_needs_branch_on_singular_circle(ball):
    with pytest.raises(ValueError):
        integrate_leaf(ball, lower_circle_start(ball, 0.0))


def test_leaf_stops_at_t_end(ball):
    lf = integrate_leaf(ball, revolution_torus_point(ball, 0.0, 0.0, Branch.PLUS), t_end=0.3)
    assert lf.terminal is Terminal.BUDGET and lf.end.t == pytest.approx(0.3)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.6, 0.6), st.floats(0, 2 * math.pi), st.booleans())
def test_leaves_are_legendrian(t, phi, plus):
    r = make_revolution(ellipsoid(1.0, 2.0))
    pt = revolution_torus_point(r, t * r.t_plus / 0.7, phi, Branch.PLUS if plus else Branch.MINUS)
    v = leaf_chart_tangent(r, pt)
    assert abs(contact_form_on(pt.chart.theta, v)) < 1e-7 * np.linalg.norm(v)


def test_foliation_consistency_sample(ellipsoid12):
    assert foliation_consistency(ellipsoid12, 40).max_angle < 1e-6


def test_diamond_leaves():
    d = DiamondRegion()
    for phi in (0.0, 1.0, 4.0):
        up = integrate_leaf(d, lower_circle_start(d, phi), branch=Branch.PLUS)
        assert up.terminal is Terminal.UPPER
        # fibres of the diamond torus: the ray's q is fixed
        assert np.allclose(up.end.chart.q, up.start.chart.q, atol=1e-9)


def test_diamond_torus():
    surf = torus_surface(DiamondRegion())
    assert isinstance(surf, DiamondTorus)
    pt = surf.torus_point(1.0, 0.5)
    assert pt.branch is Branch.PLUS and pt.chart.theta == pytest.approx(1.5)


def test_boosted_torus_and_leaves(boosted):
    tor = boundary_torus(boosted, n_s=8, n_phi=8)
    assert tor.max_tangency_gap < 1e-6 and len(tor.rows()) == 64
    up = integrate_leaf(boosted, lower_circle_start(boosted, 1.0), branch=Branch.PLUS)
    assert up.terminal is Terminal.UPPER
    assert np.all(np.diff(up.times) > 0)
    assert max(abs(boosted.value(*p.event)) for p in up.points) < 1e-8


@pytest.mark.parametrize("ab", [(1.0, 1.0), (1.0, 2.0)])
def test_dividing_set_equator(ab):
    r = make_revolution(ellipsoid(*ab))
    ds = dividing_set(r, n_phi=8)
    assert ds.count == 2 and ds.report.ok
    assert max(abs(x) for x in ds.latitudes) < 1e-9


def test_dividing_set_shifted_center(ball):
    ds = dividing_set(ball, (0.2, 0.1, -0.1), n_phi=8)
    assert ds.count == 2 and ds.report.ok


def test_dividing_set_errors(ball):
    with pytest.raises(RegionError):
        dividing_set(DiamondRegion())
    with pytest.raises(RegionError):
        dividing_set(ball, (0.0, 2.0, 0.0))
