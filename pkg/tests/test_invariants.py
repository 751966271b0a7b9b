import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullcontact.errors import BadProfileError, NotMonotoneError
from nullcontact.invariants import (CircleMap, Method, Orientation, RotationResult, Verdict,
                                    compare_regions, invariant_distance,
                                    rotation_angle_quadrature, rotation_angle_traced,
                                    rotation_number_of_circle_map, translation_number)
from nullcontact.regions import DiamondRegion, ellipsoid, make_revolution, polynomial

from oracles import BALL_ANGLE, ellipsoid_angle, polynomial_angle, polynomial_latitudes


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_quadrature_ellipsoid_family(a, b):
    # the angle depends on b/a only
    res = rotation_angle_quadrature(ellipsoid(a, b))
    assert res.total_angle == pytest.approx(ellipsoid_angle(b / a), rel=1e-9)
    assert res.method is Method.QUADRATURE and res.orientation is Orientation.CCW


@pytest.mark.parametrize("coeffs", [[1.0, 0.2, -1.0, 0.0, -0.3], [2.0, -0.5, -1.5, 0.1]])
def test_quadrature_polynomial_profile(coeffs):
    r = make_revolution(polynomial(coeffs))
    lo, hi = polynomial_latitudes(coeffs)
    assert (r.t_minus, r.t_plus) == pytest.approx((lo, hi), abs=1e-10)
    assert rotation_angle_quadrature(r.profile).total_angle == pytest.approx(
        polynomial_angle(coeffs), rel=1e-9)


def test_quadrature_needs_two_latitudes():
    # a region with a narrow waist has ten lightlike latitudes, not two
    coeffs = [0.46, 0.0, -3.46, 0.0, 8.0, 0.0, -5.0]
    with pytest.raises(BadProfileError):
        rotation_angle_quadrature(polynomial(coeffs))
    with pytest.raises(BadProfileError):
        make_revolution(polynomial(coeffs))


def test_result_validation():
    with pytest.raises(ValueError):
        RotationResult(1.0, 2.0, Method.TRACED, Orientation.CCW)
    r = RotationResult(7.0, 7.0 - 2 * math.pi, Method.TRACED, Orientation.CCW)
    assert "param_delta" not in r.to_dict()


@pytest.mark.parametrize("rho", [0.3, -1.2, 2.0, math.sqrt(2)])
def test_rigid_rotation(rho):
    m = CircleMap.from_function(lambda x: x + rho, 24)
    assert rotation_number_of_circle_map(m) == pytest.approx(rho, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-0.4, 0.4), st.floats(0, 2 * math.pi))
def test_conjugacy_invariance(rho, eps, shift):
    def h(x):
        return x + eps * math.sin(x + shift)

    def hinv(y):
        x = y
        for _ in range(80):
            x -= (h(x) - y) / (1.0 + eps * math.cos(x + shift))
        return x

    m = CircleMap.from_function(lambda x: h(hinv(x) + rho), 64)
    assert rotation_number_of_circle_map(m) == pytest.approx(rho, abs=1e-6)


def test_nonuniform_inputs():
    xs = np.sort(np.concatenate([np.linspace(0, 6, 40), [6.1, 6.2]]))
    m = CircleMap(xs, xs + 0.7)
    assert not m.equispaced
    assert translation_number(m) == pytest.approx(0.7, abs=1e-12)


def test_not_monotone():
    with pytest.raises(NotMonotoneError):
        rotation_number_of_circle_map(CircleMap.from_function(lambda x: x + 0.1, 16))
    with pytest.raises(NotMonotoneError):
        rotation_number_of_circle_map(CircleMap.from_function(lambda x: x + 2.0 * math.sin(x), 64))


def test_circle_map_validation():
    with pytest.raises(ValueError):
        CircleMap(np.array([0.0, 1.0, 0.5]), np.array([0.0, 1.0, 0.5]))
    with pytest.raises(ValueError):
        CircleMap(np.array([0.0, 7.0]), np.array([0.0, 7.0]))


def test_invariant_distance_ignores_orientation():
    assert invariant_distance(1.0, -1.0) == 0.0
    assert invariant_distance(3.1, -3.1 + 2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    assert invariant_distance(0.5, 1.0) == pytest.approx(0.5)


def test_traced_revolution(ball):
    res = rotation_angle_traced(ball)
    assert res.total_angle == pytest.approx(BALL_ANGLE, rel=1e-8)
    assert res.spread < 1e-8 and res.method is Method.TRACED


def test_traced_diamond_is_identity():
    res = rotation_angle_traced(DiamondRegion())
    assert abs(res.total_angle) < 1e-6


def test_compare(ball, ellipsoid12):
    v = compare_regions(ball, ellipsoid12)
    assert v.verdict is Verdict.DISTINGUISHED
    assert v.distance == pytest.approx(abs(BALL_ANGLE - ellipsoid_angle(2.0)), abs=1e-9)
    same = compare_regions(ball, make_revolution(ellipsoid(3.0, 3.0)))
    assert same.verdict is Verdict.INDISTINGUISHABLE
    assert same.to_dict()["verdict"] == "IndistinguishableByInvariant"


def test_compare_threshold(ball):
    close = make_revolution(ellipsoid(1.0, 1.0001))
    assert compare_regions(ball, close).verdict is Verdict.INDISTINGUISHABLE
    assert compare_regions(ball, close, tol=1e-6).verdict is Verdict.DISTINGUISHED
