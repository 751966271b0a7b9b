"""Acceptance criteria, one test each.

Every test appends a ``CRITERION n: PASS|FAIL`` line that is printed in the
pytest terminal summary (and directly when this file is run as a script).
Reference values come from ``oracles.py`` or are written out inline.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from nullcontact.boundary import check_strong_null_convexity, lightlike_latitudes
from nullcontact.foliation import (Branch, Terminal, chart_distance, dividing_set,
                                   foliation_consistency, integrate_leaf, lower_circle_start,
                                   singular_set)
from nullcontact.geometry import (ConformalMap, Event, Translation, boost, contact_form_eval,
                                  sky, wrap_angle)
from nullcontact.invariants import (CircleMap, Verdict, compare_regions,
                                    rotation_angle_quadrature, rotation_angle_traced,
                                    rotation_number_of_circle_map)
from nullcontact.regions import (DiamondRegion, ellipsoid, euclidean_ball, make_revolution,
                                 polynomial, smooth_union, transform)
from nullcontact.selftest import run_selftest

from oracles import BALL_ANGLE, ellipsoid_angle, polynomial_angle

# tolerances pinned from the acceptance criteria
QUAD_REL = 1e-8
TRACE_REL = 1e-4
CASE_SECONDS = 1.0
ANCHOR_ABS = 1e-6
CONFORMAL_ABS = 1e-3
DIAMOND_SINGULAR = 1e-8
DIAMOND_IDENTITY = 1e-6
CONSISTENCY_RAD = 1e-6
SINGULAR_AGREE = 1e-6
LATITUDE_ABS = 1e-10
HESSIAN_ABS = 1e-9
LEGENDRIAN = 1e-12
CONJUGACY = 1e-6
FULL_SECONDS = 60.0
QUICK_SECONDS = 10.0


def record(n: int, ok: bool, detail: str):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _ball():
    return make_revolution(ellipsoid(1.0, 1.0))


def test_criterion_1_three_way_agreement():
    ok, parts = True, []
    for e in (0.5, 1.0, 2.0):
        exact = ellipsoid_angle(e)
        # the closed form itself, against the sine-substituted integral
        assert abs(polynomial_angle([e * e, 0.0, -e * e]) - exact) < 1e-12 * exact
        t0 = time.perf_counter()
        r = make_revolution(ellipsoid(1.0, e))
        quad = rotation_angle_quadrature(r.profile).total_angle
        trace = rotation_angle_traced(r).total_angle
        dt = time.perf_counter() - t0
        eq, et = abs(quad - exact) / exact, abs(trace - exact) / exact
        ok &= eq < QUAD_REL and et < TRACE_REL and dt < CASE_SECONDS
        parts.append(f"e={e:g} quad {eq:.1e} trace {et:.1e} {dt:.2f}s")
    record(1, ok, "; ".join(parts))


def test_criterion_2_unit_ball_anchor():
    red = rotation_angle_quadrature(ellipsoid(1.0, 1.0)).reduced
    err = abs(abs(red) - BALL_ANGLE)
    record(2, err < ANCHOR_ABS, f"reduced {red:.10f}, |.| - 2pi(sqrt2-1) = {err:.1e}")


def test_criterion_3_conformal_invariance():
    m = ConformalMap((boost(0.5, (1.0, 0.0)), Translation(Event(0.3, 0.2, -0.1))))
    res = rotation_angle_traced(transform(_ball(), m))
    d = abs(wrap_angle(res.reduced - wrap_angle(BALL_ANGLE)))
    record(3, d < CONFORMAL_ABS, f"boosted+translated {res.reduced:.10f}, difference {d:.1e}")


def test_criterion_4_diamond():
    d = DiamondRegion()
    ss = singular_set(d, n_phi=32, tol=DIAMOND_SINGULAR)
    worst = 0.0
    for rays, offset in ((ss.detected_lower, 0.0), (ss.detected_upper, math.pi)):
        assert len(rays) == 32
        for ray in rays:
            worst = max(worst, abs(math.hypot(ray.q1, ray.q2) - 1.0),
                        abs(wrap_angle(ray.theta - math.atan2(ray.q2, ray.q1) - offset)))
    ret = 0.0
    for k in range(16):
        start = lower_circle_start(d, 2 * math.pi * k / 16)
        up = integrate_leaf(d, start, branch=Branch.PLUS)
        down = integrate_leaf(d, up.end, branch=Branch.MINUS)
        ret = max(ret, chart_distance(start.chart, down.end.chart))
    verdict = compare_regions(_ball(), d).verdict
    ok = worst < DIAMOND_SINGULAR and ret < DIAMOND_IDENTITY and verdict is Verdict.DISTINGUISHED
    record(4, ok, f"singular set error {worst:.1e}, return map displacement {ret:.1e}, "
                  f"compare {verdict.value}")


def test_criterion_5_foliation_consistency():
    ok, parts = True, []
    for a, b in ((1.0, 1.0), (1.0, 2.0)):
        r = make_revolution(ellipsoid(a, b))
        rep = foliation_consistency(r, 1000)
        mis = singular_set(r, tol=SINGULAR_AGREE).mismatch
        ok &= rep.n_samples == 1000 and rep.max_angle < CONSISTENCY_RAD and mis < SINGULAR_AGREE
        parts.append(f"({a:g},{b:g}) angle {rep.max_angle:.1e} singular {mis:.1e}")
    record(5, ok, "; ".join(parts))


def test_criterion_6_latitudes():
    worst = 0.0
    for a, b in ((1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (0.5, 3.0), (3.0, 0.7)):
        lo, hi = lightlike_latitudes(ellipsoid(a, b))
        ref = a * a / math.sqrt(a * a + b * b)
        worst = max(worst, abs(lo + ref), abs(hi - ref))
    record(6, worst < LATITUDE_ABS, f"max latitude error {worst:.1e} over 5 pairs")


def test_criterion_7_convexity():
    rb = check_strong_null_convexity(_ball())
    bad = check_strong_null_convexity(make_revolution(polynomial([1.0, 0.0, 1.0, 0.0, -1.0])))
    at_zero = any(f["check"] == "hessian" and abs(f["event"][0]) < 1e-9 for f in bad.failures)
    union = smooth_union([euclidean_ball((-1.5, -1.5, 0.0), 1.0),
                          euclidean_ball((1.5, 1.5, 0.0), 1.0)])
    ru = check_strong_null_convexity(union, n_lat=11, n_phi=8)
    ok = (rb.passed and abs(rb.hessian_min_abs - 4.0) < HESSIAN_ABS and not bad.passed
          and at_zero and not ru.chord_connected_ok)
    record(7, ok, f"ball hessian_min_abs {rb.hessian_min_abs:.12f}; 1+t^2-t^4 flagged at t=0: "
                  f"{at_zero}; union chord-connected: {ru.chord_connected_ok}")


def test_criterion_8_dividing_set():
    ok, parts = True, []
    for a, b in ((1.0, 1.0), (1.0, 2.0)):
        ds = dividing_set(make_revolution(ellipsoid(a, b)), (0.0, 0.0, 0.0))
        t_max = max(abs(p.t) for comp in ds.component_points for p in comp)
        rep = ds.report
        ok &= (ds.count == 2 and t_max < 1e-9 and rep.foliation_transverse_min > 0
               and rep.y_transverse_min > 0 and rep.separates)
        parts.append(f"({a:g},{b:g}) {ds.count} components, max |t| {t_max:.0e}, "
                     f"foliation-transverse {rep.foliation_transverse_min:.2f}, "
                     f"Y-transverse {rep.y_transverse_min:.2f}, separates {rep.separates}")
    record(8, ok, "; ".join(parts))


def test_criterion_9_properties():
    rng = np.random.default_rng(2024)
    leg = 0.0
    for _ in range(1000):
        s = sky(rng.uniform(-3, 3, 3))
        th = float(rng.uniform(0, 2 * math.pi))
        leg = max(leg, abs(contact_form_eval(s(th), s.tangent(th)[0])))

    regions = [_ball(), make_revolution(ellipsoid(1.0, 2.0)),
               transform(_ball(), ConformalMap((boost(0.5), Translation(Event(0.3, 0.2, -0.1)))))]
    mono, closed, n_leaves = True, False, 0
    for r in regions:
        for k in range(6):
            up = integrate_leaf(r, lower_circle_start(r, 2 * math.pi * k / 6), branch=Branch.PLUS)
            down = integrate_leaf(r, up.end, branch=Branch.MINUS, backward=True)
            for lf, want in ((up, Terminal.UPPER), (down, Terminal.LOWER)):
                n_leaves += 1
                d = np.diff(lf.times)
                mono &= bool(np.all(d > 0) or np.all(d < 0))
                # a leaf runs from one singular circle to the other
                closed |= lf.terminal is not want or chart_distance(lf.start.chart, lf.end.chart) < 1e-6

    conj = 0.0
    for rho, eps in ((0.7, 0.3), (2.0, -0.25), (math.sqrt(2), 0.4)):
        def h(x, eps=eps):
            return x + eps * math.sin(x)

        def hinv(y, eps=eps):
            x = y
            for _ in range(80):
                x -= (h(x) - y) / (1.0 + eps * math.cos(x))
            return x

        m = CircleMap.from_function(lambda x, rho=rho: h(hinv(x) + rho), 64)
        conj = max(conj, abs(rotation_number_of_circle_map(m) - rho))

    es = np.linspace(0.25, 4.0, 20)
    angles = [rotation_angle_quadrature(ellipsoid(1.0, float(e))).total_angle for e in es]
    dec = bool(np.all(np.diff(angles) < 0))
    ok = leg < LEGENDRIAN and mono and not closed and conj < CONJUGACY and dec
    record(9, ok, f"Legendrian {leg:.1e}; time_T monotone on {n_leaves} leaves {mono}; "
                  f"closed leaves {closed}; conjugacy {conj:.1e}; angle(e) decreasing {dec}")


@pytest.mark.slow
def test_criterion_10_runtime():
    t0 = time.perf_counter()
    full = run_selftest()
    t_full = time.perf_counter() - t0
    t0 = time.perf_counter()
    quick = run_selftest(quick=True)
    t_quick = time.perf_counter() - t0
    ok = (all(c.passed for c in full) and all(c.passed for c in quick)
          and t_full < FULL_SECONDS and t_quick < QUICK_SECONDS)
    record(10, ok, f"full selftest {t_full:.1f}s (< {FULL_SECONDS:g}), "
                   f"--quick {t_quick:.1f}s (< {QUICK_SECONDS:g})")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
