"""Analytic-oracle self test behind ``nullcontact selftest``.

Each check returns a :class:`Check`; ``--quick`` runs a reduced subset with
smaller sample counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .boundary import check_strong_null_convexity, lightlike_latitudes
from .foliation import (Branch, Terminal, chart_distance, dividing_set,
                        foliation_consistency, integrate_leaf,
                        lower_circle_start, singular_set)
from .geometry import (ConformalMap, Event, Translation, boost, contact_form_eval,
                       sky, wrap_angle)
from .invariants import (CircleMap, Verdict, compare_regions,
                         rotation_angle_quadrature, rotation_angle_traced,
                         rotation_number_of_circle_map)
from .regions import (DiamondRegion, euclidean_ball, ellipsoid, make_revolution,
                      polynomial, smooth_union, transform)

FULL_BUDGET = 60.0
QUICK_BUDGET = 10.0


def ellipsoid_angle(e: float) -> float:
    """Closed form of the rotation angle for ``b/a = e``."""
    return 2.0 * math.pi * (math.sqrt(1.0 + e * e) - e) / e


BALL_ANGLE = 2.0 * math.pi * (math.sqrt(2.0) - 1.0)


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed,
                "detail": self.detail, "seconds": self.seconds}


def _ball():
    return make_revolution(ellipsoid(1.0, 1.0))


def boosted_ball():
    m = ConformalMap((boost(0.5, (1.0, 0.0)), Translation(Event(0.3, 0.2, -0.1))))
    return transform(_ball(), m)


def two_ball_union():
    return smooth_union([euclidean_ball((-1.5, -1.5, 0.0), 1.0),
                         euclidean_ball((1.5, 1.5, 0.0), 1.0)])


def c1_three_way(quick: bool, tol_trace: float | None) -> tuple[bool, str]:
    tt = tol_trace if tol_trace is not None else 1e-4
    parts, ok = [], True
    for e in (0.5, 1.0, 2.0):
        t0 = time.perf_counter()
        r = make_revolution(ellipsoid(1.0, e))
        exact = ellipsoid_angle(e)
        q = rotation_angle_quadrature(r.profile).total_angle
        tr = rotation_angle_traced(r, n_base_points=8).total_angle
        dt = time.perf_counter() - t0
        eq, et = abs(q - exact) / exact, abs(tr - exact) / exact
        ok &= eq < 1e-8 and et < tt and dt < 1.0
        parts.append(f"e={e:g}: quad {eq:.1e}, trace {et:.1e}, {dt:.2f}s")
    return ok, "; ".join(parts)


def c2_anchor(quick, tol_trace):
    red = rotation_angle_quadrature(ellipsoid(1.0, 1.0)).reduced
    err = abs(abs(red) - BALL_ANGLE)
    return err < 1e-6, f"reduced {red:.12f}, error {err:.1e}"


def c3_conformal(quick, tol_trace):
    res = rotation_angle_traced(boosted_ball(), n_base_points=24)
    ref = rotation_angle_quadrature(ellipsoid(1.0, 1.0)).reduced
    d = abs(wrap_angle(res.reduced - ref))
    tt = tol_trace if tol_trace is not None else 1e-3
    return d < tt, (f"boosted {res.reduced:.10f} vs ball {ref:.10f}, diff {d:.1e}; "
                    f"arclength reparametrisation changes it by {res.param_delta:.1e}")


def c4_diamond(quick, tol_trace):
    d = DiamondRegion()
    ss = singular_set(d, n_phi=16 if quick else 32, tol=1e-8)
    tr = rotation_angle_traced(d, n_base_points=8)
    v = compare_regions(_ball(), d)
    ok = ss.mismatch < 1e-8 and abs(tr.total_angle) < 1e-6 and v.verdict is Verdict.DISTINGUISHED
    return ok, (f"singular mismatch {ss.mismatch:.1e}, return angle {tr.total_angle:.1e}, "
                f"compare {v.verdict.value}")


def c5_consistency(quick, tol_trace):
    n = 100 if quick else 1000
    parts, ok = [], True
    for a, b in ((1.0, 1.0), (1.0, 2.0)):
        r = make_revolution(ellipsoid(a, b))
        rep = foliation_consistency(r, n)
        ss = singular_set(r)
        ok &= rep.max_angle < 1e-6 and ss.mismatch < 1e-6
        parts.append(f"({a:g},{b:g}): angle {rep.max_angle:.1e}, singular {ss.mismatch:.1e}")
    return ok, f"{n} samples; " + "; ".join(parts)


def c6_latitudes(quick, tol_trace):
    worst = 0.0
    for a, b in ((1, 1), (1, 2), (2, 1), (0.5, 3), (3, 0.7)):
        lo, hi = lightlike_latitudes(ellipsoid(a, b))
        ref = a * a / math.sqrt(a * a + b * b)
        worst = max(worst, abs(lo + ref), abs(hi - ref))
    return worst < 1e-10, f"max error {worst:.1e} over 5 pairs"


def c7_convexity(quick, tol_trace):
    n_lat, n_phi = (11, 8) if quick else (41, 24)
    rb = check_strong_null_convexity(_ball(), n_lat=n_lat, n_phi=n_phi)
    bad = make_revolution(polynomial([1.0, 0.0, 1.0, 0.0, -1.0]))
    rbad = check_strong_null_convexity(bad, n_lat=n_lat, n_phi=n_phi)
    at_zero = any(f["check"] == "hessian" and abs(f["event"][0]) < 1e-9 for f in rbad.failures)
    ru = check_strong_null_convexity(two_ball_union(), n_lat=11, n_phi=8)
    ok = (rb.passed and abs(rb.hessian_min_abs - 4.0) < 1e-9 and not rbad.passed and at_zero
          and not ru.chord_connected_ok)
    return ok, (f"ball hessian_min_abs {rb.hessian_min_abs:.12f}; profile flagged at t=0: "
                f"{at_zero}; union chord connected: {ru.chord_connected_ok}")


def c8_dividing(quick, tol_trace):
    parts, ok = [], True
    n_phi = 16 if quick else 32
    for a, b in ((1.0, 1.0), (1.0, 2.0)):
        ds = dividing_set(make_revolution(ellipsoid(a, b)), (0.0, 0.0, 0.0), n_phi=n_phi)
        lat = max(abs(x) for x in ds.latitudes)
        ok &= ds.count == 2 and lat < 1e-9 and ds.report.ok
        parts.append(f"({a:g},{b:g}): {ds.count} components at |t|<={lat:.0e}, "
                     f"Y-transverse {ds.report.y_transverse_min:.2f}, "
                     f"foliation-transverse {ds.report.foliation_transverse_min:.2f}, "
                     f"separates {ds.report.separates}")
    return ok, "; ".join(parts)


def _leaves(r, n):
    out = []
    for k in range(n):
        st = lower_circle_start(r, 2 * math.pi * k / n)
        up = integrate_leaf(r, st, branch=Branch.PLUS)
        out += [up, integrate_leaf(r, up.end, branch=Branch.MINUS, backward=True)]
    return out


def c9_properties(quick, tol_trace):
    rng = np.random.default_rng(7)
    leg = 0.0
    for _ in range(200):
        p = rng.uniform(-2, 2, 3)
        s = sky(p)
        th = float(rng.uniform(0, 2 * math.pi))
        dq, _ = s.tangent(th)
        leg = max(leg, abs(contact_form_eval(s(th), dq)))
    regions = [_ball(), make_revolution(ellipsoid(1.0, 2.0))]
    if not quick:
        regions.append(boosted_ball())
    mono, closed = True, False
    for r in regions:
        for lf in _leaves(r, 4):
            ts = lf.times
            d = np.diff(ts)
            mono &= bool(np.all(d > 0) or np.all(d < 0))
            closed |= lf.terminal is Terminal.BUDGET or chart_distance(lf.start.chart, lf.end.chart) < 1e-6

    def h(x):
        return x + 0.3 * math.sin(x)

    def hinv(y):
        x = y
        for _ in range(60):
            x -= (h(x) - y) / (1.0 + 0.3 * math.cos(x))
        return x

    conj = abs(rotation_number_of_circle_map(CircleMap.from_function(lambda x: h(hinv(x) + 1.0), 64)) - 1.0)
    es = np.linspace(0.25, 4.0, 20)
    angles = [rotation_angle_quadrature(ellipsoid(1.0, float(e))).total_angle for e in es]
    dec = bool(np.all(np.diff(angles) < 0))
    ok = leg < 1e-12 and mono and not closed and conj < 1e-6 and dec
    return ok, (f"skies Legendrian {leg:.1e}; time monotone {mono}; closed leaves {closed}; "
                f"conjugacy {conj:.1e}; angle(e) decreasing {dec}")


CHECKS: list[tuple[int, str, Callable, bool]] = [
    (1, "rotation angle three-way agreement", c1_three_way, True),
    (2, "unit ball anchor value", c2_anchor, True),
    (3, "conformal invariance (boosted ball)", c3_conformal, False),
    (4, "diamond oracle", c4_diamond, True),
    (5, "foliation consistency", c5_consistency, True),
    (6, "lightlike latitudes", c6_latitudes, True),
    (7, "convexity checker", c7_convexity, True),
    (8, "dividing set", c8_dividing, True),
    (9, "property suites", c9_properties, True),
]


def run_selftest(quick: bool = False, tol_trace: float | None = None) -> list[Check]:
    results = []
    start = time.perf_counter()
    for num, name, fn, in_quick in CHECKS:
        if quick and not in_quick:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(quick, tol_trace)
        except Exception as exc:  # a crash is a failed oracle, reported like one
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(Check(num, name, bool(ok), detail, time.perf_counter() - t0))
    total = time.perf_counter() - start
    budget = QUICK_BUDGET if quick else FULL_BUDGET
    results.append(Check(10, "runtime budget", total < budget,
                         f"{total:.1f}s (budget {budget:g}s)", total))
    return results


def format_table(results: list[Check]) -> str:
    lines = []
    for c in results:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(f"[{mark}] {c.criterion:>2} {c.name:<38} {c.seconds:6.2f}s  {c.detail}")
    n_fail = sum(not c.passed for c in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} passed")
    return "\n".join(lines) + "\n"
