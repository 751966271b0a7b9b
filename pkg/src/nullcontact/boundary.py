"""Causal structure of a region's boundary and the strong null convexity
certificate.

A boundary point is timelike / lightlike / spacelike according to the
induced metric on its tangent plane, which is decided by the sign of
``eta(grad H, grad H)`` with the index raised by ``eta``: a spacelike
normal gives a Lorentzian tangent plane.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (DegenerateGradientError, NoBracketError, NotOnBoundaryError,
                     NotSmoothError)
from .geometry import Event, NullRay, TangentVec, unit
from .numerics import Tolerance, find_root
from .regions import (RadiusSquaredProfile, Region, RevolutionRegion,
                      _latitude_roots, boundary_along)
from .errors import BadProfileError

BOUNDARY_TOL = 1e-9
LIGHTLIKE_TOL = 1e-8
HESSIAN_THRESHOLD = 1e-6

_ROOT_TOL = Tolerance(1e-15, 1e-15, 400)


class BoundaryClass(enum.Enum):
    TIMELIKE = "TimelikePart"
    LIGHTLIKE = "LightlikePart"
    SPACELIKE = "SpacelikePart"


@dataclass(frozen=True)
class BoundaryPoint:
    event: Event
    causal_class: BoundaryClass
    null_dirs: tuple

    def __post_init__(self):
        expected = {BoundaryClass.TIMELIKE: 2, BoundaryClass.LIGHTLIKE: 1,
                    BoundaryClass.SPACELIKE: 0}[self.causal_class]
        assert len(self.null_dirs) == expected


def _lightlike_indicator(ht, hx, hy):
    """``eta(grad H, grad H) / |grad H|^2`` (Euclidean norm in the denominator)."""
    g2 = ht * ht + hx * hx + hy * hy
    return (-ht * ht + hx * hx + hy * hy) / g2


def _class_of(ind: float, light_tol: float) -> BoundaryClass:
    if abs(ind) < light_tol:
        return BoundaryClass.LIGHTLIKE
    return BoundaryClass.TIMELIKE if ind > 0 else BoundaryClass.SPACELIKE


def _on_boundary(r: Region, p, boundary_tol):
    if not r.smooth:
        raise NotSmoothError(f"{r!r} has no smooth boundary")
    h, ht, hx, hy = r.value_grad(*p)
    if abs(h) > boundary_tol * r.h_scale:
        raise NotOnBoundaryError(f"|H({tuple(p)})| = {abs(h):.3e} exceeds the boundary tolerance")
    if ht * ht + hx * hx + hy * hy == 0.0:
        raise DegenerateGradientError(f"grad H vanishes at {tuple(p)}")
    return h, ht, hx, hy


def null_directions_from_grad(ht: float, hx: float, hy: float,
                              light_tol: float = LIGHTLIKE_TOL) -> list[TangentVec]:
    """Future null ``v`` with ``v_t = 1`` and ``dH(v) = 0``, ordered
    ``[Plus, Minus]``.

    Writing ``n`` for the outward spatial normal ``-(Hx, Hy)/|.|`` and ``n_perp``
    for its counter-clockwise rotation, ``v = (1, a n +- w n_perp)`` with
    ``a = Ht/|(Hx, Hy)|`` and ``w = sqrt(1 - a^2)``. Plus is the ``+`` sign.
    """
    g = math.hypot(hx, hy)
    if g == 0.0:
        return []
    ind = _lightlike_indicator(ht, hx, hy)
    nx, ny = -hx / g, -hy / g
    a = ht / g
    cls = _class_of(ind, light_tol)
    if cls is BoundaryClass.SPACELIKE:
        return []
    if cls is BoundaryClass.LIGHTLIKE:
        s = math.copysign(1.0, a)
        return [TangentVec(1.0, s * nx, s * ny)]
    w = math.sqrt(max(0.0, 1.0 - a * a))
    px, py = -ny, nx
    return [TangentVec(1.0, a * nx + w * px, a * ny + w * py),
            TangentVec(1.0, a * nx - w * px, a * ny - w * py)]


def null_tangent_directions(r: Region, p: Sequence[float],
                            boundary_tol: float = BOUNDARY_TOL,
                            light_tol: float = LIGHTLIKE_TOL) -> list[TangentVec]:
    _, ht, hx, hy = _on_boundary(r, p, boundary_tol)
    return null_directions_from_grad(ht, hx, hy, light_tol)


def classify_boundary_point(r: Region, p: Sequence[float],
                            boundary_tol: float = BOUNDARY_TOL,
                            light_tol: float = LIGHTLIKE_TOL) -> BoundaryPoint:
    _, ht, hx, hy = _on_boundary(r, p, boundary_tol)
    cls = _class_of(_lightlike_indicator(ht, hx, hy), light_tol)
    dirs = null_directions_from_grad(ht, hx, hy, light_tol)
    if math.hypot(hx, hy) == 0.0:
        cls = BoundaryClass.SPACELIKE
    return BoundaryPoint(Event(*map(float, p)), cls, tuple(dirs))


def lightlike_latitudes(profile: RadiusSquaredProfile) -> tuple[float, float]:
    roots = _latitude_roots(profile)
    if len(roots) != 2:
        raise BadProfileError("rho'^2 = 4 rho has exactly two interior roots",
                              f"found {len(roots)}")
    return roots[0], roots[1]


# ---------------------------------------------------------------------------
# tangency functional
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tangency:
    event: Event
    G: float
    s: float


def tangency_point(r: Region, ray: NullRay, n_samples: int = 801) -> Tangency:
    """Maximise ``s -> H(gamma(s))`` along the ray.

    ``G > 0`` iff the ray meets the region, ``G = 0`` on the boundary of the
    space of rays meeting it, ``G < 0`` if it misses the closure.
    """
    c, sn = unit(ray.theta)
    q1, q2 = ray.q1, ray.q2
    win = r.ray_window((0.0, q1, q2), (1.0, c, sn))
    if win is None:
        raise NoBracketError(f"ray {tuple(ray)} never enters the search box")
    ss = np.linspace(win[0], win[1], n_samples)
    if isinstance(r, RevolutionRegion):
        rho, drho = r.profile.rho, r.profile.drho
        qq, qu = q1 * q1 + q2 * q2, q1 * c + q2 * sn

        def h(s):
            return float(rho(s)) - qq - 2.0 * s * qu - s * s

        def dh(s):
            return float(drho(s)) - 2.0 * qu - 2.0 * s

        hv = np.asarray(rho(ss), dtype=float) - qq - 2.0 * ss * qu - ss * ss
    else:
        def h(s):
            return r.value(s, q1 + s * c, q2 + s * sn)

        def dh(s):
            _, gt, gx, gy = r.value_grad(s, q1 + s * c, q2 + s * sn)
            return gt + gx * c + gy * sn

        hv = r.values(ss, q1 + ss * c, q2 + ss * sn)
    i = int(np.argmax(hv))
    lo, hi = ss[max(i - 1, 0)], ss[min(i + 1, len(ss) - 1)]
    s_best = float(ss[i])
    try:
        dlo, dhi = dh(float(lo)), dh(float(hi))
        if dlo >= 0.0 >= dhi and lo < hi:
            s_best = find_root(dh, float(lo), float(hi), _ROOT_TOL)
    except NotSmoothError:
        pass
    return Tangency(ray.event(s_best), h(s_best), s_best)


# ---------------------------------------------------------------------------
# boundary sampling
# ---------------------------------------------------------------------------

def meridian_direction(theta_polar: float, phi: float) -> tuple[float, float, float]:
    """Unit direction in ``(t, x, y)``: polar angle measured from the past
    pole ``-dt``, azimuth ``phi``."""
    s = math.sin(theta_polar)
    return (-math.cos(theta_polar), s * math.cos(phi), s * math.sin(phi))


def boundary_point_polar(r: Region, theta_polar: float, phi: float,
                         center: Sequence[float] | None = None) -> Event:
    c = r.center if center is None else center
    w = meridian_direction(theta_polar, phi)
    s = boundary_along(r, c, w)
    return Event(c[0] + s * w[0], c[1] + s * w[1], c[2] + s * w[2])


def sample_boundary(r: Region, n_lat: int = 41, n_phi: int = 24,
                    n_scan: int = 200) -> list[Event]:
    """Deterministic boundary sample.

    Revolution regions are sampled on the band ``[t-, t+]`` (odd ``n_lat``
    contains the mid-latitude). Other regions are sampled where axis-parallel
    lines through an ``n_phi x n_phi`` grid cross ``H = 0``; no star centre is
    needed.
    """
    out = []
    if isinstance(r, RevolutionRegion):
        phis = np.arange(n_phi) * (2 * math.pi / n_phi)
        for t in np.linspace(r.t_minus, r.t_plus, n_lat):
            rad = r.radius(float(t))
            for ph in phis:
                out.append(Event(float(t), rad * math.cos(ph), rad * math.sin(ph)))
        return out
    lo, hi = r.bbox
    grids = [np.linspace(lo[k], hi[k], n_phi + 2)[1:-1] for k in range(3)]
    for axis in range(3):
        a, b = [k for k in range(3) if k != axis]
        line = np.linspace(lo[axis] - 0.1 * (hi[axis] - lo[axis]),
                           hi[axis] + 0.1 * (hi[axis] - lo[axis]), n_scan)
        for va in grids[a]:
            for vb in grids[b]:
                pts = np.empty((3, n_scan))
                pts[axis], pts[a], pts[b] = line, va, vb
                vals = r.values(pts[0], pts[1], pts[2])
                for i in np.nonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))[0]:
                    def h(s, a=a, b=b, va=va, vb=vb):
                        q = [0.0, 0.0, 0.0]
                        q[axis], q[a], q[b] = s, va, vb
                        return r.value(*q)
                    s0 = find_root(h, float(line[i]), float(line[i + 1]), _ROOT_TOL)
                    q = [0.0, 0.0, 0.0]
                    q[axis], q[a], q[b] = s0, float(va), float(vb)
                    out.append(Event(*q))
    return out


# ---------------------------------------------------------------------------
# strong null convexity
# ---------------------------------------------------------------------------

@dataclass
class ConvexityReport:
    hessian_min_abs: float
    unique_tangency_ok: bool
    chord_connected_ok: bool
    samples: int
    failures: list = field(default_factory=list)
    hessian_threshold: float = HESSIAN_THRESHOLD
    notes: tuple = ("chord connectivity is a necessary condition for the extension "
                    "map to be an embedding, not a proof of it",)

    @property
    def passed(self) -> bool:
        return (self.hessian_min_abs > self.hessian_threshold
                and self.unique_tangency_ok and self.chord_connected_ok)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "hessian_min_abs": self.hessian_min_abs,
                "hessian_threshold": self.hessian_threshold,
                "unique_tangency_ok": self.unique_tangency_ok,
                "chord_connected_ok": self.chord_connected_ok,
                "samples": self.samples, "failures": self.failures,
                "notes": list(self.notes)}


def _sign_changes(v: np.ndarray) -> int:
    s = np.sign(v)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def check_strong_null_convexity(r: Region, n_lat: int = 41, n_phi: int = 24,
                                n_q: int = 15, n_theta: int = 24, n_scan: int = 400,
                                boundary_tol: float = BOUNDARY_TOL,
                                hessian_threshold: float = HESSIAN_THRESHOLD,
                                max_failures: int = 50) -> ConvexityReport:
    """Sampled certificate of the three strong-null-convexity conditions.

    (a) ``|Hess H(v, v)|`` over boundary null tangents with ``v_t = 1``;
    (b) every tangent null ray has ``H <= 0`` and approaches zero only near
        its tangency;
    (c) every sampled null ray meeting the region meets it in one interval.
    """
    if not r.smooth:
        raise NotSmoothError(f"{r!r} has no smooth boundary")
    tol_h = boundary_tol * r.h_scale
    hess_min = math.inf
    hess_fail: list = []
    tangency_fail: list = []
    n_samples = 0
    for p in sample_boundary(r, n_lat, n_phi):
        _, ht, hx, hy = r.value_grad(*p)
        dirs = null_directions_from_grad(ht, hx, hy)
        if not dirs:
            continue
        hm = r.hessian(*p)
        for v in dirs:
            n_samples += 1
            va = np.asarray(v)
            hv = abs(float(va @ hm @ va))
            if hv < hess_min:
                hess_min = hv
            if hv <= hessian_threshold:
                hess_fail.append({"check": "hessian", "event": list(p),
                                  "direction": list(v), "value": hv})
            win = r.ray_window(p, v)
            if win is None:
                continue
            ss = np.linspace(win[0], win[1], n_scan)
            vals = r.values(p[0] + ss, p[1] + ss * v[1], p[2] + ss * v[2])
            near = np.abs(ss) <= 0.02 * (win[1] - win[0])
            if np.any(vals > tol_h) or np.any(vals[~near] > -tol_h):
                k = int(np.argmax(np.where(near, -np.inf, vals)))
                tangency_fail.append({"check": "unique_tangency", "event": list(p),
                                      "direction": list(v), "s": float(ss[k]),
                                      "H": float(vals[k])})

    chord_fail = []
    lo, hi = r.bbox
    c = r.center
    half = 0.5 * float(max(hi[1] - lo[1], hi[2] - lo[2]))
    offs = np.linspace(-half, half, n_q)
    thetas = np.arange(n_theta) * (2 * math.pi / n_theta)
    for th in thetas:
        u = unit(float(th))
        for ox in offs:
            for oy in offs:
                p0 = (c[0], c[1] + ox, c[2] + oy)
                win = r.ray_window(p0, (1.0, u[0], u[1]))
                if win is None:
                    continue
                ss = np.linspace(win[0], win[1], n_scan)
                vals = r.values(p0[0] + ss, p0[1] + ss * u[0], p0[2] + ss * u[1])
                if not np.any(vals > 0):
                    continue
                nch = _sign_changes(vals)
                if nch != 2:
                    q = (p0[1] - p0[0] * u[0], p0[2] - p0[0] * u[1])
                    chord_fail.append({"check": "chord_connectivity",
                                       "ray": [q[0], q[1], float(th)],
                                       "sign_changes": nch})

    def key(f):
        return (f["check"], f.get("event", f.get("ray")))

    failures = (sorted(hess_fail, key=lambda f: f["value"])[:max_failures]
                + sorted(tangency_fail, key=key)[:max_failures]
                + sorted(chord_fail, key=key)[:max_failures])
    return ConvexityReport(hess_min if math.isfinite(hess_min) else 0.0,
                           not tangency_fail, not chord_fail, n_samples, failures,
                           hessian_threshold)
