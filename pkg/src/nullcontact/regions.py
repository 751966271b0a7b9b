"""Regions of R^{1,2} described by a defining function ``H`` (positive inside).

Four variants share one interface:

* :class:`RevolutionRegion` - ``H = rho(t) - x^2 - y^2`` for a radius-squared
  profile ``rho``;
* :class:`ImplicitRegion` - user callbacks with finite-difference fallbacks;
* :class:`DiamondRegion` - the causal diamond over the unit disc (not smooth);
* :class:`TransformedRegion` - the image of another region under a
  :class:`~nullcontact.geometry.ConformalMap`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import (BadProfileError, NotSmoothError, OutsideDomainError,
                     RegionError)
from .geometry import (ConformalMap, Event, NullRay, TangentVec, apply_conformal,
                       unit)
from .numerics import Tolerance, find_root

# evaluation domain of implicit regions, relative to their bounding box
DOMAIN_INFLATION = 1.5

_ROOT_TOL = Tolerance(1e-15, 1e-15, 400)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusSquaredProfile:
    """``rho(t)`` = squared radius of the constant-time slices of a region of
    revolution, with its first two derivatives. Callables must accept both
    floats and numpy arrays."""
    rho: Callable
    drho: Callable
    d2rho: Callable
    t_min: float
    t_max: float
    kind: str = "custom"
    params: tuple = ()

    def describe(self) -> dict:
        return {"kind": self.kind, **dict(self.params), "t_min": self.t_min,
                "t_max": self.t_max}


def ellipsoid(a: float, b: float) -> RadiusSquaredProfile:
    """``rho(t) = b^2 (1 - t^2/a^2)``: time semi-axis ``a``, spatial radius ``b``."""
    if not (a > 0 and b > 0):
        raise BadProfileError("ellipsoid semi-axes must be positive", f"a={a}, b={b}")
    b2, ia2 = b * b, 1.0 / (a * a)
    return RadiusSquaredProfile(
        rho=lambda t: b2 * (1.0 - t * t * ia2),
        drho=lambda t: -2.0 * b2 * ia2 * t,
        d2rho=lambda t: -2.0 * b2 * ia2 + 0.0 * t,
        t_min=-a, t_max=a, kind="ellipsoid", params=(("a", a), ("b", b)))


def polynomial(coeffs: Sequence[float], t_min: float | None = None,
               t_max: float | None = None) -> RadiusSquaredProfile:
    """Profile from ascending coefficients ``[c0, c1, ...]``.

    Missing ends default to the real roots of ``rho`` nearest to ``t = 0``
    on either side.
    """
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    if t_min is None or t_max is None:
        roots = np.sort([r.real for r in p.roots() if abs(r.imag) < 1e-12])
        neg, pos = roots[roots < 0], roots[roots > 0]
        if t_min is None:
            if not len(neg):
                raise BadProfileError("rho needs a real root below t=0")
            t_min = float(neg[-1])
        if t_max is None:
            if not len(pos):
                raise BadProfileError("rho needs a real root above t=0")
            t_max = float(pos[0])
    d1, d2 = p.deriv(1), p.deriv(2)
    return RadiusSquaredProfile(rho=p, drho=d1, d2rho=d2, t_min=float(t_min),
                                t_max=float(t_max), kind="revolution",
                                params=(("rho_poly", tuple(map(float, coeffs))),))


def _latitude_roots(profile: RadiusSquaredProfile, n: int = 4001) -> list[float]:
    """Interior zeros of ``rho'^2 - 4 rho`` by sign sweep + Brent."""
    lo, hi = profile.t_min, profile.t_max
    ts = np.linspace(lo, hi, n)[1:-1]
    d = np.asarray(profile.drho(ts), dtype=float) ** 2 - 4.0 * np.asarray(profile.rho(ts), dtype=float)

    def g(t):
        return float(profile.drho(t)) ** 2 - 4.0 * float(profile.rho(t))

    roots = []
    for i in range(len(ts) - 1):
        if d[i] == 0.0:
            roots.append(float(ts[i]))
        elif d[i] * d[i + 1] < 0.0:
            roots.append(find_root(g, float(ts[i]), float(ts[i + 1]), _ROOT_TOL))
    return roots


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

def segment_in_box(p0: Sequence[float], d: Sequence[float], lo: np.ndarray,
                   hi: np.ndarray) -> tuple[float, float] | None:
    """Parameter interval where ``p0 + s d`` lies in the box, or ``None``."""
    s_lo, s_hi = -math.inf, math.inf
    for k in range(3):
        if d[k] == 0.0:
            if not (lo[k] <= p0[k] <= hi[k]):
                return None
            continue
        a = (lo[k] - p0[k]) / d[k]
        b = (hi[k] - p0[k]) / d[k]
        if a > b:
            a, b = b, a
        s_lo, s_hi = max(s_lo, a), min(s_hi, b)
    if s_lo >= s_hi:
        return None
    return s_lo, s_hi


class Region:
    """Common interface. Subclasses implement ``value_grad``, ``values``,
    ``hessian``, ``bbox`` and ``center``."""

    kind = "region"
    smooth = True

    def value(self, t: float, x: float, y: float) -> float:
        return self.value_grad(t, x, y)[0]

    def value_grad(self, t: float, x: float, y: float) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def values(self, T, X, Y) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, t: float, x: float, y: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def center(self) -> Event:
        raise NotImplementedError

    def inflated_bbox(self, factor: float = DOMAIN_INFLATION) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.bbox
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return mid - factor * half, mid + factor * half

    @cached_property
    def scale(self) -> float:
        lo, hi = self.bbox
        return float(0.5 * np.max(hi - lo))

    @cached_property
    def h_scale(self) -> float:
        """Typical magnitude of ``H`` over the box; boundary tolerances are
        relative to it."""
        lo, hi = self.bbox
        pts = [self.center]
        for i in range(8):
            pts.append(tuple(hi[k] if (i >> k) & 1 else lo[k] for k in range(3)))
        vals = []
        for p in pts:
            try:
                vals.append(abs(self.value(*p)))
            except OutsideDomainError:
                pass
        return max(max(vals, default=1.0), 1e-300)

    def ray_window(self, p0: Sequence[float], d: Sequence[float]) -> tuple[float, float] | None:
        lo, hi = self.inflated_bbox()
        return segment_in_box(p0, d, lo, hi)


class RevolutionRegion(Region):
    kind = "revolution"

    def __init__(self, profile: RadiusSquaredProfile, t_minus: float, t_plus: float):
        self.profile = profile
        self.t_minus = t_minus
        self.t_plus = t_plus

    def __repr__(self):
        return f"RevolutionRegion({self.profile.describe()})"

    def value_grad(self, t, x, y):
        p = self.profile
        return float(p.rho(t)) - x * x - y * y, float(p.drho(t)), -2.0 * x, -2.0 * y

    def values(self, T, X, Y):
        return np.asarray(self.profile.rho(T), dtype=float) - X * X - Y * Y

    def hessian(self, t, x, y):
        return np.diag([float(self.profile.d2rho(t)), -2.0, -2.0])

    def radius(self, t: float) -> float:
        return math.sqrt(max(float(self.profile.rho(t)), 0.0))

    def radius_slope(self, t: float) -> float:
        """``r'(t) = rho'/(2 sqrt(rho))``."""
        return float(self.profile.drho(t)) / (2.0 * self.radius(t))

    @cached_property
    def bbox(self):
        p = self.profile
        ts = np.linspace(p.t_min, p.t_max, 2001)
        rmax = math.sqrt(max(float(np.max(p.rho(ts))), 0.0))
        return (np.array([p.t_min, -rmax, -rmax]), np.array([p.t_max, rmax, rmax]))

    @cached_property
    def center(self):
        p = self.profile
        ts = np.linspace(p.t_min, p.t_max, 2001)
        return Event(float(ts[int(np.argmax(p.rho(ts)))]), 0.0, 0.0)

    def ray_window(self, p0, d):
        # rho is meaningful in t only; the time span is inflated like a bbox
        lo, hi = self.inflated_bbox()
        if d[0] == 0.0:
            return None
        a = (lo[0] - p0[0]) / d[0]
        b = (hi[0] - p0[0]) / d[0]
        return (min(a, b), max(a, b))


def make_revolution(profile: RadiusSquaredProfile) -> RevolutionRegion:
    """Validate ``profile`` and build the region ``x^2 + y^2 < rho(t)``."""
    lo, hi = profile.t_min, profile.t_max
    if not lo < hi:
        raise BadProfileError("t_min < t_max", f"got [{lo}, {hi}]")
    ts = np.linspace(lo, hi, 4001)
    rho = np.asarray(profile.rho(ts), dtype=float)
    if not np.all(np.isfinite(rho)):
        raise BadProfileError("rho finite on [t_min, t_max]")
    rscale = float(np.max(np.abs(rho))) or 1.0
    for end in (lo, hi):
        if abs(float(profile.rho(end))) > 1e-9 * rscale:
            raise BadProfileError("rho vanishes at t_min and t_max",
                                  f"rho({end}) = {float(profile.rho(end))}")
    if not float(profile.drho(lo)) > 0.0:
        raise BadProfileError("rho'(t_min) > 0 (smooth lower cap)")
    if not float(profile.drho(hi)) < 0.0:
        raise BadProfileError("rho'(t_max) < 0 (smooth upper cap)")
    if not np.all(rho[1:-1] > 0.0):
        raise BadProfileError("rho > 0 on (t_min, t_max)")
    roots = _latitude_roots(profile)
    if len(roots) != 2:
        raise BadProfileError("rho'^2 = 4 rho has exactly two interior roots",
                              f"found {len(roots)}: {roots}")
    t_minus, t_plus = roots
    mid = 0.5 * (t_minus + t_plus)
    if not float(profile.drho(mid)) ** 2 < 4.0 * float(profile.rho(mid)):
        raise BadProfileError("rho'^2 < 4 rho between the lightlike latitudes")
    return RevolutionRegion(profile, t_minus, t_plus)


class ImplicitRegion(Region):
    """Region ``{H > 0}`` from callbacks.

    ``func(t, x, y)`` must be defined on the ``DOMAIN_INFLATION``-inflated
    ``bbox``; evaluation outside raises :class:`OutsideDomainError`. Missing
    gradient / Hessian callbacks fall back to central differences with step
    ``1e-5 * scale``.
    """
    kind = "implicit"

    def __init__(self, func: Callable, bbox: tuple[Sequence[float], Sequence[float]],
                 grad: Callable | None = None, hess: Callable | None = None,
                 center: Sequence[float] | None = None, label: str = "implicit"):
        self.func = func
        self.grad = grad
        self.hess = hess
        lo, hi = np.asarray(bbox[0], dtype=float), np.asarray(bbox[1], dtype=float)
        if not np.all(lo < hi):
            raise RegionError("bbox must have lo < hi in every coordinate")
        self._bbox = (lo, hi)
        self._center = Event(*(0.5 * (lo + hi))) if center is None else Event(*map(float, center))
        self._dom = self.inflated_bbox()
        self.label = label
        self.fd_step = 1e-5 * self.scale

    def __repr__(self):
        return f"ImplicitRegion({self.label})"

    @property
    def bbox(self):
        return self._bbox

    @property
    def center(self):
        return self._center

    def _check(self, t, x, y):
        lo, hi = self._dom
        if not (lo[0] <= t <= hi[0] and lo[1] <= x <= hi[1] and lo[2] <= y <= hi[2]):
            raise OutsideDomainError(f"({t}, {x}, {y}) outside the evaluation domain")

    def value_grad(self, t, x, y):
        self._check(t, x, y)
        h = float(self.func(t, x, y))
        if self.grad is not None:
            g = self.grad(t, x, y)
            return h, float(g[0]), float(g[1]), float(g[2])
        s = self.fd_step
        f = self.func
        return (h, (f(t + s, x, y) - f(t - s, x, y)) / (2 * s),
                (f(t, x + s, y) - f(t, x - s, y)) / (2 * s),
                (f(t, x, y + s) - f(t, x, y - s)) / (2 * s))

    def values(self, T, X, Y):
        try:
            out = np.asarray(self.func(T, X, Y), dtype=float)
            if out.shape == np.shape(T):
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda a, b, c: float(self.func(a, b, c)))(T, X, Y)

    def hessian(self, t, x, y):
        self._check(t, x, y)
        if self.hess is not None:
            return np.asarray(self.hess(t, x, y), dtype=float)
        s = self.fd_step
        p = np.array([t, x, y], dtype=float)
        out = np.empty((3, 3))
        if self.grad is not None:
            for k in range(3):
                e = np.zeros(3)
                e[k] = s
                gp = np.asarray(self.grad(*(p + e)), dtype=float)
                gm = np.asarray(self.grad(*(p - e)), dtype=float)
                out[:, k] = (gp - gm) / (2 * s)
            return 0.5 * (out + out.T)
        f = lambda q: float(self.func(*q))
        f0 = f(p)
        for i in range(3):
            ei = np.zeros(3)
            ei[i] = s
            out[i, i] = (f(p + ei) - 2 * f0 + f(p - ei)) / (s * s)
            for j in range(i + 1, 3):
                ej = np.zeros(3)
                ej[j] = s
                v = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4 * s * s)
                out[i, j] = out[j, i] = v
        return out


class DiamondRegion(Region):
    """Domain of dependence of the open unit disc in ``{t = 0}``.

    Its boundary has corners, so only the analytic torus and the chart-level
    computations apply; boundary-calculus operations raise
    :class:`NotSmoothError`.
    """
    kind = "diamond"
    smooth = False

    def __repr__(self):
        return "DiamondRegion()"

    def value_grad(self, t, x, y):
        r = math.hypot(x, y)
        gx, gy = ((-x / r, -y / r) if r > 0 else (0.0, 0.0))
        return 1.0 - abs(t) - r, -math.copysign(1.0, t) if t != 0 else 0.0, gx, gy

    def values(self, T, X, Y):
        return 1.0 - np.abs(T) - np.hypot(X, Y)

    def hessian(self, t, x, y):
        raise NotSmoothError("the causal diamond has no smooth defining function")

    @property
    def bbox(self):
        return np.array([-1.0, -1.0, -1.0]), np.array([1.0, 1.0, 1.0])

    @property
    def center(self):
        return Event(0.0, 0.0, 0.0)


class TransformedRegion(Region):
    """``m(base)``; ``H(p) = H_base(m^{-1} p)``, so ``H(m(p)) = H_base(p)``."""
    kind = "transformed"

    def __init__(self, base: Region, cmap: ConformalMap):
        self.base = base
        self.cmap = cmap
        lin, off = cmap.affine()
        self._lin, self._off = lin, off
        self._inv = np.linalg.inv(lin)
        self._inv_t = [tuple(row) for row in self._inv]
        self._off_t = tuple(off)
        self.smooth = base.smooth

    def __repr__(self):
        return f"TransformedRegion({self.base!r}, {self.cmap!r})"

    def _pull(self, t, x, y):
        o = self._off_t
        a, b, c = t - o[0], x - o[1], y - o[2]
        m = self._inv_t
        return (m[0][0] * a + m[0][1] * b + m[0][2] * c,
                m[1][0] * a + m[1][1] * b + m[1][2] * c,
                m[2][0] * a + m[2][1] * b + m[2][2] * c)

    def value_grad(self, t, x, y):
        h, gt, gx, gy = self.base.value_grad(*self._pull(t, x, y))
        m = self._inv_t
        return (h,
                m[0][0] * gt + m[1][0] * gx + m[2][0] * gy,
                m[0][1] * gt + m[1][1] * gx + m[2][1] * gy,
                m[0][2] * gt + m[1][2] * gx + m[2][2] * gy)

    def values(self, T, X, Y):
        P = np.stack([np.asarray(T, float) - self._off[0], np.asarray(X, float) - self._off[1],
                      np.asarray(Y, float) - self._off[2]])
        Q = np.tensordot(self._inv, P, axes=1)
        return self.base.values(Q[0], Q[1], Q[2])

    def hessian(self, t, x, y):
        hb = self.base.hessian(*self._pull(t, x, y))
        return self._inv.T @ hb @ self._inv

    @cached_property
    def bbox(self):
        lo, hi = self.base.bbox
        corners = np.array([[hi[k] if (i >> k) & 1 else lo[k] for k in range(3)]
                            for i in range(8)])
        img = corners @ self._lin.T + self._off
        return img.min(axis=0), img.max(axis=0)

    @cached_property
    def center(self):
        return apply_conformal(self.cmap, self.base.center)

    def ray_window(self, p0, d):
        lo, hi = self.inflated_bbox()
        return segment_in_box(p0, d, lo, hi)


def transform(region: Region, cmap: ConformalMap) -> TransformedRegion:
    return TransformedRegion(region, cmap)


def region_H(r: Region, p: Sequence[float]) -> tuple[float, TangentVec, np.ndarray]:
    """Value, gradient (as a covector) and Hessian of the defining function."""
    h, gt, gx, gy = r.value_grad(*map(float, p))
    return h, TangentVec(gt, gx, gy), r.hessian(*map(float, p))


# ---------------------------------------------------------------------------
# helpers for generic regions
# ---------------------------------------------------------------------------

def euclidean_ball(center: Sequence[float], radius: float) -> ImplicitRegion:
    c = np.asarray(center, dtype=float)
    r2 = radius * radius

    def f(t, x, y):
        return r2 - (t - c[0]) ** 2 - (x - c[1]) ** 2 - (y - c[2]) ** 2

    def g(t, x, y):
        return (-2 * (t - c[0]), -2 * (x - c[1]), -2 * (y - c[2]))

    return ImplicitRegion(f, (c - radius, c + radius), grad=g,
                          hess=lambda t, x, y: -2.0 * np.eye(3), center=c,
                          label=f"ball({tuple(c)}, {radius})")


def smooth_union(parts: Sequence[ImplicitRegion], sharpness: float = 20.0) -> ImplicitRegion:
    """Log-sum-exp smoothed maximum of the defining functions."""
    k = float(sharpness)
    parts = list(parts)
    lo = np.min([p.bbox[0] for p in parts], axis=0)
    hi = np.max([p.bbox[1] for p in parts], axis=0)

    def f(t, x, y):
        hs = np.array([p.func(t, x, y) for p in parts], dtype=float)
        m = hs.max(axis=0)
        return m + np.log(np.sum(np.exp(k * (hs - m)), axis=0)) / k

    def g(t, x, y):
        hs = np.array([p.func(t, x, y) for p in parts])
        w = np.exp(k * (hs - hs.max()))
        w /= w.sum()
        gs = np.array([p.grad(t, x, y) for p in parts], dtype=float)
        return tuple(w @ gs)

    return ImplicitRegion(f, (lo, hi), grad=g, center=0.5 * (lo + hi),
                          label=f"smooth_union(k={k})")


def boundary_along(r: Region, center: Sequence[float], omega: Sequence[float],
                   n_scan: int = 64) -> float:
    """Distance from ``center`` to the first boundary crossing along ``omega``."""
    c = np.asarray(center, dtype=float)
    w = np.asarray(omega, dtype=float)
    win = r.ray_window(c, w)
    if win is None or win[1] <= 0:
        raise RegionError("direction leaves the evaluation domain immediately")
    s_max = win[1] * (1 - 1e-12)
    ss = np.linspace(0.0, s_max, n_scan)
    hv = r.values(c[0] + ss * w[0], c[1] + ss * w[1], c[2] + ss * w[2])
    if not hv[0] > 0:
        raise RegionError("center is not inside the region")
    idx = np.nonzero(hv <= 0)[0]
    if not len(idx):
        raise RegionError("no boundary crossing inside the domain")
    i = int(idx[0])

    def h(s):
        return r.value(c[0] + s * w[0], c[1] + s * w[1], c[2] + s * w[2])

    return find_root(h, float(ss[i - 1]), float(ss[i]), _ROOT_TOL)


def fibonacci_directions(n: int) -> np.ndarray:
    """``n`` deterministic, nearly uniform unit vectors in ``(t, x, y)``."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rr = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    ang = math.pi * (3.0 - math.sqrt(5.0)) * k
    return np.stack([z, rr * np.cos(ang), rr * np.sin(ang)], axis=1)


@dataclass
class StarShapedReport:
    passed: bool
    n_dirs: int
    failures: list = field(default_factory=list)  # (direction, crossings)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "n_dirs": self.n_dirs,
                "failures": [{"direction": list(d), "crossings": c} for d, c in self.failures]}


def star_shaped_check(r: Region, center: Sequence[float], n_dirs: int = 256,
                      n_samples: int = 600) -> StarShapedReport:
    """Count boundary crossings of rays from ``center``; star-shaped iff every
    sampled ray crosses exactly once."""
    c = np.asarray(center, dtype=float)
    if not r.value(*c) > 0:
        raise RegionError("star_shaped_check needs H(center) > 0")
    failures = []
    for w in fibonacci_directions(n_dirs):
        win = r.ray_window(c, w)
        s_max = win[1] * (1 - 1e-12)
        ss = np.linspace(0.0, s_max, n_samples)
        hv = r.values(c[0] + ss * w[0], c[1] + ss * w[1], c[2] + ss * w[2])
        crossings = int(np.count_nonzero(np.diff(np.sign(hv)) != 0))
        if crossings != 1:
            failures.append((tuple(float(v) for v in w), crossings))
    failures.sort()
    return StarShapedReport(not failures, n_dirs, failures)


def diamond_boundary_torus() -> Callable[[float, float], NullRay]:
    """``(phi, theta) -> (u(phi), theta)``: the rays crossing the unit circle."""
    from .geometry import reduce_angle

    def torus(phi: float, theta: float) -> NullRay:
        c, s = unit(phi)
        return NullRay(c, s, reduce_angle(theta))

    return torus
