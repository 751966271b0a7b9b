"""The boundary torus of a region in the space of null geodesics and its
characteristic foliation.

A point of the torus is a boundary event ``p`` together with one of the null
directions tangent to the boundary there; its chart coordinates are those of
the null geodesic through ``p`` in that direction. The two null families
(``Plus``/``Minus``) form two sheets glued along the lightlike latitudes,
which become the singular circles of the foliation.

Every torus surface in this module uses the same coordinates ``(phi, s)``:
``phi`` is the azimuth of the tangency event about the region's axis point,
``s = 0`` is the lower singular circle, ``s = pi`` the upper one,
``0 < s < pi`` the Plus sheet and ``pi < s < 2 pi`` the Minus sheet.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .boundary import (LIGHTLIKE_TOL, _lightlike_indicator, meridian_direction,
                       null_directions_from_grad, tangency_point)
from .errors import (IllConditionedError, LostSurfaceError, MismatchError,
                     NoBracketError, NotTransverseError, RegionError, StiffError)
from .geometry import (TWO_PI, Event, NullRay, chart_of_geodesic, reduce_angle,
                       unit, wrap_angle)
from .numerics import OdeEvent, Tolerance, find_root, ode_integrate
from .regions import (DiamondRegion, Region, RevolutionRegion, boundary_along,
                      star_shaped_check)

SINGULAR_TOL = 1e-8
SINGULAR_MARGIN = 1e-3
ILL_CONDITIONED_TOL = 1e-12
PROJECTION_TOL = 1e-10
TRANSVERSE_TOL = 1e-8
LEAF_TOL = Tolerance(1e-12, 1e-12, 200_000)

_ROOT_TOL = Tolerance(1e-15, 1e-15, 400)


class Branch(enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"

    @property
    def sign(self) -> float:
        return 1.0 if self is Branch.PLUS else -1.0

    @property
    def other(self) -> "Branch":
        return Branch.MINUS if self is Branch.PLUS else Branch.PLUS


class Terminal(enum.Enum):
    LOWER = "HitLowerSingular"
    UPPER = "HitUpperSingular"
    BUDGET = "Budget"


@dataclass(frozen=True)
class TorusPoint:
    """``branch`` is ``None`` exactly on a singular circle, where the two
    null families merge."""
    t: float
    phi: float
    branch: Branch | None
    chart: NullRay
    event: Event

    @property
    def time_T(self) -> float:
        return self.t


@dataclass
class Leaf:
    """Integrated leaf; ``phi_unwrapped`` tracks the azimuth continuously.

    ``terminal`` is ``Budget`` when the integration stopped (at ``t_end`` or
    the end of the search window) before meeting a singular circle.
    """
    points: list
    terminal: Terminal
    branch: Branch
    phi_unwrapped: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.array([p.time_T for p in self.points])

    @property
    def delta_phi(self) -> float:
        return float(self.phi_unwrapped[-1] - self.phi_unwrapped[0])

    @property
    def start(self) -> TorusPoint:
        return self.points[0]

    @property
    def end(self) -> TorusPoint:
        return self.points[-1]


# ---------------------------------------------------------------------------
# chart vectors
# ---------------------------------------------------------------------------

def chart_difference(a: NullRay, b: NullRay) -> np.ndarray:
    """``b - a`` in ``(q1, q2, theta)`` with the angle difference wrapped."""
    return np.array([b.q1 - a.q1, b.q2 - a.q2, wrap_angle(b.theta - a.theta)])


def chart_distance(a: NullRay, b: NullRay) -> float:
    return float(np.linalg.norm(chart_difference(a, b)))


def line_angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle in ``[0, pi/2]`` between the lines spanned by ``u`` and ``v``."""
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), abs(float(np.dot(u, v))))


def contact_form_on(theta: float, vec: Sequence[float]) -> float:
    return math.cos(theta) * vec[0] + math.sin(theta) * vec[1]


def _as_ray(e: np.ndarray) -> NullRay:
    return NullRay(float(e[0]), float(e[1]), reduce_angle(float(e[2])))


# ---------------------------------------------------------------------------
# regions of revolution: closed forms
# ---------------------------------------------------------------------------

def _slope_width(r: RevolutionRegion, t: float) -> tuple[float, float]:
    """``(r', sqrt(1 - r'^2))``, exact at the latitudes."""
    if t == r.t_minus:
        return 1.0, 0.0
    if t == r.t_plus:
        return -1.0, 0.0
    rho, drho = float(r.profile.rho(t)), float(r.profile.drho(t))
    sq = math.sqrt(rho)
    rp = max(-1.0, min(1.0, drho / (2.0 * sq)))
    w = math.sqrt(max(0.0, 4.0 * rho - drho * drho)) / (2.0 * sq)
    return rp, w


def _second_slope(r: RevolutionRegion, t: float) -> float:
    """``r''(t) = (2 rho rho'' - rho'^2) / (4 rho^(3/2))``."""
    p = r.profile
    rho, d1, d2 = float(p.rho(t)), float(p.drho(t)), float(p.d2rho(t))
    return (2.0 * rho * d2 - d1 * d1) / (4.0 * rho ** 1.5)


def revolution_torus_point(r: RevolutionRegion, t: float, phi: float,
                           branch: Branch | None) -> TorusPoint:
    """Closed-form torus point: event ``(t, r u(phi))``, spatial null
    direction ``d = r' u(phi) + sigma w u(phi)^perp`` and chart
    ``q = r u(phi) - t d``, ``theta = angle(d)``."""
    rr = r.radius(t)
    rp, w = _slope_width(r, t)
    if w == 0.0:
        branch = None
    sigma = branch.sign if branch is not None else 0.0
    c, s = unit(phi)
    dx, dy = rp * c - sigma * w * s, rp * s + sigma * w * c
    chart = NullRay(rr * c - t * dx, rr * s - t * dy, reduce_angle(math.atan2(dy, dx)))
    return TorusPoint(float(t), reduce_angle(phi), branch, chart, Event(float(t), rr * c, rr * s))


# ---------------------------------------------------------------------------
# torus surfaces in the chart
# ---------------------------------------------------------------------------

class ChartSurface:
    """A torus parametrised by ``(phi, s)`` and embedded in the chart.

    ``embed`` returns ``(q1, q2, theta)`` with ``theta`` continuous in the
    parameters (not reduced). ``tangents`` defaults to central differences.
    """

    fd_step = 1e-6

    def embed(self, phi: float, s: float) -> np.ndarray:
        raise NotImplementedError

    def torus_point(self, phi: float, s: float) -> TorusPoint:
        raise NotImplementedError

    def tangents(self, phi: float, s: float) -> tuple[np.ndarray, np.ndarray]:
        return self.fd_tangents(phi, s)

    def fd_tangents(self, phi: float, s: float) -> tuple[np.ndarray, np.ndarray]:
        h = self.fd_step

        def d(a, b):
            v = b - a
            v[2] = wrap_angle(v[2])
            return v / (2.0 * h)

        e = self.embed
        return d(e(phi - h, s), e(phi + h, s)), d(e(phi, s - h), e(phi, s + h))

    def point(self, phi: float, s: float) -> NullRay:
        return _as_ray(self.embed(phi, s))


class RevolutionTorus(ChartSurface):
    """Smooth global parametrisation of a revolution torus.

    ``s = alpha`` is the angle from ``u(phi)`` to the spatial null direction,
    so ``cos(alpha) = r'(t)`` and ``theta = phi + alpha``. Needs ``r'`` to be
    strictly decreasing on the band, which holds for the ellipsoid family.
    """

    def __init__(self, r: RevolutionRegion, n_check: int = 401):
        self.r = r
        ts = np.linspace(r.t_minus, r.t_plus, n_check)
        if not all(_second_slope(r, float(t)) < 0.0 for t in ts):
            raise RegionError("r' is not strictly decreasing on the timelike band")

    def t_of(self, alpha: float) -> float:
        c = math.cos(alpha)
        r = self.r
        lo, hi = r.t_minus, r.t_plus
        if c >= 1.0:
            return lo
        if c <= -1.0:
            return hi

        def g(t):
            return _slope_width(r, t)[0] - c

        glo, ghi = g(lo), g(hi)
        if glo <= 0.0:
            return lo
        if ghi >= 0.0:
            return hi
        return find_root(g, lo, hi, _ROOT_TOL)

    def _parts(self, phi, alpha):
        r = self.r
        t = self.t_of(alpha)
        return t, r.radius(t), phi + alpha

    def embed(self, phi, alpha):
        t, rr, th = self._parts(phi, alpha)
        c, s = unit(phi)
        ct, st = unit(th)
        return np.array([rr * c - t * ct, rr * s - t * st, th])

    def tangents(self, phi, alpha):
        r = self.r
        t, rr, th = self._parts(phi, alpha)
        c, s = unit(phi)
        ct, st = unit(th)
        rp = _slope_width(r, t)[0]
        t_a = -math.sin(alpha) / _second_slope(r, t)
        s_phi = np.array([-rr * s + t * st, rr * c - t * ct, 1.0])
        s_alpha = np.array([(rp * c - ct) * t_a + t * st,
                            (rp * s - st) * t_a - t * ct, 1.0])
        return s_phi, s_alpha

    def torus_point(self, phi, alpha):
        a = reduce_angle(alpha)
        t = self.t_of(a)
        branch = None
        if 0.0 < a < math.pi:
            branch = Branch.PLUS
        elif a > math.pi:
            branch = Branch.MINUS
        return revolution_torus_point(self.r, t, phi, branch)


class DiamondTorus(ChartSurface):
    """The rays through the unit circle at ``t = 0``: ``theta = phi + s``."""

    def embed(self, phi, s):
        c, sn = unit(phi)
        return np.array([c, sn, phi + s])

    def tangents(self, phi, s):
        c, sn = unit(phi)
        return np.array([-sn, c, 1.0]), np.array([0.0, 0.0, 1.0])

    def torus_point(self, phi, s):
        a = reduce_angle(s)
        branch = None
        if 0.0 < a < math.pi:
            branch = Branch.PLUS
        elif a > math.pi:
            branch = Branch.MINUS
        c, sn = unit(phi)
        return TorusPoint(0.0, reduce_angle(phi), branch,
                          NullRay(c, sn, reduce_angle(phi + s)), Event(0.0, c, sn))


# ---------------------------------------------------------------------------
# general smooth regions: meridians and lightlike latitudes
# ---------------------------------------------------------------------------

def axis_point(r: Region) -> tuple[float, float]:
    """Spatial point about which azimuths are measured."""
    if isinstance(r, (RevolutionRegion, DiamondRegion)):
        return 0.0, 0.0
    c = r.center
    return float(c[1]), float(c[2])


def _boundary_radius(r: Region, c: np.ndarray, w: np.ndarray, guess: float | None) -> float:
    """Newton along the ray from a nearby guess, falling back to a scan."""
    if guess is not None and guess > 0.0:
        s = guess
        for _ in range(40):
            h, gt, gx, gy = r.value_grad(*(c + s * w))
            dh = gt * w[0] + gx * w[1] + gy * w[2]
            if dh == 0.0:
                break
            step = h / dh
            s -= step
            if not s > 0.0:
                break
            if abs(step) <= 4e-16 * max(1.0, s):
                return s
    return boundary_along(r, c, w)


def polar_event(r: Region, center: Sequence[float], vartheta: float, phi: float,
                guess: float | None = None) -> tuple[Event, float]:
    c = np.asarray(center, dtype=float)
    w = np.asarray(meridian_direction(vartheta, phi))
    s = _boundary_radius(r, c, w, guess)
    return Event(*(c + s * w)), s


def _indicator_at(r: Region, p: Sequence[float]) -> float:
    _, ht, hx, hy = r.value_grad(*p)
    return _lightlike_indicator(ht, hx, hy)


def lightlike_polar_angles(r: Region, center: Sequence[float], phi: float,
                           n_scan: int = 48) -> tuple[float, float]:
    """Polar angles (from the past pole) of the two lightlike points on the
    meridian at azimuth ``phi``."""
    thetas = np.linspace(0.0, math.pi, n_scan + 1)[1:-1]
    vals, radii = [], []
    guess = None
    for th in thetas:
        p, guess = polar_event(r, center, float(th), phi, guess)
        vals.append(_indicator_at(r, p))
        radii.append(guess)
    ups = [i for i in range(len(vals) - 1) if vals[i] <= 0.0 < vals[i + 1]]
    downs = [i for i in range(len(vals) - 1) if vals[i] > 0.0 >= vals[i + 1]]
    if len(ups) != 1 or len(downs) != 1 or not ups[0] < downs[0]:
        raise RegionError(f"expected two lightlike points on the meridian phi={phi!r}, "
                          f"found {len(ups)} + {len(downs)} sign changes")

    def root(i):
        g0 = radii[i]

        def f(th):
            return _indicator_at(r, polar_event(r, center, th, phi, g0)[0])

        lo, hi = float(thetas[i]), float(thetas[i + 1])
        try:
            return find_root(f, lo, hi, _ROOT_TOL)
        except NoBracketError:
            # a grid node sits on the root and rounding flipped its sign
            return min((lo, hi), key=lambda th: abs(f(th)))

    return root(ups[0]), root(downs[0])


def surface_torus_point(r: Region, p: Sequence[float], branch: Branch | None,
                        axis: tuple[float, float] | None = None,
                        light_tol: float = LIGHTLIKE_TOL) -> TorusPoint:
    """Torus point over a boundary event of a general smooth region."""
    ax = axis_point(r) if axis is None else axis
    _, ht, hx, hy = r.value_grad(*p)
    dirs = null_directions_from_grad(ht, hx, hy, light_tol)
    if not dirs:
        raise RegionError(f"no null tangent at {tuple(p)} (spacelike boundary point)")
    if len(dirs) == 1 or branch is None:
        v, branch = dirs[0], None
    else:
        v = dirs[0] if branch is Branch.PLUS else dirs[1]
    ev = Event(*map(float, p))
    phi = reduce_angle(math.atan2(ev.y - ax[1], ev.x - ax[0]))
    return TorusPoint(ev.t, phi, branch, chart_of_geodesic(ev, v), ev)


class MeridianTorus(ChartSurface):
    """Torus of a smooth region star-shaped about ``center``.

    For ``0 <= s <= pi`` the event runs up the meridian at azimuth ``phi``
    from the lower to the upper lightlike point on the Plus sheet; for
    ``pi <= s <= 2 pi`` it runs back down on the Minus sheet. The
    parametrisation is continuous but not smooth at the singular circles,
    so finite-difference tangents are only meaningful away from them.
    """

    def __init__(self, r: Region, center: Sequence[float] | None = None):
        self.r = r
        self.center = tuple(map(float, r.center if center is None else center))
        self.axis = (self.center[1], self.center[2])
        self._lat: dict[float, tuple[float, float]] = {}

    def latitudes(self, phi: float) -> tuple[float, float]:
        key = float(phi)
        if key not in self._lat:
            self._lat[key] = lightlike_polar_angles(self.r, self.center, key)
        return self._lat[key]

    def _event_branch(self, phi, s):
        a = reduce_angle(s)
        lo, hi = self.latitudes(phi)
        if a <= math.pi:
            th, branch = lo + (hi - lo) * a / math.pi, Branch.PLUS
        else:
            th, branch = hi - (hi - lo) * (a - math.pi) / math.pi, Branch.MINUS
        if a == 0.0 or a == math.pi:
            branch = None
        return polar_event(self.r, self.center, th, phi)[0], branch

    def torus_point(self, phi, s):
        ev, branch = self._event_branch(phi, s)
        return surface_torus_point(self.r, ev, branch, self.axis)

    def embed(self, phi, s):
        ch = self.torus_point(phi, s).chart
        # keep theta continuous across the parameter domain
        base = phi + s
        th = base + wrap_angle(ch.theta - base)
        return np.array([ch.q1, ch.q2, th])


def torus_surface(r: Region) -> ChartSurface:
    if isinstance(r, DiamondRegion):
        return DiamondTorus()
    if isinstance(r, RevolutionRegion):
        try:
            return RevolutionTorus(r)
        except RegionError:
            pass
    return MeridianTorus(r)


# ---------------------------------------------------------------------------
# sampled torus
# ---------------------------------------------------------------------------

@dataclass
class SampledTorus:
    kind: str
    shape: tuple
    points: list
    max_tangency_gap: float = 0.0

    def rows(self) -> list[tuple]:
        out = []
        for p in self.points:
            out.append((p.t, p.phi, p.branch.value if p.branch else "Merged",
                        p.chart.q1, p.chart.q2, p.chart.theta, p.time_T))
        return out


def boundary_torus(r: Region, n_s: int = 16, n_phi: int = 16,
                   check_tangency: bool = True) -> SampledTorus:
    """Sample the torus on an ``n_phi x n_s`` grid of ``(phi, s)``.

    For general smooth regions every sample is cross-checked with the ray
    tangency functional: the chart ray must touch the region with ``G = 0``
    at the sampled event. The largest discrepancy is ``max_tangency_gap``.
    """
    surf = torus_surface(r)
    phis = np.arange(n_phi) * (TWO_PI / n_phi)
    ss = np.arange(n_s) * (TWO_PI / n_s)
    pts = [surf.torus_point(float(ph), float(s)) for ph in phis for s in ss]
    gap = 0.0
    if check_tangency and not isinstance(r, (RevolutionRegion, DiamondRegion)):
        for p in pts:
            tg = tangency_point(r, p.chart)
            gap = max(gap, abs(tg.G) / r.h_scale,
                      float(np.linalg.norm(np.subtract(tg.event, p.event))) / r.scale)
    return SampledTorus(r.kind, (n_phi, n_s), pts, gap)


# ---------------------------------------------------------------------------
# foliation direction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChartDirection:
    """Unit chart vector spanning ``ker(lambda) & TF``; ``vector`` is ``None``
    at a singular point. ``coeffs`` are ``(a, b)`` with the vector
    proportional to ``a S_phi + b S_s``."""
    singular: bool
    vector: np.ndarray | None = None
    coeffs: tuple | None = None


def chart_foliation_direction(surface: ChartSurface, phi: float, s: float,
                              fd: bool = False,
                              singular_tol: float = SINGULAR_TOL) -> ChartDirection:
    su, sv = surface.fd_tangents(phi, s) if fd else surface.tangents(phi, s)
    nu, nv = float(np.linalg.norm(su)), float(np.linalg.norm(sv))
    if np.linalg.norm(np.cross(su, sv)) < ILL_CONDITIONED_TOL * max(nu * nv, 1e-300):
        raise IllConditionedError(f"tangent basis degenerate at (phi, s) = ({phi}, {s})")
    th = float(surface.embed(phi, s)[2])
    lu, lv = contact_form_on(th, su), contact_form_on(th, sv)
    if abs(lu) < singular_tol * nu and abs(lv) < singular_tol * nv:
        return ChartDirection(True)
    a, b = lv, -lu
    vec = a * su + b * sv
    n = float(np.linalg.norm(vec))
    m = math.hypot(a, b)
    return ChartDirection(False, vec / n, (a / m, b / m))


# ---------------------------------------------------------------------------
# leaves
# ---------------------------------------------------------------------------

def integrate_leaf(r: Region, start: TorusPoint, tol: Tolerance | None = None,
                   branch: Branch | None = None, backward: bool = False,
                   t_end: float | None = None) -> Leaf:
    """Follow the leaf through ``start`` until it meets a singular circle.

    Leaves are parametrised by coordinate time. ``backward`` runs ``t``
    downwards. On a singular circle ``start.branch`` is ``None`` and the
    family must be passed as ``branch``. With ``t_end`` the integration
    stops there instead (terminal flag ``Budget``).
    """
    b = start.branch if branch is None else branch
    if b is None:
        raise ValueError("start lies on a singular circle; pass the branch explicitly")
    tol = tol or LEAF_TOL
    if isinstance(r, RevolutionRegion):
        return _leaf_revolution(r, start, b, tol, backward, t_end)
    if isinstance(r, DiamondRegion):
        return _leaf_diamond(start, b, tol)
    return _leaf_surface(r, start, b, tol, backward, t_end)


def _leaf_revolution(r, start, b, tol, backward, t_end):
    p = r.profile
    sigma = b.sign
    rho_scale = float(p.rho(r.center.t))

    def rhs(t, y):
        rho, d1 = float(p.rho(t)), float(p.drho(t))
        return (sigma * math.sqrt(max(0.0, 4.0 * rho - d1 * d1)) / (2.0 * rho),)

    def guard(t, y):
        rho, d1 = float(p.rho(t)), float(p.drho(t))
        return (4.0 * rho - d1 * d1) / rho_scale

    band = r.t_plus - r.t_minus
    if t_end is None:
        if backward:
            t1 = r.t_minus - 0.5 * min(r.t_minus - p.t_min, 1e-3 * band)
        else:
            t1 = r.t_plus + 0.5 * min(p.t_max - r.t_plus, 1e-3 * band)
        events = (OdeEvent(guard, "falling", True, "lightlike"),)
    else:
        t1, events = t_end, ()
    sol = ode_integrate(rhs, (start.phi,), start.t, t1, events, tol,
                        max_step=0.05 * band)
    ts, phis = sol.ts.copy(), sol.ys[:, 0].copy()
    if sol.terminated:
        terminal = Terminal.LOWER if backward else Terminal.UPPER
        ts[-1] = r.t_minus if backward else r.t_plus
    else:
        terminal = Terminal.BUDGET
    pts = [revolution_torus_point(r, float(t), float(ph), b) for t, ph in zip(ts, phis)]
    return Leaf(pts, terminal, b, phis)


def _leaf_diamond(start, b, tol):
    """Leaves of the diamond torus run along the fibres ``theta`` at fixed
    ``q``; integrate ``dphi/dtheta = -lambda(S_s)/lambda(S_phi)`` in the
    fibre parameter until the contact form degenerates again."""
    surf = DiamondTorus()
    phi0 = math.atan2(start.chart.q2, start.chart.q1)
    s0 = reduce_angle(start.chart.theta - phi0)
    if b is Branch.MINUS and math.pi - 1e-9 < s0 < math.pi:
        s0 = math.pi
    if b is Branch.PLUS and s0 > TWO_PI - 1e-9:
        s0 = 0.0
    if (b is Branch.PLUS) != (s0 < math.pi):
        raise ValueError(f"start is not on the {b.value} sheet of the diamond torus")
    sigma = b.sign

    def lams(ph, s):
        su, sv = surf.tangents(ph, s)
        th = ph + s
        return contact_form_on(th, su) / np.linalg.norm(su), contact_form_on(th, sv) / np.linalg.norm(sv)

    def rhs(s, y):
        lu, lv = lams(y[0], s)
        if abs(lv) < SINGULAR_TOL:
            return (0.0,)
        return (-lv / lu,)

    def guard(s, y):
        return sigma * lams(y[0], s)[0]

    s1 = (math.pi if b is Branch.PLUS else TWO_PI) + 0.1
    sol = ode_integrate(rhs, (phi0,), s0, s1, (OdeEvent(guard, "falling", True, "singular"),),
                        tol, max_step=0.1)
    terminal = Terminal.UPPER if b is Branch.PLUS else Terminal.LOWER
    if not sol.terminated:
        terminal = Terminal.BUDGET
    pts = []
    for s, y in zip(sol.ts, sol.ys):
        pt = surf.torus_point(float(y[0]), float(s))
        pts.append(pt)
    if sol.terminated:
        end_s = math.pi if b is Branch.PLUS else TWO_PI
        pts[-1] = surf.torus_point(float(sol.ys[-1][0]), end_s)
    return Leaf(pts, terminal, b, sol.ys[:, 0].copy())


def _leaf_surface(r, start, b, tol, backward, t_end):
    cx, cy = axis_point(r)
    sigma = b.sign
    hs = r.h_scale

    def direction(t, x, y):
        _, ht, hx, hy = r.value_grad(t, x, y)
        g = math.hypot(hx, hy)
        nx, ny = -hx / g, -hy / g
        a = max(-1.0, min(1.0, ht / g))
        w = math.sqrt(max(0.0, 1.0 - a * a))
        return a * nx - sigma * w * ny, a * ny + sigma * w * nx

    def rhs(t, s):
        x, y = s[0], s[1]
        dx, dy = direction(t, x, y)
        rx, ry = x - cx, y - cy
        return (dx, dy, (rx * dy - ry * dx) / (rx * rx + ry * ry))

    def guard(t, s):
        return _indicator_at(r, (t, s[0], s[1]))

    def projection(t, s):
        x, y = s[0], s[1]
        for _ in range(4):
            h, _, hx, hy = r.value_grad(t, x, y)
            if abs(h) <= PROJECTION_TOL * hs:
                ph = s[2] + wrap_angle(math.atan2(y - cy, x - cx) - s[2])
                return np.array([x, y, ph])
            g2 = hx * hx + hy * hy
            x, y = x - h * hx / g2, y - h * hy / g2
        return None

    lo, hi = r.inflated_bbox()
    t1 = t_end if t_end is not None else (lo[0] if backward else hi[0])
    events = () if t_end is not None else (OdeEvent(guard, "falling", True, "lightlike"),)
    ev = start.event
    phi0 = math.atan2(ev.y - cy, ev.x - cx)
    try:
        sol = ode_integrate(rhs, (ev.x, ev.y, phi0), ev.t, t1, events, tol,
                            projection=projection, max_step=0.05 * r.scale)
    except StiffError as exc:
        raise LostSurfaceError(f"leaf lost the boundary surface: {exc}") from exc
    if sol.terminated:
        terminal = Terminal.LOWER if backward else Terminal.UPPER
    else:
        terminal = Terminal.BUDGET
    pts = []
    n = len(sol.ts)
    for i, (t, y) in enumerate(zip(sol.ts, sol.ys)):
        merged = sol.terminated and i == n - 1
        pts.append(surface_torus_point(r, (float(t), float(y[0]), float(y[1])),
                                       None if merged else b, (cx, cy)))
    return Leaf(pts, terminal, b, sol.ys[:, 2].copy())


def lower_circle_start(r: Region, phi: float) -> TorusPoint:
    """The torus point on the lower singular circle at azimuth ``phi``."""
    if isinstance(r, RevolutionRegion):
        return revolution_torus_point(r, r.t_minus, phi, None)
    if isinstance(r, DiamondRegion):
        return DiamondTorus().torus_point(phi, 0.0)
    surf = MeridianTorus(r)
    return surf.torus_point(phi, 0.0)


def leaf_chart_tangent(r: Region, pt: TorusPoint, h: float = 1e-4,
                       tol: Tolerance | None = None) -> np.ndarray:
    """Chart velocity of the leaf through ``pt``, by integrating the
    lightlike curve a short way either side and differencing the charts.

    Central differences at ``h`` and ``h/2`` are combined by Richardson
    extrapolation.
    """
    tol = tol or Tolerance(1e-14, 1e-14, 10_000)

    def central(step):
        fwd = integrate_leaf(r, pt, tol, t_end=pt.t + step)
        bwd = integrate_leaf(r, pt, tol, backward=True, t_end=pt.t - step)
        return chart_difference(bwd.end.chart, fwd.end.chart) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


@dataclass
class ConsistencyReport:
    n_samples: int
    max_angle: float
    worst: tuple | None = None


def foliation_consistency(r: RevolutionRegion, n_samples: int = 1000,
                          margin: float = SINGULAR_MARGIN, seed: int = 0) -> ConsistencyReport:
    """Largest angle between the chart-level foliation line and the chart
    velocity of the integrated leaf, over random samples of both sheets
    kept ``margin`` away from the singular circles (in ``t``)."""
    rng = np.random.default_rng(seed)
    surf = _RevolutionSheet(r)
    worst, max_ang = None, 0.0
    lo, hi = r.t_minus + margin, r.t_plus - margin
    for k in range(n_samples):
        t = float(rng.uniform(lo, hi))
        phi = float(rng.uniform(0.0, TWO_PI))
        b = Branch.PLUS if k % 2 == 0 else Branch.MINUS
        surf.branch = b
        d = chart_foliation_direction(surf, phi, t)
        if d.singular:
            raise MismatchError(f"regular sample t={t} reported singular")
        pt = revolution_torus_point(r, t, phi, b)
        # the chart curve bends like 1/sqrt(distance) near the latitudes
        h = min(1e-4, 0.05 * min(t - r.t_minus, r.t_plus - t))
        ang = line_angle(d.vector, leaf_chart_tangent(r, pt, h))
        if ang > max_ang:
            max_ang, worst = ang, (t, phi, b.value)
    return ConsistencyReport(n_samples, max_ang, worst)


class _RevolutionSheet(ChartSurface):
    """One branch sheet with coordinates ``(phi, t)`` and analytic tangents."""

    def __init__(self, r: RevolutionRegion, branch: Branch = Branch.PLUS):
        self.r, self.branch = r, branch

    def embed(self, phi, t):
        p = revolution_torus_point(self.r, t, phi, self.branch)
        th = phi + wrap_angle(p.chart.theta - phi)
        return np.array([p.chart.q1, p.chart.q2, th])

    def tangents(self, phi, t):
        r = self.r
        sigma = self.branch.sign
        rr = r.radius(t)
        rp, w = _slope_width(r, t)
        alpha = math.atan2(sigma * w, rp)
        th = phi + alpha
        c, s = unit(phi)
        ct, st = unit(th)
        a_t = -_second_slope(r, t) / (sigma * w)
        s_phi = np.array([-rr * s + t * st, rr * c - t * ct, 1.0])
        s_t = np.array([rp * c - ct + t * a_t * st, rp * s - st - t * a_t * ct, a_t])
        return s_phi, s_t


# ---------------------------------------------------------------------------
# singular set
# ---------------------------------------------------------------------------

def _hausdorff(a: list, b: list) -> float:
    if not a or not b:
        return math.inf
    d = np.array([[chart_distance(x, y) for y in b] for x in a])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass
class SingularSet:
    """Both singular circles, from the lightlike latitudes (``lower``,
    ``upper``) and from an independent detection (``detected_*``)."""
    lower: list
    upper: list
    detected_lower: list
    detected_upper: list
    mismatch: float
    method: str


def _detect_singular(surface: ChartSurface, phi: float, n_scan: int) -> list[tuple[float, NullRay]]:
    """Zeros of ``lambda(S_phi)`` along the ``s`` circle that are also zeros
    of ``lambda(S_s)``, with finite-difference tangents."""
    def g(s):
        su, _ = surface.fd_tangents(phi, s)
        th = float(surface.embed(phi, s)[2])
        return contact_form_on(th, su) / float(np.linalg.norm(su))

    # offset grid: never lands on s = 0 or s = pi
    ss = (np.arange(n_scan) + 0.25) * (TWO_PI / n_scan)
    vals = [g(float(s)) for s in ss]
    out = []
    for i in range(n_scan):
        j = (i + 1) % n_scan
        lo, hi = float(ss[i]), float(ss[j]) + (TWO_PI if j == 0 else 0.0)
        if vals[i] * vals[j] < 0.0:
            s0 = find_root(g, lo, hi, Tolerance(1e-14, 1e-14, 200))
            d = chart_foliation_direction(surface, phi, s0, fd=True)
            if d.singular:
                out.append((reduce_angle(s0), surface.point(phi, s0)))
    return out


def singular_set(r: Region, n_phi: int = 32, tol: float = 1e-6,
                 n_scan: int = 24) -> SingularSet:
    """The two singular circles, computed twice and cross-checked.

    The first computation maps the lightlike latitudes to the torus. The
    second, for regions of revolution and the diamond, searches the chart
    embedding for points where the contact form kills both tangent vectors.
    For other regions the second computation checks each latitude ray
    against the tangency functional (it must touch with ``G = 0`` at the
    latitude event). Raises :class:`MismatchError` above ``tol``.
    """
    phis = [float(p) for p in np.arange(n_phi) * (TWO_PI / n_phi)]
    surf = torus_surface(r)
    lower = [surf.torus_point(ph, 0.0) for ph in phis]
    upper = [surf.torus_point(ph, math.pi) for ph in phis]
    if isinstance(surf, (RevolutionTorus, DiamondTorus)):
        det_lo, det_hi = [], []
        for ph in phis:
            for s0, ray in _detect_singular(surf, ph, n_scan):
                (det_lo if math.cos(s0) > 0 else det_hi).append(ray)
        mismatch = max(_hausdorff([p.chart for p in lower], det_lo),
                       _hausdorff([p.chart for p in upper], det_hi))
        method = "chart-detection"
        if len(det_lo) != n_phi or len(det_hi) != n_phi:
            mismatch = math.inf
    else:
        det_lo = [p.chart for p in lower]
        det_hi = [p.chart for p in upper]
        mismatch = 0.0
        for p in lower + upper:
            tg = tangency_point(r, p.chart)
            mismatch = max(mismatch, abs(tg.G) / r.h_scale,
                           float(np.linalg.norm(np.subtract(tg.event, p.event))))
        method = "tangency"
    if not mismatch <= tol:
        raise MismatchError(f"singular set computations disagree by {mismatch:.3e} (tol {tol:.1e})")
    return SingularSet(lower, upper, det_lo, det_hi, mismatch, method)


# ---------------------------------------------------------------------------
# dividing set
# ---------------------------------------------------------------------------

@dataclass
class DividingReport:
    """``y_transverse_min`` is the smallest normalised triple product
    ``det[S_phi, S_s, Y]``; ``foliation_transverse_min`` the smallest sine of
    the angle between a dividing curve and the foliation line."""
    y_transverse_min: float
    foliation_transverse_min: float
    separates: bool
    n_samples: int

    @property
    def ok(self) -> bool:
        return (self.y_transverse_min > TRANSVERSE_TOL
                and self.foliation_transverse_min > TRANSVERSE_TOL and self.separates)

    def to_dict(self) -> dict:
        return {"y_transverse_min": self.y_transverse_min,
                "foliation_transverse_min": self.foliation_transverse_min,
                "separates": self.separates, "n_samples": self.n_samples, "ok": self.ok}


@dataclass
class DividingSet:
    components: list          # one (n_phi, 3) array of chart samples each
    component_points: list    # matching lists of TorusPoint
    count: int
    latitudes: list
    report: DividingReport


def contact_field_value(ray: NullRay, center: Sequence[float]) -> float:
    """``lambda(Y)`` for the lifted dilation about ``center``."""
    ct, cx, cy = center
    c, s = unit(ray.theta)
    return (ray.q1 - cx) * c + (ray.q2 - cy) * s + ct


def _field_vector(e: np.ndarray, center) -> np.ndarray:
    ct, cx, cy = center
    c, s = unit(float(e[2]))
    return np.array([e[0] - cx + ct * c, e[1] - cy + ct * s, 0.0])


def dividing_set(r: Region, center: Sequence[float] = (0.0, 0.0, 0.0),
                 n_phi: int = 32, n_s: int = 64, check_star: bool = True) -> DividingSet:
    """Zero set of ``lambda(Y)`` on the torus for the dilation field about
    ``center``, with the transversality and separation checks.

    Raises :class:`NotTransverseError` if ``Y`` is tangent to the torus at a
    sample (then the zero set is not a dividing set).
    """
    center = tuple(map(float, center))
    if isinstance(r, DiamondRegion):
        raise RegionError("dividing sets need a smooth boundary; the diamond is analytic-only")
    if check_star and not star_shaped_check(r, center, n_dirs=128).passed:
        raise RegionError(f"region is not star-shaped about {center}")
    surf = torus_surface(r)
    if isinstance(surf, MeridianTorus):
        surf = MeridianTorus(r, center if r.value(*center) > 0 else None)
    smooth = isinstance(surf, RevolutionTorus)
    margin = 0.0 if smooth else 0.02
    phis = [float(p) for p in np.arange(n_phi) * (TWO_PI / n_phi)]
    ss = [float(s) for s in (np.arange(n_s) + 0.5) * (TWO_PI / n_s)]

    def lam_y(ph, s):
        return contact_field_value(surf.point(ph, s), center)

    roots_by_phi, separates = [], True
    for ph in phis:
        vals = [lam_y(ph, s) for s in ss]
        roots = []
        for i in range(n_s):
            j = (i + 1) % n_s
            lo, hi = ss[i], ss[j] + (TWO_PI if j == 0 else 0.0)
            if vals[i] == 0.0:
                roots.append(ss[i])
            elif vals[i] * vals[j] < 0.0:
                roots.append(reduce_angle(find_root(lambda s: lam_y(ph, s), lo, hi,
                                                    Tolerance(1e-14, 1e-14, 200))))
        roots_by_phi.append(sorted(roots))
        if lam_y(ph, 0.0) * lam_y(ph, math.pi) >= 0.0:
            separates = False
    counts = {len(rs) for rs in roots_by_phi}
    if len(counts) != 1:
        raise MismatchError(f"dividing set root count varies with phi: {sorted(counts)}")
    count = counts.pop()

    comps, comp_pts, lats = [], [], []
    fol_min = math.inf
    h = 1e-6
    for k in range(count):
        pts, arr = [], []
        for ph, rs in zip(phis, roots_by_phi):
            s0 = rs[k]
            pt = surf.torus_point(ph, s0)
            pts.append(pt)
            arr.append([pt.chart.q1, pt.chart.q2, pt.chart.theta])
            su, sv = surf.tangents(ph, s0)
            d_phi = (lam_y(ph + h, s0) - lam_y(ph - h, s0)) / (2 * h)
            d_s = (lam_y(ph, s0 + h) - lam_y(ph, s0 - h)) / (2 * h)
            tangent = su - (d_phi / d_s) * sv
            fd = chart_foliation_direction(surf, ph, s0)
            if fd.singular:
                fol_min = 0.0
                continue
            c = np.cross(tangent, fd.vector)
            fol_min = min(fol_min, float(np.linalg.norm(c) / np.linalg.norm(tangent)))
        comps.append(np.array(arr))
        comp_pts.append(pts)
        lats.append(float(np.mean([p.t for p in pts])))

    y_min, n = math.inf, 0
    for ph in phis:
        for s in ss:
            a = reduce_angle(s)
            if min(a, abs(a - math.pi), TWO_PI - a) < margin * math.pi:
                continue
            su, sv = surf.tangents(ph, s)
            yv = _field_vector(surf.embed(ph, s), center)
            den = float(np.linalg.norm(su) * np.linalg.norm(sv) * np.linalg.norm(yv))
            tp = abs(float(np.linalg.det(np.stack([su, sv, yv])))) / den if den > 0 else 0.0
            y_min = min(y_min, tp)
            n += 1
    rep = DividingReport(y_min, fol_min if count else 0.0, separates, n)
    if not y_min > TRANSVERSE_TOL:
        raise NotTransverseError(f"dilation field tangent to the torus (min triple product {y_min:.3e})")
    return DividingSet(comps, comp_pts, count, lats, rep)
