"""Minkowski space R^{1,2}, null rays and the contact chart of the space of
null geodesics.

A future-pointing null geodesic is labelled by where it crosses ``t = 0``
(``q``) and the spatial direction it moves in (``theta``)::

    gamma(s) = (s, q + s * u(theta)),   u(theta) = (cos theta, sin theta)

and the contact form in these coordinates is ``cos(theta) dq1 + sin(theta) dq2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import GeometryError, NotFutureError, NotNullError

TWO_PI = 2.0 * math.pi
ETA = np.diag([-1.0, 1.0, 1.0])


def wrap_angle(x: float) -> float:
    """Reduce an angle to ``(-pi, pi]``."""
    y = math.fmod(x + math.pi, TWO_PI)
    if y <= 0.0:
        y += TWO_PI
    return y - math.pi


def reduce_angle(x: float) -> float:
    """Reduce an angle to ``[0, 2 pi)``."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    if y >= TWO_PI:
        y = 0.0
    return y


def unit(theta: float) -> tuple[float, float]:
    return math.cos(theta), math.sin(theta)


class Event(NamedTuple):
    t: float
    x: float
    y: float

    def __add__(self, other):  # type: ignore[override]
        return Event(self.t + other[0], self.x + other[1], self.y + other[2])

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y])


class TangentVec(NamedTuple):
    vt: float
    vx: float
    vy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.vt, self.vx, self.vy])


class NullRay(NamedTuple):
    q1: float
    q2: float
    theta: float

    @property
    def q(self) -> tuple[float, float]:
        return self.q1, self.q2

    def event(self, s: float) -> Event:
        c, sn = unit(self.theta)
        return Event(s, self.q1 + s * c, self.q2 + s * sn)

    def direction(self) -> TangentVec:
        c, sn = unit(self.theta)
        return TangentVec(1.0, c, sn)

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.theta])


class CausalKind(enum.Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"
    ZERO = "zero"


class TimeOrientation(enum.Enum):
    FUTURE = "future"
    PAST = "past"


@dataclass(frozen=True)
class CausalClass:
    kind: CausalKind
    orientation: TimeOrientation | None = None

    def __post_init__(self):
        causal = self.kind in (CausalKind.TIMELIKE, CausalKind.NULL)
        if causal != (self.orientation is not None):
            raise GeometryError("orientation is defined exactly for causal vectors")


def eta(v: Sequence[float], w: Sequence[float]) -> float:
    return -v[0] * w[0] + v[1] * w[1] + v[2] * w[2]


def causal_character(v: Sequence[float], rel_tol: float = 1e-12) -> CausalClass:
    """Classify ``v`` by the sign of ``eta(v, v)``; time orientation by ``dt``.

    Null is decided relative to the Euclidean size of ``v`` so that rounding
    in, e.g., normalised null vectors does not flip the class.
    """
    n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    if n2 == 0.0:
        return CausalClass(CausalKind.ZERO)
    q = eta(v, v)
    if abs(q) <= rel_tol * n2:
        kind = CausalKind.NULL
    elif q < 0:
        kind = CausalKind.TIMELIKE
    else:
        return CausalClass(CausalKind.SPACELIKE)
    orient = TimeOrientation.FUTURE if v[0] > 0 else TimeOrientation.PAST
    return CausalClass(kind, orient)


def chart_of_geodesic(p: Sequence[float], v: Sequence[float],
                      rel_tol: float = 1e-9) -> NullRay:
    """Chart coordinates of the null geodesic through ``p`` with velocity ``v``."""
    vt, vx, vy = float(v[0]), float(v[1]), float(v[2])
    n2 = vt * vt + vx * vx + vy * vy
    if n2 == 0.0 or abs(-vt * vt + vx * vx + vy * vy) > rel_tol * n2:
        raise NotNullError(f"velocity {tuple(v)} is not null")
    if vt <= 0.0:
        raise NotFutureError(f"velocity {tuple(v)} is not future pointing")
    ux, uy = vx / vt, vy / vt
    nrm = math.hypot(ux, uy)
    ux, uy = ux / nrm, uy / nrm
    t, x, y = float(p[0]), float(p[1]), float(p[2])
    return NullRay(x - t * ux, y - t * uy, reduce_angle(math.atan2(uy, ux)))


def contact_form_eval(r: NullRay, dq: Sequence[float], dtheta: float = 0.0) -> float:
    """The contact form ``cos(theta) dq1 + sin(theta) dq2`` on a chart tangent.

    ``dtheta`` is accepted for symmetry; the form does not see it.
    """
    c, s = unit(r.theta)
    return c * dq[0] + s * dq[1]


def contact_form_array(chart: np.ndarray, w: np.ndarray) -> float:
    """Same as :func:`contact_form_eval` for ``(q1, q2, theta)`` arrays."""
    th = chart[2]
    return math.cos(th) * w[0] + math.sin(th) * w[1]


@dataclass(frozen=True)
class Sky:
    """Circle of null rays through ``p``: ``theta -> (p_xy - p_t u(theta), theta)``."""
    p: Event

    def __call__(self, theta: float) -> NullRay:
        c, s = unit(theta)
        return NullRay(self.p.x - self.p.t * c, self.p.y - self.p.t * s,
                       reduce_angle(theta))

    def tangent(self, theta: float) -> tuple[tuple[float, float], float]:
        c, s = unit(theta)
        return (self.p.t * s, -self.p.t * c), 1.0


def sky(p: Sequence[float]) -> Sky:
    return Sky(Event(*map(float, p)))


# ---------------------------------------------------------------------------
# conformal group (affine part)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Translation:
    by: Event


@dataclass(frozen=True)
class Lorentz:
    matrix: tuple  # 3x3 nested tuple, row-major

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise GeometryError("Lorentz matrix must be 3x3")
        if not np.allclose(m.T @ ETA @ m, ETA, atol=1e-10):
            raise GeometryError("matrix does not preserve the Minkowski metric")
        if m[0, 0] <= 0.0:
            raise GeometryError("Lorentz factor must be orthochronous")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)


@dataclass(frozen=True)
class Dilation:
    scale: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise GeometryError("dilation scale must be positive")


Factor = Union[Translation, Lorentz, Dilation]


def boost(rapidity: float, axis: Sequence[float] = (1.0, 0.0)) -> Lorentz:
    nx, ny = float(axis[0]), float(axis[1])
    n = math.hypot(nx, ny)
    if n == 0.0:
        raise GeometryError("boost axis must be non-zero")
    nx, ny = nx / n, ny / n
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    m = ((ch, sh * nx, sh * ny),
         (sh * nx, 1 + (ch - 1) * nx * nx, (ch - 1) * nx * ny),
         (sh * ny, (ch - 1) * nx * ny, 1 + (ch - 1) * ny * ny))
    return Lorentz(m)


def rotation(angle: float) -> Lorentz:
    c, s = math.cos(angle), math.sin(angle)
    return Lorentz(((1.0, 0.0, 0.0), (0.0, c, -s), (0.0, s, c)))


@dataclass(frozen=True)
class ConformalMap:
    """Composition of translations, orthochronous Lorentz maps and dilations.

    Factors act in list order: ``factors[0]`` is applied first. Every factor
    is affine, so the whole map is ``p -> L p + b`` with ``L`` a positive
    multiple of an orthochronous Lorentz matrix.
    """
    factors: tuple = ()

    def affine(self) -> tuple[np.ndarray, np.ndarray]:
        lin = np.eye(3)
        off = np.zeros(3)
        for f in self.factors:
            if isinstance(f, Translation):
                off = off + np.asarray(f.by, dtype=float)
            elif isinstance(f, Lorentz):
                m = f.array
                lin, off = m @ lin, m @ off
            elif isinstance(f, Dilation):
                lin, off = f.scale * lin, f.scale * off
            else:
                raise GeometryError(f"unknown conformal factor {f!r}")
        return lin, off

    def then(self, other: "ConformalMap") -> "ConformalMap":
        return ConformalMap(tuple(self.factors) + tuple(other.factors))

    def inverse(self) -> "ConformalMap":
        inv = []
        for f in reversed(self.factors):
            if isinstance(f, Translation):
                inv.append(Translation(Event(-f.by[0], -f.by[1], -f.by[2])))
            elif isinstance(f, Lorentz):
                inv.append(Lorentz(tuple(map(tuple, np.linalg.inv(f.array)))))
            else:
                inv.append(Dilation(1.0 / f.scale))
        return ConformalMap(tuple(inv))


def identity_map() -> ConformalMap:
    return ConformalMap(())


def apply_conformal(m: ConformalMap, p: Sequence[float]) -> Event:
    lin, off = m.affine()
    return Event(*(lin @ np.asarray(p, dtype=float) + off))


def apply_conformal_ray(m: ConformalMap, r: NullRay) -> NullRay:
    lin, off = m.affine()
    p = lin @ np.array([0.0, r.q1, r.q2]) + off
    v = lin @ np.array([1.0, math.cos(r.theta), math.sin(r.theta)])
    return chart_of_geodesic(p, v)
