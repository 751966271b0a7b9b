"""Rotation angle of the return map between the singular circles, rotation
numbers of sampled circle maps, and verdicts comparing two regions.

Regions of revolution have a rigid-rotation return map whose angle is an
integral over the timelike band; general regions are traced leaf by leaf and
the resulting circle map is reduced to its rotation number.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boundary import lightlike_latitudes
from .errors import InconsistentHolonomyError, NotMonotoneError
from .foliation import (Branch, DiamondTorus, MeridianTorus, integrate_leaf,
                        lower_circle_start)
from .geometry import TWO_PI, wrap_angle
from .numerics import Tolerance, adaptive_quadrature, find_root
from .regions import (DiamondRegion, RadiusSquaredProfile, Region,
                      RevolutionRegion)

COMPARE_TOL = 1e-3
SPREAD_TOL = 1e-6
BIRKHOFF_ITERATIONS = 4000
MAX_SAMPLE_GAP = math.pi / 8


class Method(enum.Enum):
    QUADRATURE = "Quadrature"
    TRACED = "Traced"


class Orientation(enum.Enum):
    CCW = "CCW"
    CW = "CW"


@dataclass(frozen=True)
class RotationResult:
    """``total_angle`` is signed (counter-clockwise positive, following the
    Plus family); ``reduced`` is it modulo ``2 pi`` in ``(-pi, pi]``.

    ``spread`` is the range of per-point return angles (revolution and
    diamond) and ``param_delta`` the change of the rotation number under an
    arclength reparametrisation of the base circle (general regions).
    """
    total_angle: float
    reduced: float
    method: Method
    orientation: Orientation
    n_base_points: int = 0
    spread: float = 0.0
    param_delta: float | None = None

    def __post_init__(self):
        if abs(wrap_angle(self.total_angle - self.reduced)) > 1e-12:
            raise ValueError("reduced angle is not total_angle mod 2 pi")

    def to_dict(self) -> dict:
        d = {"method": self.method.value, "total_angle": self.total_angle,
             "reduced": self.reduced, "orientation": self.orientation.value,
             "n_base_points": self.n_base_points, "spread": self.spread}
        if self.param_delta is not None:
            d["param_delta"] = self.param_delta
        return d


def _result(total: float, method: Method, **kw) -> RotationResult:
    orient = Orientation.CCW if total >= 0.0 else Orientation.CW
    total = float(total)
    return RotationResult(total, wrap_angle(total), method, orient, **kw)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def rotation_angle_quadrature(profile: RadiusSquaredProfile,
                              tol: Tolerance | None = None) -> RotationResult:
    """``int_{t-}^{t+} sqrt(4 rho - rho'^2) / rho dt`` over the timelike band."""
    tol = tol or Tolerance(1e-13, 1e-13, 20_000)
    lo, hi = lightlike_latitudes(profile)

    def f(t):
        rho, d1 = float(profile.rho(t)), float(profile.drho(t))
        return math.sqrt(max(0.0, 4.0 * rho - d1 * d1)) / rho

    return _result(adaptive_quadrature(f, lo, hi, tol), Method.QUADRATURE)


# ---------------------------------------------------------------------------
# circle maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleMap:
    """Samples ``x_k -> F(x_k)`` of a lift ``F`` of a circle map, with
    ``F(x + 2 pi) = F(x) + 2 pi``. ``inputs`` are increasing within one
    period; ``lift`` holds the lifted outputs."""
    inputs: np.ndarray
    lift: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.lift, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
            raise ValueError("inputs and lift must be 1-d arrays of equal length >= 2")
        if not (np.all(np.diff(x) > 0) and x[-1] - x[0] < TWO_PI):
            raise ValueError("inputs must increase within one period")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "lift", y)

    @classmethod
    def from_function(cls, f: Callable[[float], float], n: int, x0: float = 0.0) -> "CircleMap":
        xs = x0 + np.arange(n) * (TWO_PI / n)
        return cls(xs, np.array([f(float(x)) for x in xs]))

    @property
    def displacement(self) -> np.ndarray:
        return self.lift - self.inputs

    @property
    def equispaced(self) -> bool:
        n = len(self.inputs)
        return bool(np.allclose(np.diff(self.inputs), TWO_PI / n, rtol=1e-9, atol=1e-12))

    def max_gap(self) -> float:
        x = self.inputs
        return float(max(np.max(np.diff(x)), x[0] + TWO_PI - x[-1]))

    def interpolant(self) -> Callable[[float], float]:
        """Periodic interpolant of the displacement: trigonometric for
        equispaced samples, piecewise linear otherwise."""
        d = self.displacement
        x0 = float(self.inputs[0])
        n = len(d)
        if self.equispaced:
            c = np.fft.rfft(d) / n
            wts = np.full(len(c), 2.0)
            wts[0] = 1.0
            if n % 2 == 0:
                wts[-1] = 1.0
            c = c * wts
            k = np.arange(len(c))

            def trig(x):
                return float(np.real(np.dot(c, np.exp(1j * k * (x - x0)))))

            return trig
        xs = self.inputs

        def lin(x):
            return float(np.interp(x, xs, d, period=TWO_PI))

        return lin

    def __call__(self, x: float) -> float:
        return x + self.interpolant()(x)


def _check_monotone(m: CircleMap, disp: Callable[[float], float], refine: int = 8):
    if m.max_gap() >= MAX_SAMPLE_GAP:
        raise NotMonotoneError(f"circle map undersampled: gap {m.max_gap():.3f} >= pi/8")
    n = len(m.inputs) * refine
    xs = m.inputs[0] + np.arange(n + 1) * (TWO_PI / n)
    ys = np.array([x + disp(float(x)) for x in xs])
    if not np.all(np.diff(ys) > 0.0):
        raise NotMonotoneError("interpolated lift is not increasing")


def _bump_weights(n: int) -> np.ndarray:
    t = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (t * (1.0 - t)))
    return w / w.sum()


def translation_number(m: CircleMap, iterations: int = BIRKHOFF_ITERATIONS) -> float:
    """Weighted Birkhoff average of the displacement along one orbit of the
    interpolated lift (unreduced)."""
    disp = m.interpolant()
    _check_monotone(m, disp)
    w = _bump_weights(iterations)
    x = float(m.inputs[0])
    acc = 0.0
    for k in range(iterations):
        d = disp(x)
        acc += w[k] * d
        x += d
    return acc


def rotation_number_of_circle_map(m: CircleMap, iterations: int = BIRKHOFF_ITERATIONS) -> float:
    """Rotation number in ``(-pi, pi]`` (radians)."""
    return wrap_angle(translation_number(m, iterations))


# ---------------------------------------------------------------------------
# traced holonomy
# ---------------------------------------------------------------------------

def _return_once(r: Region, phi: float, tol: Tolerance | None) -> float:
    """Lifted azimuth after going up the Plus family from the lower circle
    at ``phi`` and back down the Minus family."""
    start = lower_circle_start(r, phi)
    backward = not isinstance(r, DiamondRegion)
    up = integrate_leaf(r, start, tol, branch=Branch.PLUS)
    down = integrate_leaf(r, up.end, tol, branch=Branch.MINUS, backward=backward)
    return phi + up.delta_phi + down.delta_phi


class _ArclengthParam:
    """Normalised arclength ``sigma(phi)`` of the lower lightlike curve,
    from its trigonometric interpolant in ``phi``; ``sigma(phi) - phi`` is
    periodic so ``sigma`` lifts."""

    def __init__(self, events: np.ndarray):
        n = len(events)
        k = np.fft.rfftfreq(n, 1.0 / n)
        coef = np.fft.rfft(events, axis=0)
        deriv = np.fft.irfft(1j * k[:, None] * coef, n=n, axis=0)
        speed = np.linalg.norm(deriv, axis=1)
        sc = np.fft.rfft(speed) / n
        self.mean = float(np.real(sc[0]))
        self.k = k[1:]
        wts = np.full(len(self.k), 2.0)
        if n % 2 == 0:
            wts[-1] = 1.0
        # antiderivative of the oscillating part, zero at phi = 0
        self.c = wts * sc[1:] / (1j * self.k)
        self.c0 = -float(np.real(np.sum(self.c)))

    def __call__(self, phi: float) -> float:
        osc = float(np.real(np.dot(self.c, np.exp(1j * self.k * phi)))) + self.c0
        return (self.mean * phi + osc) * (1.0 / self.mean)

    def inverse(self, sigma: float) -> float:
        return find_root(lambda p: self(p) - sigma, sigma - math.pi, sigma + math.pi,
                         Tolerance(1e-15, 1e-15, 200))


def _traced_general(r: Region, n: int, tol: Tolerance | None, iterations: int,
                    check_parametrization: bool) -> RotationResult:
    phis = np.arange(n) * (TWO_PI / n)
    outs = np.array([_return_once(r, float(p), tol) for p in phis])
    tau = translation_number(CircleMap(phis, outs), iterations)
    delta = None
    if check_parametrization:
        surf = MeridianTorus(r)
        evs = np.array([surf.torus_point(float(p), 0.0).event for p in phis])
        sig = _ArclengthParam(evs)
        base = [sig.inverse(float(s)) for s in phis]
        outs2 = np.array([sig(_return_once(r, b, tol)) for b in base])
        tau2 = translation_number(CircleMap(phis, outs2), iterations)
        delta = float(abs(tau2 - tau))
    return _result(tau, Method.TRACED, n_base_points=n, param_delta=delta)


def rotation_angle_traced(r: Region, tol: Tolerance | None = None,
                          n_base_points: int | None = None,
                          iterations: int = BIRKHOFF_ITERATIONS,
                          check_parametrization: bool = True,
                          spread_tol: float = SPREAD_TOL) -> RotationResult:
    """Holonomy from the lower singular circle up the Plus family and back
    down the Minus family.

    Revolution regions and the diamond return every base point by the same
    angle; a spread above ``spread_tol`` raises
    :class:`InconsistentHolonomyError`. Other regions go through
    :func:`translation_number`, rechecked with an arclength parametrisation
    of the base circle unless ``check_parametrization`` is off.
    """
    if isinstance(r, (RevolutionRegion, DiamondRegion)):
        n = n_base_points or 8
        phis = np.arange(n) * (TWO_PI / n)
        totals = np.array([_return_once(r, float(p), tol) - p for p in phis])
        spread = float(totals.max() - totals.min())
        if spread > spread_tol:
            raise InconsistentHolonomyError(f"return angles spread by {spread:.3e}")
        return _result(float(np.mean(totals)), Method.TRACED, n_base_points=n, spread=spread)
    return _traced_general(r, n_base_points or 24, tol, iterations, check_parametrization)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

class Verdict(enum.Enum):
    DISTINGUISHED = "Distinguished"
    INDISTINGUISHABLE = "IndistinguishableByInvariant"


@dataclass(frozen=True)
class CompareVerdict:
    """``Distinguished`` proves the regions are not conformally equivalent;
    ``IndistinguishableByInvariant`` proves nothing."""
    verdict: Verdict
    angle_a: float
    angle_b: float
    distance: float
    tolerance: float = COMPARE_TOL

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "angle_a": self.angle_a,
                "angle_b": self.angle_b, "distance": self.distance,
                "tolerance": self.tolerance}


def circle_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


def invariant_distance(a: float, b: float) -> float:
    """Distance between ``{+a, -a}`` and ``{+b, -b}`` on the circle."""
    return min(circle_distance(a, b), circle_distance(a, -b))


def best_rotation(r: Region, tol: Tolerance | None = None,
                  n_base_points: int | None = None) -> RotationResult:
    if isinstance(r, RevolutionRegion):
        return rotation_angle_quadrature(r.profile, tol)
    return rotation_angle_traced(r, tol, n_base_points, check_parametrization=False)


def compare_regions(a: Region, b: Region, tol: float = COMPARE_TOL,
                    n_base_points: int | None = None) -> CompareVerdict:
    ra, rb = best_rotation(a, n_base_points=n_base_points), best_rotation(b, n_base_points=n_base_points)
    dist = invariant_distance(ra.reduced, rb.reduced)
    v = Verdict.DISTINGUISHED if dist > tol else Verdict.INDISTINGUISHABLE
    return CompareVerdict(v, ra.reduced, rb.reduced, dist, tol)
