"""Numerical kernels: adaptive Gauss-Kronrod quadrature, Dormand-Prince 5(4)
integration with event location and optional manifold projection, and a
Brent bracketed root finder.

Everything here is deterministic and free of shared mutable state.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BudgetError, NoBracketError, NonFiniteError, StiffError

__all__ = [
    "Tolerance",
    "OdeEvent",
    "EventRecord",
    "OdeSolution",
    "adaptive_quadrature",
    "ode_integrate",
    "find_root",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_steps: int = 100_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if int(self.max_steps) < 1:
            raise ValueError("max_steps must be >= 1")

    def scaled(self, factor: float) -> "Tolerance":
        return Tolerance(self.abs_tol * factor, self.rel_tol * factor, self.max_steps)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

# 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
# 7-point Gauss rule.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])  # ascending, 15 nodes
_WK_FULL = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes sit at odd indices of _XK (1, 3, 5, 7)
_WG_FULL = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    _WG_FULL[_i] = _w
    _WG_FULL[14 - _i] = _w
_WG_FULL[7] = _WG[3]


def _gk15(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    xs = c + h * _NODES
    vals = np.empty(15)
    for i, x in enumerate(xs):
        v = f(float(x))
        if not math.isfinite(v):
            raise NonFiniteError(f"integrand returned {v!r} at t={x!r}")
        vals[i] = v
    k = h * float(vals @ _WK_FULL)
    g = h * float(vals @ _WG_FULL)
    return k, abs(k - g)


def adaptive_quadrature(f: Callable[[float], float], a: float, b: float,
                        tol: Tolerance | None = None) -> float:
    """Integrate ``f`` over ``[a, b]`` with globally adaptive G7-K15 panels.

    The panel with the largest error estimate is bisected until the summed
    estimate drops below ``max(abs_tol, rel_tol*|I|)``. Panels only ever get
    bisected, so square-root behaviour at an endpoint is resolved by a
    geometric cascade of panels towards that endpoint.

    ``tol.max_steps`` bounds the number of bisections.
    """
    tol = tol or Tolerance(1e-12, 1e-12, 10_000)
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    k, e = _gk15(f, a, b)
    heap = [(-e, a, b, k)]
    total, err = k, e
    # panels too narrow to split further are retired with their estimate
    retired = []
    steps = 0
    while heap and err > max(tol.abs_tol, tol.rel_tol * abs(total)):
        if steps >= tol.max_steps:
            raise BudgetError(f"quadrature exceeded {tol.max_steps} subdivisions "
                              f"(estimate {total!r}, error {err!r})")
        neg_e, lo, hi, kv = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi) or (hi - lo) < 64 * _EPS * max(abs(lo), abs(hi), 1.0):
            retired.append(kv)
            err += neg_e
            continue
        k1, e1 = _gk15(f, lo, mid)
        k2, e2 = _gk15(f, mid, hi)
        total += k1 + k2 - kv
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
        steps += 1
    # re-sum to shed accumulated cancellation error
    total = math.fsum([item[3] for item in heap] + retired)
    return sign * total


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

def find_root(f: Callable[[float], float], lo: float, hi: float,
              tol: Tolerance | None = None) -> float:
    """Brent's method on a sign-changing bracket.

    Returns ``x`` with the final bracket no wider than ``abs_tol`` (plus the
    unavoidable ``4 eps |x|``). Raises :class:`NoBracketError` when
    ``f(lo)`` and ``f(hi)`` share a sign and neither is a root.
    """
    tol = tol or Tolerance(1e-14, 1e-14, 500)
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise NonFiniteError(f"non-finite bracket values f({a})={fa}, f({b})={fb}")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NoBracketError(f"f({a})={fa} and f({b})={fb} have the same sign")
    c, fc = a, fa
    d = e = b - a
    for _ in range(tol.max_steps):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        xtol = 2.0 * _EPS * abs(b) + 0.5 * tol.abs_tol
        m = 0.5 * (c - b)
        if abs(m) <= xtol or fb == 0.0:
            return b
        if abs(e) >= xtol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p, q = 2.0 * m * s, 1.0 - s
            else:
                q, r = fa / fc, fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(xtol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b += d if abs(d) > xtol else math.copysign(xtol, m)
        fb = f(b)
        if not math.isfinite(fb):
            raise NonFiniteError(f"f({b}) = {fb}")
    raise BudgetError(f"find_root exceeded {tol.max_steps} iterations")


# ---------------------------------------------------------------------------
# ODE integration
# ---------------------------------------------------------------------------

# Dormand-Prince 5(4), FSAL
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4

_DIRECTIONS = ("rising", "falling", "any")


@dataclass(frozen=True)
class OdeEvent:
    """Zero crossing of ``guard(t, y)``.

    ``direction`` is read along the direction of integration, so a
    ``"falling"`` event fires when the guard goes from positive to
    non-positive between consecutive accepted states, whichever way ``t``
    runs.
    """
    guard: Callable[[float, np.ndarray], float]
    direction: str = "any"
    terminal: bool = True
    name: str = ""

    def __post_init__(self):
        if self.direction not in _DIRECTIONS:
            raise ValueError(f"direction must be one of {_DIRECTIONS}")

    def crossed(self, g0: float, g1: float) -> bool:
        if self.direction == "rising":
            return g0 < 0.0 <= g1
        if self.direction == "falling":
            return g0 > 0.0 >= g1
        return (g0 < 0.0 <= g1) or (g0 > 0.0 >= g1)


@dataclass(frozen=True)
class EventRecord:
    index: int
    name: str
    t: float
    y: np.ndarray


@dataclass
class OdeSolution:
    """Accepted nodes plus cubic Hermite dense output between them."""
    ts: np.ndarray
    ys: np.ndarray
    fs: np.ndarray
    events: list[EventRecord] = field(default_factory=list)
    terminated: bool = False
    n_steps: int = 0
    n_rejected: int = 0

    @property
    def t_final(self) -> float:
        return float(self.ts[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.ys[-1]

    def __call__(self, t: float) -> np.ndarray:
        ts = self.ts
        forward = ts[-1] >= ts[0]
        key = ts if forward else -ts
        tk = t if forward else -t
        i = int(np.searchsorted(key, tk, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2) if len(ts) > 1 else 0
        if len(ts) == 1:
            return self.ys[0].copy()
        t0, t1 = ts[i], ts[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        y0, y1, f0, f1 = self.ys[i], self.ys[i + 1], self.fs[i], self.fs[i + 1]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def _check_finite(arr, what, t):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} is not finite at t={t!r}: {arr!r}")


def _dp_step(rhs, t, y, f0, h):
    """One Dormand-Prince step; returns (y5, f_new, err_vector)."""
    k = [f0]
    for i in range(1, 7):
        yi = y.copy()
        for j, aij in enumerate(_A[i]):
            if aij != 0.0:
                yi += (h * aij) * k[j]
        ki = np.asarray(rhs(t + _C[i] * h, yi), dtype=float)
        k.append(ki)
    # stage 7 evaluates at y5 (FSAL)
    y5 = y.copy()
    err = np.zeros_like(y)
    for j in range(7):
        if _B5[j] != 0.0:
            y5 += (h * _B5[j]) * k[j]
        if _E[j] != 0.0:
            err += (h * _E[j]) * k[j]
    return y5, k[6], err


def ode_integrate(rhs: Callable[[float, np.ndarray], Sequence[float]],
                  y0: Sequence[float], t0: float, t1: float,
                  events: Sequence[OdeEvent] = (),
                  tol: Tolerance | None = None,
                  projection: Callable[[float, np.ndarray], np.ndarray | None] | None = None,
                  first_step: float | None = None,
                  max_step: float | None = None) -> OdeSolution:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` (either direction).

    Step control is the PI controller of Hairer-Norsett-Wanner. Events are
    bracketed between accepted states and then located with Brent's method
    on fresh single Runge-Kutta steps from the left node, so the located
    state carries full fifth-order accuracy. A terminal event ends the
    integration at the event state.

    ``projection(t, y)`` is applied to every accepted state; returning
    ``None`` rejects the step and halves ``h``.
    """
    tol = tol or Tolerance(1e-10, 1e-10, 100_000)
    y = np.array(y0, dtype=float)
    t = float(t0)
    t1 = float(t1)
    direction = 1.0 if t1 >= t else -1.0
    span = abs(t1 - t)
    f = np.asarray(rhs(t, y), dtype=float)
    _check_finite(f, "rhs", t)
    ts, ys, fs = [t], [y.copy()], [f.copy()]
    sol = OdeSolution(np.array(ts), np.array(ys), np.array(fs))
    if span == 0.0:
        return sol
    max_step = abs(max_step) if max_step else span

    def scale(a, b):
        return tol.abs_tol + tol.rel_tol * np.maximum(np.abs(a), np.abs(b))

    if first_step is None:
        d0 = np.sqrt(np.mean((y / scale(y, y)) ** 2))
        d1 = np.sqrt(np.mean((f / scale(y, y)) ** 2))
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = min(h, max_step, span)
    else:
        h = min(abs(first_step), max_step, span)

    gvals = [float(ev.guard(t, y)) for ev in events]
    err_prev = 1e-4
    beta = 0.04
    alpha = 0.2 - 0.75 * beta
    n_acc = n_rej = 0
    records: list[EventRecord] = []
    terminated = False

    while (t1 - t) * direction > 0.0:
        if n_acc + n_rej >= tol.max_steps:
            raise BudgetError(f"ode_integrate exceeded {tol.max_steps} steps at t={t!r}")
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            raise StiffError(f"step size collapsed to {h!r} at t={t!r}")
        last = False
        if h >= abs(t1 - t):
            h = abs(t1 - t)
            last = True
        hs = direction * h
        y_new, f_new, err_vec = _dp_step(rhs, t, y, f, hs)
        _check_finite(y_new, "state", t + hs)
        err = float(np.sqrt(np.mean((err_vec / scale(y, y_new)) ** 2)))
        if err > 1.0:
            fac = max(0.2, 0.9 * err ** (-alpha))
            h *= fac
            n_rej += 1
            continue

        t_new = t1 if last else t + hs
        if projection is not None:
            yp = projection(t_new, y_new)
            if yp is None:
                h *= 0.5
                n_rej += 1
                continue
            if yp is not y_new:
                y_new = np.asarray(yp, dtype=float)
                f_new = np.asarray(rhs(t_new, y_new), dtype=float)
        _check_finite(f_new, "rhs", t_new)

        # event scan on the accepted step
        hit = None
        for i, ev in enumerate(events):
            g_new = float(ev.guard(t_new, y_new))
            if not math.isfinite(g_new):
                raise NonFiniteError(f"guard {ev.name or i} not finite at t={t_new!r}")
            if ev.crossed(gvals[i], g_new):
                te, ye = _locate_event(rhs, ev, t, y, f, t_new, tol, projection)
                if hit is None or (te - hit[1]) * direction < 0:
                    hit = (i, te, ye)
            gvals[i] = g_new
        if hit is not None:
            i, te, ye = hit
            records.append(EventRecord(i, events[i].name, te, ye))
            if events[i].terminal:
                fe = np.asarray(rhs(te, ye), dtype=float)
                ts.append(te)
                ys.append(ye.copy())
                fs.append(fe)
                n_acc += 1
                terminated = True
                break

        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())
        fs.append(f.copy())
        n_acc += 1
        if last:
            break
        fac = 0.9 * err ** (-alpha) * err_prev ** beta if err > 0 else 10.0
        fac = min(10.0, max(0.2, fac))
        err_prev = max(err, 1e-4)
        h = min(h * fac, max_step)

    return OdeSolution(np.array(ts), np.array(ys), np.array(fs), records,
                       terminated, n_acc, n_rej)


def _locate_event(rhs, ev, t, y, f, t_new, tol, projection):
    def state_at(tau):
        if tau == t:
            return y
        ys, _, _ = _dp_step(rhs, t, y, f, tau - t)
        if projection is not None:
            yp = projection(tau, ys)
            if yp is not None:
                ys = np.asarray(yp, dtype=float)
        return ys

    def g(tau):
        return float(ev.guard(tau, state_at(tau)))

    lo, hi = (t, t_new)
    glo, ghi = g(lo), g(hi)
    if (glo > 0) == (ghi > 0) and glo != 0.0 and ghi != 0.0:
        # single-step re-evaluation disagrees with the accepted state at the
        # endpoint only through round-off; fall back to the accepted node
        return t_new, state_at(t_new)
    te = find_root(g, lo, hi, Tolerance(tol.abs_tol, tol.rel_tol, 200))
    return te, state_at(te)
