"""Region spec files (JSON).

::

    {"kind": "ellipsoid", "a": 1.0, "b": 1.0}
    {"kind": "revolution", "rho_poly": [c0, c1, ...], "t_min": ..., "t_max": ...}
    {"kind": "diamond"}
    {"kind": "transformed", "base": {...}, "boost": {"rapidity": chi, "axis": [ux, uy]},
     "translate": [dt, dx, dy], "dilate": s}

In a ``transformed`` spec the boost acts first, then the dilation (a
positive scale factor about the origin), then the translation; each part is
optional. Structural problems raise :class:`SpecError`; well-formed specs
describing an invalid region raise the region's own errors.
"""

from __future__ import annotations

import json
import math
from numbers import Real
from pathlib import Path

from .errors import NullContactError, RegionError
from .geometry import ConformalMap, Dilation, Event, Translation, boost
from .regions import (DiamondRegion, Region, ellipsoid, make_revolution,
                      polynomial, transform)


class SpecError(NullContactError, ValueError):
    """The spec is not valid JSON or does not have the expected shape."""


def _num(obj: dict, key: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise SpecError(f"missing field {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, Real) or not math.isfinite(v):
        raise SpecError(f"field {key!r} must be a finite number, got {v!r}")
    return float(v)


def _vec(obj: dict, key: str, n: int) -> list[float]:
    v = obj[key]
    if not isinstance(v, list) or len(v) != n:
        raise SpecError(f"field {key!r} must be a list of {n} numbers")
    return [_num({"x": x}, "x") for x in v]


def parse_region(obj) -> Region:
    if not isinstance(obj, dict):
        raise SpecError("region spec must be a JSON object")
    kind = obj.get("kind")
    if kind == "ellipsoid":
        return make_revolution(ellipsoid(_num(obj, "a"), _num(obj, "b")))
    if kind == "revolution":
        if "rho_poly" not in obj:
            raise SpecError("missing field 'rho_poly'")
        coeffs = _vec(obj, "rho_poly", len(obj["rho_poly"]) if isinstance(obj["rho_poly"], list) else -1)
        if len(coeffs) < 2:
            raise SpecError("rho_poly needs at least two coefficients")
        t_min = _num(obj, "t_min") if "t_min" in obj else None
        t_max = _num(obj, "t_max") if "t_max" in obj else None
        return make_revolution(polynomial(coeffs, t_min, t_max))
    if kind == "diamond":
        return DiamondRegion()
    if kind == "transformed":
        if "base" not in obj:
            raise SpecError("missing field 'base'")
        base = parse_region(obj["base"])
        if isinstance(base, DiamondRegion):
            raise RegionError("conformal images of the diamond are not supported")
        factors = []
        if "boost" in obj:
            b = obj["boost"]
            if not isinstance(b, dict):
                raise SpecError("field 'boost' must be an object")
            axis = _vec(b, "axis", 2) if "axis" in b else [1.0, 0.0]
            factors.append(boost(_num(b, "rapidity"), axis))
        if "dilate" in obj:
            factors.append(Dilation(_num(obj, "dilate")))
        if "translate" in obj:
            factors.append(Translation(Event(*_vec(obj, "translate", 3))))
        return transform(base, ConformalMap(tuple(factors)))
    raise SpecError(f"unknown region kind {kind!r}")


def load_region(path: str | Path) -> tuple[Region, dict]:
    """Read and parse a spec file; returns the region and the raw spec."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: malformed JSON ({exc})") from exc
    return parse_region(obj), obj
