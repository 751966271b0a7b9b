"""Command-line front end.

Exit codes: 0 success (for ``compare``: Distinguished), 1 ``compare``
verdict IndistinguishableByInvariant, 2 unparseable spec or arguments,
3 region validation failure, 4 methods disagree or another numerical
defect, 5 selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from numbers import Integral, Real
from typing import Sequence

import numpy as np

from . import __version__
from .boundary import (BoundaryClass, check_strong_null_convexity,
                       classify_boundary_point, lightlike_latitudes,
                       sample_boundary)
from .errors import (GeometryError, NullContactError, RegionError)
from .foliation import (Branch, boundary_torus, dividing_set, integrate_leaf,
                        lower_circle_start, singular_set, axis_point)
from .invariants import (compare_regions, invariant_distance,
                         rotation_angle_quadrature, rotation_angle_traced)
from .numerics import Tolerance
from .regionspec import SpecError, load_region
from .regions import DiamondRegion, RevolutionRegion

EXIT_OK = 0
EXIT_INDISTINGUISHABLE = 1
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_DISAGREE = 4
EXIT_SELFTEST = 5

LEAF_COLUMNS = ("leaf_id", "t", "phi", "branch", "q1", "q2", "theta", "time_T")
TORUS_COLUMNS = ("t", "phi", "branch", "q1", "q2", "theta", "time_T")
DIVIDING_COLUMNS = ("component_id", "t", "phi", "q1", "q2", "theta")
CLASSIFY_COLUMNS = ("t", "phi", "class", "n_null_dirs")


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def to_json(obj) -> str:
    """JSON with every float printed to 17 significant digits; non-finite
    floats become ``null``."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, Integral):
        return str(int(obj))
    if isinstance(obj, Real):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if hasattr(obj, "value"):
        return json.dumps(obj.value)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv_text(columns: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, Real) and not isinstance(v, (bool, Integral))
                    else v for v in row])
    return buf.getvalue()


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _document(args, result, specs) -> str:
    header = {"command": args.command, "version": __version__, "regions": specs}
    return to_json({"header": header, "result": result}) + "\n"


def _tol(args) -> Tolerance:
    return Tolerance(args.tol_abs, args.tol_rel, 200_000)


def _regions(args, n: int):
    if not args.region or len(args.region) != n:
        raise _Fail(EXIT_PARSE, f"{args.command} needs exactly {n} --region argument(s)")
    return [load_region(p) for p in args.region]


def _smooth(r, what: str):
    if isinstance(r, DiamondRegion):
        raise _Fail(EXIT_INVALID, f"{what}: the diamond has no smooth boundary; "
                                  "it is an analytic-only region")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    (r, spec), = _regions(args, 1)
    _smooth(r, "classify")
    n = args.samples or 41
    rows = []
    latitudes = None
    if isinstance(r, RevolutionRegion):
        latitudes = list(lightlike_latitudes(r.profile))
        ts = sorted(set(np.linspace(r.profile.t_min, r.profile.t_max, n).tolist()) | set(latitudes))
        n_phi = max(8, n // 4)
        events = []
        for t in ts:
            rad = r.radius(t)
            for k in range(n_phi):
                ph = 2 * math.pi * k / n_phi
                events.append(((t, rad * math.cos(ph), rad * math.sin(ph)), ph))
    else:
        ax = axis_point(r)
        events = [(p, math.atan2(p[2] - ax[1], p[1] - ax[0]) % (2 * math.pi))
                  for p in sample_boundary(r, n, max(8, n // 4))]
    counts = {c.value: 0 for c in BoundaryClass}
    for p, ph in events:
        bp = classify_boundary_point(r, p)
        counts[bp.causal_class.value] += 1
        rows.append((p[0], ph, bp.causal_class.value, len(bp.null_dirs)))
    if args.format == "json":
        res = {"latitudes": latitudes, "counts": counts,
               "rows": [dict(zip(CLASSIFY_COLUMNS, row)) for row in rows]}
        _emit(_document(args, res, [spec]), args.out)
    else:
        _emit(_csv_text(CLASSIFY_COLUMNS, rows), args.out)
    return EXIT_OK


def cmd_check_convexity(args) -> int:
    (r, spec), = _regions(args, 1)
    _smooth(r, "check-convexity")
    n = args.samples or 41
    rep = check_strong_null_convexity(r, n_lat=n | 1, n_phi=max(8, n // 2))
    _emit(_document(args, rep.to_dict(), [spec]), args.out)
    if not rep.passed:
        failed = [k for k, ok in (("hessian", rep.hessian_min_abs > rep.hessian_threshold),
                                  ("unique_tangency", rep.unique_tangency_ok),
                                  ("chord_connectivity", rep.chord_connected_ok)) if not ok]
        print(f"region is not strongly null convex: failed {', '.join(failed)}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_foliation(args) -> int:
    (r, spec), = _regions(args, 1)
    n = args.samples or 8
    tol = _tol(args)
    leaves = []
    for k in range(n):
        start = lower_circle_start(r, 2 * math.pi * k / n)
        up = integrate_leaf(r, start, tol, branch=Branch.PLUS)
        down = integrate_leaf(r, up.end, tol, branch=Branch.MINUS,
                              backward=not isinstance(r, DiamondRegion))
        leaves += [up, down]
    rows = []
    for i, leaf in enumerate(leaves):
        for p in leaf.points:
            rows.append((i, p.t, p.phi, p.branch.value if p.branch else "Merged",
                         p.chart.q1, p.chart.q2, p.chart.theta, p.time_T))
    sing = singular_set(r, n_phi=max(8, n))
    if args.torus:
        tor = boundary_torus(r, n_s=max(8, n), n_phi=max(8, n))
        with open(args.torus, "w", newline="") as fh:
            fh.write(_csv_text(TORUS_COLUMNS, tor.rows()))
    if args.format == "json":
        res = {"leaves": [{"leaf_id": i, "branch": lf.branch.value, "terminal": lf.terminal.value,
                           "delta_phi": lf.delta_phi,
                           "points": [dict(zip(LEAF_COLUMNS[1:], row[1:])) for row in rows if row[0] == i]}
                          for i, lf in enumerate(leaves)],
               "singular_set": {"method": sing.method, "mismatch": sing.mismatch,
                                "lower": [list(p.chart) for p in sing.lower],
                                "upper": [list(p.chart) for p in sing.upper]}}
        _emit(_document(args, res, [spec]), args.out)
    else:
        _emit(_csv_text(LEAF_COLUMNS, rows), args.out)
    return EXIT_OK


def cmd_dividing(args) -> int:
    (r, spec), = _regions(args, 1)
    _smooth(r, "dividing")
    center = tuple(args.center) if args.center else tuple(r.center)
    n = args.samples or 32
    ds = dividing_set(r, center, n_phi=n)
    if args.format == "json":
        res = {"center": list(center), "count": ds.count, "latitudes": ds.latitudes,
               "report": ds.report.to_dict(),
               "components": [[list(p.chart) + [p.t, p.phi] for p in comp]
                              for comp in ds.component_points]}
        _emit(_document(args, res, [spec]), args.out)
    else:
        rows = [(k, p.t, p.phi, p.chart.q1, p.chart.q2, p.chart.theta)
                for k, comp in enumerate(ds.component_points) for p in comp]
        _emit(_csv_text(DIVIDING_COLUMNS, rows), args.out)
        print(to_json({"count": ds.count, "report": ds.report.to_dict()}), file=sys.stderr)
    if not ds.report.ok:
        print("dividing set checks failed", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_rotation(args) -> int:
    (r, spec), = _regions(args, 1)
    method = args.method or ("both" if isinstance(r, RevolutionRegion) else "trace")
    if method in ("quadrature", "both") and not isinstance(r, RevolutionRegion):
        raise _Fail(EXIT_INVALID, "quadrature needs a region of revolution; use --method trace")
    tol = _tol(args)
    res = {"method": method}
    quad = trace = None
    if method in ("quadrature", "both"):
        quad = rotation_angle_quadrature(r.profile, tol)
    if method in ("trace", "both"):
        trace = rotation_angle_traced(r, tol, args.samples)
    if method == "both":
        res.update({"quadrature": quad.to_dict(), "traced": trace.to_dict(),
                    "delta": abs(quad.total_angle - trace.total_angle)})
    else:
        res.update((quad or trace).to_dict())
        res["method"] = method
    _emit(_document(args, res, [spec]), args.out)
    if method == "both" and not res["delta"] <= args.tol_agree:
        print(f"quadrature and traced angles disagree by {res['delta']:.3e}", file=sys.stderr)
        return EXIT_DISAGREE
    if trace is not None and trace.param_delta is not None and not trace.param_delta <= args.tol_agree:
        print(f"rotation number depends on the parametrisation ({trace.param_delta:.3e})",
              file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


def cmd_compare(args) -> int:
    (a, sa), (b, sb) = _regions(args, 2)
    v = compare_regions(a, b, args.tol_compare, args.samples)
    _emit(_document(args, v.to_dict(), [sa, sb]), args.out)
    return EXIT_OK if v.verdict.value == "Distinguished" else EXIT_INDISTINGUISHABLE


def cmd_selftest(args) -> int:
    from .selftest import format_table, run_selftest
    results = run_selftest(quick=args.quick, tol_trace=args.tol_trace)
    if args.format == "json":
        _emit(to_json({"header": {"command": "selftest", "version": __version__, "quick": args.quick},
                       "result": [c.to_dict() for c in results]}) + "\n", args.out)
    else:
        _emit(format_table(results), args.out)
    return EXIT_OK if all(c.passed for c in results) else EXIT_SELFTEST


COMMANDS = {
    "classify": cmd_classify,
    "check-convexity": cmd_check_convexity,
    "foliation": cmd_foliation,
    "dividing": cmd_dividing,
    "rotation": cmd_rotation,
    "compare": cmd_compare,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _positive(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {s}")
    return v


def _count(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}")
    if v < 8:
        raise argparse.ArgumentTypeError(f"sample counts must be >= 8, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nullcontact",
        description="Boundary tori of regions in 2+1 Minkowski space, their "
                    "characteristic foliations and rotation-angle invariants.",
        epilog="Region specs are JSON files; see the README for the format.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "classify": "causal type of boundary points; CSV columns t, phi, class, n_null_dirs",
        "check-convexity": "sampled strong null convexity certificate (JSON)",
        "foliation": "leaves of the characteristic foliation; CSV columns leaf_id, t, phi, "
                     "branch, q1, q2, theta, time_T (--torus adds t, phi, branch, q1, q2, "
                     "theta, time_T)",
        "dividing": "dividing set of the dilation field; CSV columns component_id, t, phi, "
                    "q1, q2, theta",
        "rotation": "rotation angle of the singular-circle return map (JSON)",
        "compare": "compare the invariants of two regions (JSON); exit 0 Distinguished, "
                   "1 IndistinguishableByInvariant",
        "selftest": "run the analytic oracle suite",
    }
    for name, hlp in helps.items():
        sp = sub.add_parser(name, help=hlp, description=hlp)
        if name != "selftest":
            sp.add_argument("--region", action="append", metavar="PATH",
                            help="region spec file (give twice for compare)")
            sp.add_argument("--samples", type=_count, default=None,
                            help="sample count (grid size or base points, >= 8)")
            sp.add_argument("--tol-abs", type=_positive, default=1e-12,
                            help="absolute integration tolerance (default 1e-12)")
            sp.add_argument("--tol-rel", type=_positive, default=1e-12,
                            help="relative integration tolerance (default 1e-12)")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        if name == "selftest":
            sp.add_argument("--format", choices=("text", "json"), default="text",
                            help="output format")
        else:
            sp.add_argument("--format", choices=("csv", "json"),
                            default="json" if name in ("check-convexity", "rotation", "compare")
                            else "csv", help="output format")
        if name == "rotation":
            sp.add_argument("--method", choices=("quadrature", "trace", "both"))
            sp.add_argument("--tol-agree", type=_positive, default=1e-4,
                            help="allowed quadrature/trace difference (default 1e-4)")
        if name == "compare":
            sp.add_argument("--tol-compare", type=_positive, default=1e-3,
                            help="circle distance above which regions are distinguished")
        if name == "foliation":
            sp.add_argument("--torus", metavar="PATH", help="also write the sampled torus CSV")
        if name == "dividing":
            sp.add_argument("--center", type=float, nargs=3, metavar=("T", "X", "Y"),
                            help="dilation centre (default: the region centre)")
        if name == "selftest":
            sp.add_argument("--quick", action="store_true", help="fast subset (< 10 s)")
            sp.add_argument("--tol-trace", type=_positive, default=None,
                            help="override the traced-method tolerance")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (RegionError, GeometryError) as exc:
        print(f"error: invalid region: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NullContactError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DISAGREE


if __name__ == "__main__":
    sys.exit(main())
