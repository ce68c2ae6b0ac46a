"""Command-line front end.

Every command prints a JSON envelope (command echo, normalized inputs, results,
provenance). ``scan --csv`` prints the diagnostic rows as CSV instead.

Exit codes: 0 success, 2 usage error, 3 infeasible recipe, 4 resource cap.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .allocator import RECIPES, allocate
from .core import TOL, CoefficientSet, Constant, GridSpec, ProductWeights, grid_points, parse_weights, work_cap
from .errors import CertificationError, InfeasibleRecipeError, ResourceCapError
from .griddisc import (
    lower_bound_coord,
    star_disc_grid,
    weighted_disc_upper_bound,
    weighted_star_disc_grid,
)
from .oracle import read_points, star_disc_exact, weighted_star_disc_exact
from .tractability import SOURCES, classify, diagnostic, parse_schedule, rows_to_csv

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_RESOURCE, EXIT_FAILED = 0, 2, 3, 4, 1


class UsageError(ValueError):
    pass


def _ints(text: str) -> tuple[int, ...]:
    out = []
    for tok in text.split(","):
        try:
            out.append(int(tok))
        except ValueError:
            raise UsageError(f"bad mesh-size list {text!r}: offending token {tok!r}") from None
    return tuple(out)


def _clean(obj):
    """Replace non-finite floats by None and numpy scalars by Python numbers."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def envelope(command: str, argv, inputs: dict, results: dict, tol: float) -> dict:
    return _clean({
        "command": command,
        "argv": list(argv),
        "inputs": inputs,
        "results": results,
        "provenance": {
            "version": __version__,
            "tol": tol,
            "work_cap": work_cap(),
            "comparison": "value <= eps + tol",
        },
    })


def _weights_arg(text):
    return parse_weights(text) if text else Constant(1.0)


def cmd_disc(args) -> dict:
    g = GridSpec(_ints(args.m))
    base = _weights_arg(args.weights)
    w = ProductWeights(base)
    val = weighted_star_disc_grid(g, w)
    up = weighted_disc_upper_bound(g, w)
    return {
        "inputs": {"m": list(g.m), "weights": base.spec},
        "results": {
            "value": val.value,
            "witness": list(val.witness),
            "star_discrepancy": star_disc_grid(g),
            "upper_bound": up.value,
            "upper_bound_witness": list(up.witness),
            "lower_bounds": [lower_bound_coord(g, w, ell) for ell in range(1, g.d + 1)],
            "N": g.n,
        },
    }


def _coefficients(spec: str | None, n: int, column):
    if column is not None and spec in (None, "column"):
        return column
    if spec in (None, "qmc"):
        return CoefficientSet.equal(n)
    try:
        vals = [float(t) for t in spec.split(",")]
    except ValueError:
        raise UsageError(f"bad coefficient list {spec!r}") from None
    if len(vals) == 1:
        vals = vals * n
    if len(vals) != n:
        raise UsageError(f"{len(vals)} coefficients for {n} points")
    return CoefficientSet(np.array(vals))


def cmd_oracle(args) -> dict:
    inputs = {}
    if (args.grid is None) == (args.points is None):
        raise UsageError("give exactly one of --grid or --points")
    if args.grid is not None:
        g = GridSpec(_ints(args.grid), "left" if args.left else "centered")
        p = grid_points(g)
        column = None
        inputs.update(grid=list(g.m), anchored=g.anchored)
    else:
        g = None
        p, column = read_points(args.points, coefficient_column=args.coeffs == "column")
        inputs.update(points=args.points, n=p.n, d=p.d)
    a = _coefficients(args.coeffs, p.n, column)
    inputs["coefficients"] = "qmc" if a.is_qmc() else [float(c) for c in a.coefficients]
    results = {}
    if args.weights:
        base = parse_weights(args.weights)
        inputs["weights"] = base.spec
        res = weighted_star_disc_exact(p, a, ProductWeights(base))
        results.update(value=res.value, witness=list(res.witness))
        if g is not None and g.centered and a.is_qmc():
            closed = weighted_star_disc_grid(g, ProductWeights(base)).value
            results.update(closed_form=closed, delta=res.value - closed)
    else:
        results["value"] = star_disc_exact(p, a)
        if g is not None and g.centered and a.is_qmc():
            closed = star_disc_grid(g)
            results.update(closed_form=closed, delta=results["value"] - closed)
    return {"inputs": inputs, "results": results}


def cmd_allocate(args) -> dict:
    base = parse_weights(args.weights)
    out = allocate(args.recipe, base, args.eps, args.d, tol=args.tol)
    return {
        "inputs": {"weights": base.spec, "eps": args.eps, "d": args.d, "recipe": args.recipe},
        "results": out.to_dict(),
    }


def cmd_classify(args) -> dict:
    base = parse_weights(args.weights)
    c = classify(base)
    return {
        "inputs": {"weights": base.spec},
        "results": {"label": c.label, "certificate": c.certificate},
    }


def cmd_scan(args) -> dict:
    base = parse_weights(args.weights)
    sched = parse_schedule(args.schedule)
    rows = diagnostic(base, sched, args.source, tol=args.tol, jobs=args.jobs)
    c = classify(base)
    return {
        "inputs": {
            "weights": base.spec,
            "schedule": args.schedule,
            "source": args.source,
        },
        "results": {
            "label": c.label,
            "certificate": c.certificate,
            "rows": [r.to_dict() for r in rows],
        },
        "_rows": rows,
    }


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=TOL, help="slack for <= budget tests")
    common.add_argument("--out", help="write output to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="gridtract", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("disc", parents=[common], help="closed-form discrepancy of a centered grid")
    p.add_argument("--m", required=True, help="mesh-sizes, e.g. 2,3")
    p.add_argument("--weights", help="weight spec, e.g. poly:alpha=2 (default: unweighted)")

    p = sub.add_parser("oracle", parents=[common], help="brute-force discrepancy")
    p.add_argument("--grid", help="mesh-sizes of a regular grid")
    p.add_argument("--left", action="store_true", help="left-anchored grid points l/m")
    p.add_argument("--points", help="points file, one point per line")
    p.add_argument("--coeffs", help="'qmc' (default), 'column', one value, or a comma list")
    p.add_argument("--weights", help="weight spec for the weighted discrepancy")

    p = sub.add_parser("allocate", parents=[common], help="mesh-size allocation under a budget")
    p.add_argument("--weights", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--recipe", choices=RECIPES, default="greedy")

    p = sub.add_parser("classify", parents=[common], help="tractability regime of a weight family")
    p.add_argument("--weights", required=True)

    p = sub.add_parser("scan", parents=[common], help="log N diagnostics along a schedule")
    p.add_argument("--weights", required=True)
    p.add_argument("--schedule", required=True, help="e.g. eta=2,dmax=8,norm=wt")
    p.add_argument("--source", choices=SOURCES, default="recipe")
    p.add_argument("--csv", action="store_true", help="emit CSV rows instead of JSON")
    p.add_argument("--jobs", type=int, default=1)
    return parser


COMMANDS = {
    "disc": cmd_disc,
    "oracle": cmd_oracle,
    "allocate": cmd_allocate,
    "classify": cmd_classify,
    "scan": cmd_scan,
}


def _emit(text: str, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        res = COMMANDS[args.command](args)
    except InfeasibleRecipeError as exc:
        print(f"infeasible recipe: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ResourceCapError as exc:
        extra = f" (estimated work {exc.estimated_work:.3g})" if exc.estimated_work else ""
        print(f"resource cap: {exc}{extra}", file=sys.stderr)
        return EXIT_RESOURCE
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ValueError, NotImplementedError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    rows = res.pop("_rows", None)
    if rows is not None and args.csv:
        _emit(rows_to_csv(rows), args.out)
        return EXIT_OK
    env = envelope(args.command, argv, res["inputs"], res["results"], args.tol)
    _emit(json.dumps(env, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
