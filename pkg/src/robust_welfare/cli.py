"""Command-line front end.

    robust-welfare bounds   scenario.json [--out report.json]
    robust-welfare verify   scenario.json [--samples N --seed S --grid N --self-test]
    robust-welfare curves   scenario.json [--resolution N] [--out curves.csv]
    robust-welfare mc       scenario.json [--resolution N] [--out mc.csv]

Exit codes: 0 success, 2 infeasible or invalid scenario, 3 verification
violations, 1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import __version__, kernels
from .demand_shape import Support, high_set_length
from .errors import (
    DomainError,
    FlatDemand,
    InfeasibleScenario,
    InfeasibleShape,
    SchemaError,
    SignConventionViolated,
    WelfareBoundsError,
    ZeroQuantity,
)
from .oracle import SampleConfig, check_attainability, path_grid_for, verify_containment
from .scenario import load_scenario, scenario_to_dict
from .supply_path import AdValoremPath
from .welfare_engine import (
    four_corner_bounds,
    implied_marginal_cost,
    lerner_index_at,
    welfare_at_corner,
)

EXIT_OK, EXIT_INTERNAL, EXIT_INFEASIBLE, EXIT_VIOLATION = 0, 1, 2, 3
_INFEASIBLE = (SchemaError, SignConventionViolated, InfeasibleScenario, InfeasibleShape, DomainError)


def _corner_record(corner, change) -> dict:
    rec = corner.descriptor()
    t = corner.demand.transform
    rec["block_prices"] = [[float(t.price_inverse(a)), float(t.price_inverse(b))]
                           for a, b in corner.blocks]
    bd = welfare_at_corner(corner, change)
    keys = ("j1", "j2") if isinstance(corner.path, AdValoremPath) else ("i1", "i2")
    rec[keys[0]], rec[keys[1]] = bd.i1, bd.i2
    return rec


def bounds_report(scenario, bounds=None) -> dict:
    """Plain-data report of the bounds and the corners attaining them."""
    bounds = bounds or four_corner_bounds(scenario)
    support = Support.from_change(scenario.change, scenario.shape.transform)
    per_object = {}
    for name, ob in bounds.objects.items():
        per_object[name] = {
            "lower": ob.lower,
            "upper": ob.upper,
            "lower_corner": None if ob.lower_corner is None else _corner_record(ob.lower_corner, scenario.change),
            "upper_corner": None if ob.upper_corner is None else _corner_record(ob.upper_corner, scenario.change),
        }
    return {
        "format_version": 1,
        "tool": {"name": "robust-welfare", "version": __version__, "kernels": kernels.BACKEND},
        "settings": {
            "placement": scenario.placement,
            "quadrature_rel_tol": scenario.quadrature.rel_tol,
            "quadrature_abs_tol": scenario.quadrature.abs_tol,
        },
        "scenario": scenario_to_dict(scenario),
        "feasibility": {
            "path_feasible": True,
            "shape_feasible": True,
            "near_degenerate": bounds.near_degenerate,
            "high_set_length": high_set_length(scenario.shape.band, support),
            "warnings": list(bounds.warnings),
        },
        "cutoffs": {"scale": "log_price" if scenario.mode == "ad_valorem" else "price", **bounds.cutoffs},
        "bounds": per_object,
        "unavailable": [] if scenario.mode == "specific" else ["TR", "TS", "DWL"],
    }


def verification_report(rep, attain_failures) -> dict:
    return {
        "format_version": 1,
        "n_checked": rep.n_checked,
        "n_violations": rep.n_violations,
        "violations": [v.__dict__ for v in rep.violations],
        "max_attained_gap": {k: {"upper": u, "lower": lo} for k, (u, lo) in rep.max_attained_gap.items()},
        "attainability_failures": [
            {"object": o, "end": e, "reported": r, "recomputed": c} for o, e, r, c in attain_failures
        ],
        "self_test": rep.self_test,
        "grid_cells": rep.grid_cells,
        "kernels": rep.backend,
        "runtime_seconds": rep.runtime,
        "passed": rep.passed and not attain_failures,
    }


def _corner_rows(bounds):
    for name, ob in bounds.objects.items():
        for end, corner in (("lower", ob.lower_corner), ("upper", ob.upper_corner)):
            if corner is not None:
                yield name, end, corner


def _fmt(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.17g}"


def curve_table(scenario, resolution: int, bounds=None) -> str:
    """CSV of price, quantity, path weight and tax level along each attaining corner."""
    bounds = bounds or four_corner_bounds(scenario)
    ch = scenario.change
    ad_valorem = scenario.mode == "ad_valorem"
    prices = np.linspace(ch.pre.price, ch.post.price, resolution)
    prices[0], prices[-1] = ch.pre.price, ch.post.price
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object", "end", "path_branch", "demand_direction", "kappa", "p", "Q",
                 "w" if ad_valorem else "u", "xi" if ad_valorem else "tau"])
    for name, end, c in _corner_rows(bounds):
        q = c.demand.eval(prices)
        for p, qq in zip(prices, q):
            if ad_valorem:
                x = min(max(math.log(p), c.path.x_lo), c.path.x_hi)
                weight, level = c.path.weight_at_x(x), c.path.xi_at_x(x, ch.xi_pre)
            else:
                weight, level = c.path.weight_at(p), c.path.tau_at(p)
            w.writerow([name, end, c.path_branch.value, c.demand_direction.value, _fmt(c.kappa),
                        _fmt(float(p)), _fmt(float(qq)), _fmt(weight), _fmt(level)])
    return buf.getvalue()


def mc_table(scenario, resolution: int, bounds=None) -> str:
    """CSV of quantity, corner-implied marginal cost and Lerner index."""
    if scenario.mode == "ad_valorem":
        raise InfeasibleScenario("marginal-cost back-out is only defined for a specific tax")
    bounds = bounds or four_corner_bounds(scenario)
    ch = scenario.change
    prices = np.linspace(ch.pre.price, ch.post.price, resolution)
    prices[0], prices[-1] = ch.pre.price, ch.post.price
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["object", "end", "path_branch", "demand_direction", "kappa", "p", "Q", "MC", "lerner"])
    for name, end, c in _corner_rows(bounds):
        for p in prices:
            p = float(p)
            q = c.demand.eval(p)
            try:
                mc = implied_marginal_cost(c.demand, c.path, c.kappa, p, ch)
                lerner = lerner_index_at(c.demand, c.kappa, p)
            except (ZeroQuantity, FlatDemand, WelfareBoundsError):
                mc = lerner = math.nan
            w.writerow([name, end, c.path_branch.value, c.demand_direction.value, _fmt(c.kappa),
                        _fmt(p), _fmt(q), _fmt(mc), _fmt(lerner)])
    return buf.getvalue()


def _write(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robust-welfare",
        description="Sharp welfare bounds from two market snapshots around a tax change.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario file (JSON)")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--tol", type=float, help="relative quadrature tolerance override")
        p.add_argument("--placement", choices=("optimal", "remark"),
                       help="extremal demand placement rule (default from scenario)")

    common(sub.add_parser("bounds", help="compute welfare bounds"))
    v = sub.add_parser("verify", help="check bounds against oracle samples")
    common(v)
    v.add_argument("--samples", type=int, help="number of samples")
    v.add_argument("--seed", type=int, help="random seed")
    v.add_argument("--grid", type=int, help="cells in the sampling grid")
    v.add_argument("--self-test", action="store_true",
                   help="narrow every bound by 1%% of its width; violations are expected")
    for name, helptext in (("curves", "export demand and path along each corner"),
                           ("mc", "export corner-implied marginal cost")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--resolution", type=int, default=101, help="points per corner")
    return parser


def run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.tol is not None:
        if not args.tol > 0:
            raise SchemaError([("--tol", "must be strictly positive")])
        scenario = replace(scenario, quadrature=replace(scenario.quadrature, rel_tol=args.tol))
    if args.placement:
        scenario = replace(scenario, placement=args.placement)

    if args.command == "bounds":
        _write(json.dumps(bounds_report(scenario), indent=2), args.out)
        return EXIT_OK
    if args.command == "verify":
        o = scenario.oracle
        samples = args.samples if args.samples is not None else o.samples
        grid = args.grid if args.grid is not None else o.grid
        seed = args.seed if args.seed is not None else o.seed
        cfg = SampleConfig(samples, seed, path_grid_for(scenario, grid))
        bounds = four_corner_bounds(scenario)
        rep = verify_containment(scenario, cfg, bounds, self_test=args.self_test)
        quad = replace(scenario.quadrature, rel_tol=min(scenario.quadrature.rel_tol, 1e-13),
                       abs_tol=min(scenario.quadrature.abs_tol, 1e-13))
        failures = check_attainability(scenario, bounds, quad=quad)
        doc = verification_report(rep, failures)
        _write(json.dumps(doc, indent=2), args.out)
        return EXIT_OK if doc["passed"] else EXIT_VIOLATION
    if args.resolution < 2:
        raise SchemaError([("--resolution", "must be at least 2")])
    table = curve_table if args.command == "curves" else mc_table
    _write(table(scenario, args.resolution), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except _INFEASIBLE as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BrokenPipeError:  # reader closed early, e.g. piped into head
        sys.stderr.close()
        return EXIT_OK
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
