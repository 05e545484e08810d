"""Welfare objects at extremal corners and the bounds built from them.

Each welfare change is an affine functional of the demand curve once the
supply path and conduct are fixed. The path enters only through
``int Q u dp``, whose extremes over admissible paths are the two bang-bang
branches for every nonincreasing demand, and conduct enters linearly, so a
bound is the best value over ``{Max, Min} x {kappa_lo, kappa_hi}`` of the
demand-optimised functional.  All candidates are evaluated; ties go to the
first candidate in the fixed order Max before Min, low conduct before high.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .demand_shape import (
    Direction,
    ExtremalDemandCurve,
    PhiProfile,
    SignClass,
    Support,
    WelfareObject,
    ad_valorem_phi,
    build_extremal,
    phi_coefficients,
)
from .errors import FlatDemand, ZeroElasticity, ZeroQuantity
from .model import AdValoremChange, PolicyChange, delta_tr
from .quadrature import QuadratureSettings, integrate
from .supply_path import (
    AdValoremPath,
    ExtremalPath,
    PathBranch,
    ad_valorem_building_blocks,
    ad_valorem_cutoff,
    building_blocks,
    extremal_cutoff,
)

OBJECTS = ("CS", "PS", "TR", "TS_priv", "TS", "DWL")
AD_VALOREM_OBJECTS = ("CS", "PS", "TS_priv")

# Settings for re-evaluating corners by generic quadrature.
GENERIC_QUAD = QuadratureSettings(rel_tol=1e-13, abs_tol=1e-13, max_depth=40)


@dataclass(frozen=True)
class Corner:
    """One candidate extremum: a path branch, demand direction and conduct."""

    path_branch: PathBranch
    demand_direction: Direction
    kappa: float
    demand: ExtremalDemandCurve
    path: Union[ExtremalPath, AdValoremPath]

    @property
    def blocks(self) -> tuple[tuple[float, float], ...]:
        return self.demand.blocks

    @property
    def cutoff(self) -> float:
        if isinstance(self.path, AdValoremPath):
            return self.path.cutoff_x
        return self.path.cutoff

    def descriptor(self) -> dict:
        return {
            "path_branch": self.path_branch.value,
            "demand_direction": self.demand_direction.value,
            "kappa": self.kappa,
            "cutoff": self.cutoff,
            "blocks": [list(b) for b in self.blocks],
        }


@dataclass(frozen=True)
class WelfareBreakdown:
    """All welfare changes at one corner.

    ``delta_tr``, ``delta_ts`` and ``dwl`` are ``None`` in ad valorem mode.
    ``i1``/``i2`` are the split demand integrals (price-deflated in ad
    valorem mode).
    """

    delta_cs: float
    delta_ps: float
    delta_ts_priv: float
    delta_tr: Optional[float]
    delta_ts: Optional[float]
    dwl: Optional[float]
    path_term: float
    conduct_term: float
    cs_integral: float
    i1: float
    i2: float

    def value(self, name: str) -> Optional[float]:
        return {
            "CS": self.delta_cs,
            "PS": self.delta_ps,
            "TR": self.delta_tr,
            "TS_priv": self.delta_ts_priv,
            "TS": self.delta_ts,
            "DWL": self.dwl,
        }[name]


@dataclass(frozen=True)
class ObjectBounds:
    lower: float
    upper: float
    lower_corner: Optional[Corner] = None
    upper_corner: Optional[Corner] = None

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class WelfareBounds:
    mode: str
    objects: dict
    cutoffs: dict
    near_degenerate: bool = False
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __getitem__(self, name: str) -> ObjectBounds:
        return self.objects[name]

    def __contains__(self, name: str) -> bool:
        return name in self.objects


# ---------------------------------------------------------------------------
# single corners


def delta_cs(curve, quad: QuadratureSettings | None = None) -> float:
    lo, hi = _support(curve)
    return -_integral(curve, lo, hi, quad)


def delta_ps(curve, path: ExtremalPath, kappa: float, quad: QuadratureSettings | None = None) -> float:
    if not 0 <= kappa <= 1:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    i1, i2 = _split(curve, path.cutoff, path.p_lo, path.p_hi, quad)
    total = i1 + i2
    return total - (path.left_weight * i1 + path.right_weight * i2) - kappa * total


def _support(curve):
    return curve.support.p0, curve.support.p1


def _integral(curve, a, b, quad, deflate=False):
    if quad is None:
        return curve.price_weighted_integral(a, b) if deflate else curve.integral(a, b)
    if deflate:
        return integrate(lambda p: curve.eval(p) / p, a, b, quad, curve.kink_prices)
    return integrate(curve.eval, a, b, quad, curve.kink_prices)


def _split(curve, cutoff, a, b, quad, deflate=False):
    return _integral(curve, a, cutoff, quad, deflate), _integral(curve, cutoff, b, quad, deflate)


def welfare_at_corner(
    corner: Corner,
    change: Union[PolicyChange, AdValoremChange],
    quad: QuadratureSettings | None = None,
) -> WelfareBreakdown:
    """Evaluate every welfare object at ``corner``.

    With ``quad=None`` the curve's own (closed-form where available)
    integrals are used; passing settings re-evaluates every integral by
    adaptive quadrature on pointwise demand, split at kinks and cutoffs.
    """
    curve, path, kappa = corner.demand, corner.path, corner.kappa
    if isinstance(path, AdValoremPath):
        if quad is None:
            j1, j2 = ad_valorem_building_blocks(curve, path)
        else:
            cut = min(max(path.cutoff_price, curve.support.p0), curve.support.p1)
            j1, j2 = _split(curve, cut, curve.support.p0, curve.support.p1, quad, deflate=True)
        path_term = path.left_weight * j1 + path.right_weight * j2
        cs_integral = _integral(curve, curve.support.p0, curve.support.p1, quad)
        return _assemble(cs_integral, path_term, kappa, None, j1, j2)
    if quad is None:
        i1, i2 = building_blocks(curve, path)
    else:
        i1, i2 = _split(curve, path.cutoff, path.p_lo, path.p_hi, quad)
    path_term = path.left_weight * i1 + path.right_weight * i2
    return _assemble(i1 + i2, path_term, kappa, delta_tr(change), i1, i2)


def _assemble(cs_integral, path_term, kappa, tr, i1, i2) -> WelfareBreakdown:
    conduct_term = kappa * cs_integral
    d_cs = -cs_integral
    d_ps = cs_integral - path_term - conduct_term
    d_priv = d_cs + d_ps
    d_ts = None if tr is None else d_priv + tr
    dwl = None if d_ts is None else -d_ts
    return WelfareBreakdown(
        delta_cs=d_cs,
        delta_ps=d_ps,
        delta_ts_priv=d_priv,
        delta_tr=tr,
        delta_ts=d_ts,
        dwl=dwl,
        path_term=path_term,
        conduct_term=conduct_term,
        cs_integral=cs_integral,
        i1=i1,
        i2=i2,
    )


# ---------------------------------------------------------------------------
# envelopes


_ENUM_OBJECTS = (
    ("CS", WelfareObject.CS),
    ("PS", WelfareObject.PS),
    ("TS_priv", WelfareObject.TS_PRIV),
    ("TS", WelfareObject.TS),
)


def _profile_key(direction: Direction, prof: PhiProfile):
    # the constant c0 does not move the argmax
    return (direction, prof.a0, prof.a1, prof.b0, prof.b1, prof.region_p)


def _envelope(scenario, change, paths, profile_fn, names, placement):
    kappas = scenario.conduct.endpoints
    band, t = scenario.shape.band, scenario.shape.transform
    curves: dict = {}
    breakdowns: dict = {}
    warnings: list[str] = []
    results = {}

    for name, obj in _ENUM_OBJECTS:
        if name not in names:
            continue
        ends = {}
        for direction in (Direction.LOWER, Direction.UPPER):
            upper = direction is Direction.UPPER
            best_val, best_corner = None, None
            for branch in (PathBranch.MAX, PathBranch.MIN):
                for kappa in kappas:
                    prof = profile_fn(obj, branch, kappa)
                    if prof.sign_class is SignClass.MULTI_SWITCH:
                        msg = f"{name} weight has several sign changes ({branch.value}, kappa={kappa})"
                        if msg not in warnings:
                            warnings.append(msg)
                    key = _profile_key(direction, prof)
                    if key not in curves:
                        curves[key] = build_extremal(prof, band, t, direction, change, placement)
                    corner = Corner(branch, direction, kappa, curves[key], paths[branch])
                    bkey = (id(corner.demand), branch, kappa)
                    if bkey not in breakdowns:
                        breakdowns[bkey] = welfare_at_corner(corner, change)
                    val = breakdowns[bkey].value(name)
                    if best_val is None or (val > best_val if upper else val < best_val):
                        best_val, best_corner = val, corner
            ends[direction] = (best_val, best_corner)
        (lo, lo_c), (hi, hi_c) = ends[Direction.LOWER], ends[Direction.UPPER]
        results[name] = ObjectBounds(lo, hi, lo_c, hi_c)
    return results, tuple(warnings)


def four_corner_bounds(scenario, placement: str | None = None) -> WelfareBounds:
    """Sharp bounds on every welfare object for a specific-tax scenario.

    ``scenario`` needs ``change``, ``inv``, ``conduct`` and ``shape``
    attributes (see :class:`robust_welfare.scenario.Scenario`).
    """
    if scenario.mode == "ad_valorem":
        return ad_valorem_bounds(scenario, placement)
    placement = placement or getattr(scenario, "placement", "optimal")
    pc, inv = scenario.change, scenario.inv
    paths = {br: extremal_cutoff(pc, inv, br) for br in PathBranch}

    def profile_fn(obj, branch, kappa):
        return phi_coefficients(obj, branch, kappa, inv, pc, scenario.shape.transform)

    objs, warnings = _envelope(scenario, pc, paths, profile_fn, OBJECTS, placement)
    tr = delta_tr(pc)
    objs["TR"] = ObjectBounds(tr, tr)
    ts = objs["TS"]
    objs["DWL"] = ObjectBounds(-ts.upper, -ts.lower, ts.upper_corner, ts.lower_corner)
    ordered = {name: objs[name] for name in OBJECTS}
    return WelfareBounds(
        mode="specific",
        objects=ordered,
        cutoffs={br.value: paths[br].cutoff for br in PathBranch},
        near_degenerate=inv.near_degenerate,
        warnings=warnings,
    )


def ad_valorem_bounds(scenario, placement: str | None = None) -> WelfareBounds:
    """Bounds on CS, PS and private surplus under an ad valorem rate change."""
    placement = placement or getattr(scenario, "placement", "optimal")
    av: AdValoremChange = scenario.change
    paths = {br: ad_valorem_cutoff(av, br) for br in PathBranch}

    def profile_fn(obj, branch, kappa):
        return ad_valorem_phi(obj, branch, kappa, av, scenario.shape.transform)

    objs, warnings = _envelope(scenario, av, paths, profile_fn, AD_VALOREM_OBJECTS, placement)
    return WelfareBounds(
        mode="ad_valorem",
        objects={name: objs[name] for name in AD_VALOREM_OBJECTS},
        cutoffs={br.value: paths[br].cutoff_x for br in PathBranch},
        near_degenerate=0 < av.w_hi - av.w_lo < 1e-10 * av.w_hi,
        warnings=warnings,
    )


def corner_from_descriptor(scenario, desc: dict) -> Corner:
    """Rebuild a corner from the plain-data form written in reports."""
    branch = PathBranch(desc["path_branch"])
    if scenario.mode == "ad_valorem":
        path = ad_valorem_cutoff(scenario.change, branch)
    else:
        path = extremal_cutoff(scenario.change, scenario.inv, branch)
    t, band = scenario.shape.transform, scenario.shape.band
    support = Support.from_change(scenario.change, t)
    blocks = tuple(tuple(b) for b in desc["blocks"])
    curve = ExtremalDemandCurve(t, band, blocks, support)
    return Corner(branch, Direction(desc["demand_direction"]), float(desc["kappa"]), curve, path)


# ---------------------------------------------------------------------------
# marginal cost and markups


def implied_marginal_cost(
    curve: ExtremalDemandCurve, path: ExtremalPath, kappa: float, p: float, pc: PolicyChange
) -> float:
    """Corner-implied marginal cost ``p - tau(p) - kappa * Q / |Q'(p)|``."""
    q = curve.eval(p)
    if q <= 0:
        raise ZeroQuantity(f"quantity is zero at price {p}")
    dq = curve.slope(p)
    if dq == 0:
        raise FlatDemand(f"demand is flat at price {p}")
    markup = -q / dq
    return p - path.tau_at(p) - kappa * markup


def lerner_index_at(curve: ExtremalDemandCurve, kappa: float, p: float) -> float:
    q = curve.eval(p)
    if q <= 0:
        raise ZeroQuantity(f"quantity is zero at price {p}")
    eta = curve.slope(p) * p / q
    if eta == 0 or not math.isfinite(eta):
        raise ZeroElasticity(f"elasticity is {eta} at price {p}")
    return kappa / abs(eta)
