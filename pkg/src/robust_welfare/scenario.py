"""Scenario files: validated loading and lossless writing.

A scenario is a JSON document::

    {
      "format_version": 1,
      "mode": "specific",
      "snapshots": {"pre": {"price": 10, "quantity": 100, "tax": 0},
                    "post": {"price": 12, "quantity": 80, "tax": 3}},
      "pass_through": {"rho_lo": 0.5, "rho_hi": 1.0},
      "conduct": {"kappa_lo": 0.0, "kappa_hi": 0.5},
      "shape": {"transform": "level-level", "class": "gradient",
                "f_lo": -15, "f_hi": -5}
    }

Ad valorem scenarios use ``"mode": "ad_valorem"`` and a pass-through block
``{"rho_a_lo", "rho_a_hi", "xi_pre", "xi_post"}``.  Curvature shapes give
``h_lo``, ``h_hi`` and ``delta_f``.  Optional ``quadrature`` and ``oracle``
blocks override the numerical settings.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .demand_shape import (
    CurvatureBand,
    GradientBand,
    ShapeTransform,
    Support,
    high_set_length,
)
from .errors import SchemaError
from .model import (
    AdValoremChange,
    ConductInterval,
    InversePassThroughBounds,
    PassThroughInterval,
    PolicyChange,
    Snapshot,
    build_ad_valorem_change,
    inverse_passthrough_bounds,
)
from .quadrature import DEFAULT_SETTINGS, QuadratureSettings
from .supply_path import PathBranch, ad_valorem_cutoff, extremal_cutoff

FORMAT_VERSION = 1
TRANSFORMS = ("level-level", "log-log", "log-level", "level-log")
PLACEMENTS = ("optimal", "remark")


@dataclass(frozen=True)
class ShapeSpec:
    transform: ShapeTransform
    band: Union[GradientBand, CurvatureBand]

    @property
    def shape_class(self) -> str:
        return "curvature" if isinstance(self.band, CurvatureBand) else "gradient"


@dataclass(frozen=True)
class OracleSettings:
    samples: int = 10_000
    seed: int = 20240601
    grid: int = 1024


@dataclass(frozen=True)
class Scenario:
    mode: str
    change: Union[PolicyChange, AdValoremChange]
    pass_through: PassThroughInterval
    conduct: ConductInterval
    shape: ShapeSpec
    quadrature: QuadratureSettings = DEFAULT_SETTINGS
    oracle: OracleSettings = field(default_factory=OracleSettings)
    placement: str = "optimal"

    @property
    def inv(self) -> Optional[InversePassThroughBounds]:
        if self.mode == "ad_valorem":
            return None
        return inverse_passthrough_bounds(self.pass_through)

    @property
    def pre(self) -> Snapshot:
        return self.change.pre

    @property
    def post(self) -> Snapshot:
        return self.change.post


def make_scenario(
    pre: Snapshot,
    post: Snapshot,
    rho: tuple[float, float],
    kappa: tuple[float, float],
    band,
    transform: str | ShapeTransform = "level-level",
    xi: tuple[float, float] | None = None,
    **kwargs,
) -> Scenario:
    """Programmatic constructor; ``xi`` switches to ad valorem mode."""
    t = ShapeTransform.parse(transform) if isinstance(transform, str) else transform
    pt = PassThroughInterval(*rho)
    if xi is None:
        change = PolicyChange(pre, post)
        mode = "specific"
    else:
        change = build_ad_valorem_change(pre, post, xi[0], xi[1], pt.rho_lo, pt.rho_hi)
        mode = "ad_valorem"
    return Scenario(mode, change, pt, ConductInterval(*kappa), ShapeSpec(t, band), **kwargs)


# ---------------------------------------------------------------------------
# validation


class _Collector:
    def __init__(self):
        self.errors: list[tuple[str, str]] = []

    def add(self, locus: str, msg: str):
        self.errors.append((locus, msg))

    def section(self, doc: dict, key: str, required=True) -> dict:
        val = doc.get(key)
        if val is None:
            if required:
                self.add(key, "missing section")
            return {}
        if not isinstance(val, dict):
            self.add(key, "must be an object")
            return {}
        return val

    def number(self, sec: dict, locus: str, key: str, default=None, required=True):
        if key not in sec:
            if required and default is None:
                self.add(f"{locus}.{key}", "missing value")
            return default
        val = sec[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            self.add(f"{locus}.{key}", f"must be a number, got {val!r}")
            return None
        if not math.isfinite(val):
            self.add(f"{locus}.{key}", "must be finite")
            return None
        return float(val)

    def integer(self, sec: dict, locus: str, key: str, default: int):
        val = sec.get(key, default)
        if isinstance(val, bool) or not isinstance(val, int):
            self.add(f"{locus}.{key}", f"must be an integer, got {val!r}")
            return default
        return val


def _check_snapshot(c: _Collector, snaps: dict, which: str):
    sec = c.section(snaps, which) if snaps else {}
    locus = f"snapshots.{which}"
    price = c.number(sec, locus, "price")
    qty = c.number(sec, locus, "quantity")
    tax = c.number(sec, locus, "tax", default=0.0)
    if price is not None and price <= 0:
        c.add(f"{locus}.price", "must be strictly positive")
    if qty is not None and qty < 0:
        c.add(f"{locus}.quantity", "must be nonnegative")
    if tax is not None and tax < 0:
        c.add(f"{locus}.tax", "must be nonnegative")
    return price, qty, tax


def _interval(c: _Collector, sec, locus, lo_key, hi_key, lo_bound=None, hi_bound=None,
              strict_lo=False, what="interval"):
    lo = c.number(sec, locus, lo_key)
    hi = c.number(sec, locus, hi_key)
    if lo is not None and lo_bound is not None:
        if (strict_lo and lo <= lo_bound) or (not strict_lo and lo < lo_bound):
            bound = "strictly greater than" if strict_lo else "at least"
            c.add(f"{locus}.{lo_key}", f"{what} must be {bound} {lo_bound}")
    if hi is not None and hi_bound is not None and hi > hi_bound:
        c.add(f"{locus}.{hi_key}", f"{what} must be at most {hi_bound}")
    if lo is not None and hi is not None and lo > hi:
        c.add(locus, f"{lo_key} exceeds {hi_key}")
    return lo, hi


def parse_scenario(doc: Union[str, dict]) -> Scenario:
    """Validate a scenario document and build the model objects.

    Schema problems are collected and raised together as one
    :class:`SchemaError`; afterwards the model constructors re-check sign
    conventions and feasibility, raising their own errors.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError([("document", f"not valid JSON: {exc}")]) from None
    if not isinstance(doc, dict):
        raise SchemaError([("document", "top level must be an object")])
    c = _Collector()

    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        c.add("format_version", f"expected {FORMAT_VERSION}, got {version!r}")
    mode = doc.get("mode", "specific")
    if mode not in ("specific", "ad_valorem"):
        c.add("mode", f"must be 'specific' or 'ad_valorem', got {mode!r}")

    snaps = c.section(doc, "snapshots")
    pre = _check_snapshot(c, snaps, "pre")
    post = _check_snapshot(c, snaps, "post")

    pt = c.section(doc, "pass_through")
    if mode == "ad_valorem":
        rho = _interval(c, pt, "pass_through", "rho_a_lo", "rho_a_hi", 0.0, strict_lo=True,
                        what="ad valorem pass-through")
        xi_pre = c.number(pt, "pass_through", "xi_pre")
        xi_post = c.number(pt, "pass_through", "xi_post")
        for key, val in (("xi_pre", xi_pre), ("xi_post", xi_post)):
            if val is not None and val < 0:
                c.add(f"pass_through.{key}", "rate must be nonnegative")
    else:
        rho = _interval(c, pt, "pass_through", "rho_lo", "rho_hi", 0.0, strict_lo=True,
                        what="pass-through")
        xi_pre = xi_post = None

    cd = c.section(doc, "conduct")
    kappa = _interval(c, cd, "conduct", "kappa_lo", "kappa_hi", 0.0, 1.0, what="conduct")

    sh = c.section(doc, "shape")
    transform = sh.get("transform", "level-level")
    if transform not in TRANSFORMS:
        c.add("shape.transform", f"must be one of {', '.join(TRANSFORMS)}; got {transform!r}")
    shape_class = sh.get("class", "gradient")
    band_args = None
    if shape_class == "gradient":
        f_lo, f_hi = _interval(c, sh, "shape", "f_lo", "f_hi", what="gradient band")
        if f_hi is not None and f_hi > 0:
            c.add("shape.f_hi", "gradient band must be nonpositive (demand slopes down)")
        band_args = (f_lo, f_hi)
    elif shape_class == "curvature":
        h_lo, h_hi = _interval(c, sh, "shape", "h_lo", "h_hi", what="curvature band")
        if h_lo is not None and h_lo > 0:
            c.add("shape.h_lo", "curvature band must contain zero")
        if h_hi is not None and h_hi < 0:
            c.add("shape.h_hi", "curvature band must contain zero")
        band_args = (h_lo, h_hi, c.number(sh, "shape", "delta_f"))
    else:
        c.add("shape.class", f"must be 'gradient' or 'curvature', got {shape_class!r}")

    qd = c.section(doc, "quadrature", required=False)
    rel_tol = c.number(qd, "quadrature", "rel_tol", DEFAULT_SETTINGS.rel_tol)
    abs_tol = c.number(qd, "quadrature", "abs_tol", DEFAULT_SETTINGS.abs_tol)
    max_depth = c.integer(qd, "quadrature", "max_depth", DEFAULT_SETTINGS.max_depth)
    for key, val in (("rel_tol", rel_tol), ("abs_tol", abs_tol)):
        if val is not None and val <= 0:
            c.add(f"quadrature.{key}", "must be strictly positive")
    if max_depth < 1:
        c.add("quadrature.max_depth", "must be at least 1")

    oc = c.section(doc, "oracle", required=False)
    defaults = OracleSettings()
    samples = c.integer(oc, "oracle", "samples", defaults.samples)
    seed = c.integer(oc, "oracle", "seed", defaults.seed)
    grid = c.integer(oc, "oracle", "grid", defaults.grid)
    if samples < 1:
        c.add("oracle.samples", "must be at least 1")
    if grid < 2:
        c.add("oracle.grid", "must be at least 2")
    if not 0 <= seed < 2**64:
        c.add("oracle.seed", "must be a 64-bit unsigned integer")

    placement = doc.get("placement", "optimal")
    if placement not in PLACEMENTS:
        c.add("placement", f"must be one of {', '.join(PLACEMENTS)}; got {placement!r}")

    if c.errors:
        raise SchemaError(c.errors)

    pre_s, post_s = Snapshot(*pre), Snapshot(*post)
    t = ShapeTransform.parse(transform)
    band = GradientBand(*band_args) if shape_class == "gradient" else CurvatureBand(*band_args)
    scenario = make_scenario(
        pre_s, post_s, rho, kappa, band, t,
        xi=(xi_pre, xi_post) if mode == "ad_valorem" else None,
        quadrature=QuadratureSettings(rel_tol, abs_tol, max_depth),
        oracle=OracleSettings(samples, seed, grid),
        placement=placement,
    )
    check_feasible(scenario)
    return scenario


def check_feasible(scenario: Scenario) -> None:
    """Raise if no admissible path or no admissible demand curve exists."""
    if scenario.mode == "ad_valorem":
        ad_valorem_cutoff(scenario.change, PathBranch.MAX)
    else:
        extremal_cutoff(scenario.change, scenario.inv, PathBranch.MAX)
    support = Support.from_change(scenario.change, scenario.shape.transform)
    high_set_length(scenario.shape.band, support)


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text)


# ---------------------------------------------------------------------------
# writing


def scenario_to_dict(s: Scenario) -> dict[str, Any]:
    snap = lambda x: {"price": x.price, "quantity": x.quantity, "tax": x.tax}  # noqa: E731
    if s.mode == "ad_valorem":
        pt = {
            "rho_a_lo": s.pass_through.rho_lo,
            "rho_a_hi": s.pass_through.rho_hi,
            "xi_pre": s.change.xi_pre,
            "xi_post": s.change.xi_post,
        }
    else:
        pt = {"rho_lo": s.pass_through.rho_lo, "rho_hi": s.pass_through.rho_hi}
    band = s.shape.band
    shape = {"transform": s.shape.transform.name, "class": s.shape.shape_class}
    if isinstance(band, GradientBand):
        shape.update(f_lo=band.f_lo, f_hi=band.f_hi)
    else:
        shape.update(h_lo=band.h_lo, h_hi=band.h_hi, delta_f=band.delta_f)
    return {
        "format_version": FORMAT_VERSION,
        "mode": s.mode,
        "snapshots": {"pre": snap(s.pre), "post": snap(s.post)},
        "pass_through": pt,
        "conduct": {"kappa_lo": s.conduct.kappa_lo, "kappa_hi": s.conduct.kappa_hi},
        "shape": shape,
        "quadrature": {
            "rel_tol": s.quadrature.rel_tol,
            "abs_tol": s.quadrature.abs_tol,
            "max_depth": s.quadrature.max_depth,
        },
        "oracle": {"samples": s.oracle.samples, "seed": s.oracle.seed, "grid": s.oracle.grid},
        "placement": s.placement,
    }


def emit_scenario(s: Scenario) -> str:
    """JSON text; floats are written with ``repr`` so they read back exactly."""
    return json.dumps(scenario_to_dict(s), indent=2)
