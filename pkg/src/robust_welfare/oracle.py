"""Brute-force checks of the analytic bounds.

Nothing here relies on the extremal constructions being right.  Paths and
demand profiles are sampled as step functions on uniform grids, curves are
rebuilt from those steps by cumulative sums, and welfare is evaluated with
a midpoint rule on the union of the path grid and the demand grid (so no
kink ever falls inside a cell).  Samplers draw from a mixture of i.i.d.,
two-point, sorted and bang-bang profiles and then shrink toward the feasible
constant to meet the budget exactly; the mixture is meant to spread samples
and reach the extremes, not to be uniform on the constraint set.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .demand_shape import CurvatureBand, Direction, Scale, build_extremal
from .errors import InfeasibleScenario, InfeasibleShape
from .model import AdValoremChange, delta_tr
from .supply_path import PathBranch, ad_valorem_cutoff, extremal_cutoff
from .welfare_engine import (
    AD_VALOREM_OBJECTS,
    GENERIC_QUAD,
    OBJECTS,
    WelfareBounds,
    WelfareBreakdown,
    corner_from_descriptor,
    four_corner_bounds,
    welfare_at_corner,
)

# Rejections in a row before a shape class is declared empty.
MAX_REJECTIONS = 1000
GRID_BIAS_FACTOR = 10.0


@dataclass(frozen=True)
class Grid:
    """Uniform cells tiling ``[lo, hi]``."""

    n_cells: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("a grid needs at least two cells")
        if not self.hi > self.lo:
            raise ValueError(f"empty grid support [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.n_cells

    @property
    def edges(self) -> np.ndarray:
        e = self.lo + self.width * np.arange(self.n_cells + 1)
        e[-1] = self.hi
        return e

    @property
    def midpoints(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


@dataclass(frozen=True)
class SampleConfig:
    n_samples: int
    seed: int
    grid: Grid
    batch: int = 500

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")


@dataclass(frozen=True)
class Violation:
    sample_id: int
    obj: str
    value: float
    lower: float
    upper: float
    allowance: float


@dataclass(frozen=True)
class VerificationReport:
    n_checked: int
    violations: tuple[Violation, ...]
    n_violations: int
    max_attained_gap: dict
    runtime: float
    self_test: bool = False
    backend: str = kernels.BACKEND
    grid_cells: int = 0

    @property
    def passed(self) -> bool:
        return self.n_violations == 0


# ---------------------------------------------------------------------------
# samplers


def _sample_profiles(rng: np.random.Generator, b: int, n: int, lo: float, hi: float,
                     target: float) -> np.ndarray:
    """``b`` step profiles on ``n`` cells with values in ``[lo, hi]`` and mean ``target``."""
    if hi == lo:
        return np.full((b, n), lo)
    kind = rng.integers(0, 6, size=b)
    v = lo + (hi - lo) * rng.random((b, n))
    two_point = rng.random((b, n)) < rng.random((b, 1))
    v = np.where((kind == 1)[:, None], np.where(two_point, hi, lo), v)
    v = np.where((kind == 2)[:, None], np.sort(v, axis=1), v)
    v = np.where((kind == 3)[:, None], np.sort(v, axis=1)[:, ::-1], v)

    # bang-bang: one block, or two tails, holding the high value
    high = (target - lo) / (hi - lo) * n
    room = n - high
    anchor = rng.integers(0, 3, size=b)
    start = np.where(anchor == 0, 0.0, np.where(anchor == 1, room, room * rng.random(b)))
    cells = np.arange(n)
    lo_e, hi_e = cells[None, :], cells[None, :] + 1.0
    a = start[:, None]
    block = np.clip(np.minimum(hi_e, a + high) - np.maximum(lo_e, a), 0.0, 1.0)
    left = high * rng.random((b, 1))
    tails = np.clip(np.minimum(hi_e, left) - lo_e, 0.0, 1.0) + np.clip(
        hi_e - np.maximum(lo_e, n - (high - left)), 0.0, 1.0
    )
    v = np.where((kind == 4)[:, None], lo + (hi - lo) * block, v)
    v = np.where((kind == 5)[:, None], lo + (hi - lo) * np.minimum(tails, 1.0), v)
    return kernels.repair_to_mean(np.ascontiguousarray(v), lo, hi, target)


def sample_admissible_path(rng: np.random.Generator, inv, pc, grid: Grid, b: int = 1) -> np.ndarray:
    """Inverse pass-through steps ``u`` on ``grid``; each row averages ``delta_tau/delta_p``."""
    target = pc.delta_tau / pc.delta_p
    if not inv.alpha * (1 - 1e-12) <= target <= inv.beta * (1 + 1e-12):
        raise InfeasibleScenario(f"mean weight {target} outside [{inv.alpha}, {inv.beta}]")
    target = min(max(target, inv.alpha), inv.beta)
    return _sample_profiles(rng, b, grid.n_cells, inv.alpha, inv.beta, target)


def sample_admissible_weight(rng: np.random.Generator, av: AdValoremChange, grid: Grid,
                             b: int = 1) -> np.ndarray:
    """Ad valorem weights ``w`` on a log-price grid; rows average ``delta_xi/delta_x``."""
    target = av.delta_xi / av.delta_x
    if not av.w_lo * (1 - 1e-12) <= target <= av.w_hi * (1 + 1e-12):
        raise InfeasibleScenario(f"mean weight {target} outside [{av.w_lo}, {av.w_hi}]")
    target = min(max(target, av.w_lo), av.w_hi)
    return _sample_profiles(rng, b, grid.n_cells, av.w_lo, av.w_hi, target)


def _fwd(kind: Scale, v):
    return np.log(v) if kind is Scale.LOG else np.asarray(v, dtype=float)


def _inv(kind: Scale, v):
    return np.exp(v) if kind is Scale.LOG else v


class SampledCurves:
    """A batch of demand curves built from cell-wise ``f`` (or ``h``) steps."""

    def __init__(self, transform, change, cells: np.ndarray, curvature: bool):
        self.transform = transform
        self.p0, self.p1 = change.pre.price, change.post.price
        self.q0, self.q1 = change.pre.quantity, change.post.quantity
        self.s0 = float(_fwd(transform.b_kind, self.p0))
        self.s1 = float(_fwd(transform.b_kind, self.p1))
        self.g0 = float(_fwd(transform.a_kind, self.q0))
        self.g1 = float(_fwd(transform.a_kind, self.q1))
        self.cells = np.ascontiguousarray(cells, dtype=float)
        self.curvature = curvature
        n = self.cells.shape[1]
        self.ds = (self.s1 - self.s0) / n
        self.G, self.F = kernels.cumulative_curve(
            self.cells, self.ds, self.g0, self.g1 - self.g0, curvature
        )
        self.H = self.cells if curvature else np.zeros_like(self.cells)

    def __len__(self):
        return self.cells.shape[0]

    @property
    def s_edges(self) -> np.ndarray:
        n = self.cells.shape[1]
        e = self.s0 + self.ds * np.arange(n + 1)
        e[-1] = self.s1
        return e

    @property
    def price_knots(self) -> np.ndarray:
        k = _inv(self.transform.b_kind, self.s_edges)
        k[0], k[-1] = self.p0, self.p1
        return k

    def admissible(self) -> np.ndarray:
        """Rows with nonincreasing demand and nonnegative quantity."""
        scale = max(abs(self.g1 - self.g0) / (self.s1 - self.s0), 1.0)
        ok = np.max(self.F, axis=1) <= 1e-9 * scale
        if self.transform.a_kind is Scale.LEVEL:
            ok &= np.min(self.G, axis=1) >= -1e-9 * max(abs(self.g0), 1.0)
        return ok

    def subset(self, rows) -> "SampledCurves":
        out = object.__new__(SampledCurves)
        out.__dict__.update(self.__dict__)
        out.cells, out.G, out.F, out.H = (
            self.cells[rows], self.G[rows], self.F[rows], self.H[rows]
        )
        return out

    def quantity(self, p: np.ndarray) -> np.ndarray:
        """``Q`` at prices ``p`` for every curve in the batch, shape ``(b, len(p))``."""
        s = np.ascontiguousarray(_fwd(self.transform.b_kind, np.asarray(p, dtype=float)))
        g = kernels.eval_uniform_piecewise(
            np.ascontiguousarray(self.G), np.ascontiguousarray(self.F),
            np.ascontiguousarray(self.H), self.s0, self.ds, s,
        )
        q = _inv(self.transform.a_kind, g)
        return np.maximum(q, 0.0) if self.transform.a_kind is Scale.LEVEL else q


def sample_admissible_demand(rng: np.random.Generator, band, transform, change, n_cells: int,
                             b: int = 1) -> SampledCurves:
    """``b`` admissible curves; nonmonotone or negative draws are redrawn."""
    curvature = isinstance(band, CurvatureBand)
    s0 = float(_fwd(transform.b_kind, change.pre.price))
    s1 = float(_fwd(transform.b_kind, change.post.price))
    g0 = float(_fwd(transform.a_kind, change.pre.quantity))
    g1 = float(_fwd(transform.a_kind, change.post.quantity))
    length = s1 - s0
    if curvature:
        lo, hi, target = band.h_lo, band.h_hi, band.delta_f / length
    else:
        lo, hi, target = band.f_lo, band.f_hi, (g1 - g0) / length
    tol = 1e-12 * max(abs(lo), abs(hi), abs(target), 1.0)
    if not lo - tol <= target <= hi + tol:
        raise InfeasibleShape(f"required mean {target} outside band [{lo}, {hi}]")
    target = min(max(target, lo), hi)

    kept: list[np.ndarray] = []
    have, misses = 0, 0
    while have < b:
        cells = _sample_profiles(rng, b - have, n_cells, lo, hi, target)
        batch = SampledCurves(transform, change, cells, curvature)
        ok = batch.admissible()
        if ok.any():
            kept.append(cells[ok])
            have += int(ok.sum())
            misses = 0
        else:
            misses += len(ok)
            if misses >= MAX_REJECTIONS:
                raise InfeasibleShape(
                    f"{MAX_REJECTIONS} consecutive draws violated monotonicity or positivity"
                )
    return SampledCurves(transform, change, np.concatenate(kept)[:b], curvature)


def sample_conduct(rng: np.random.Generator, conduct, b: int) -> np.ndarray:
    """Conduct draws: each endpoint with probability 1/4, otherwise uniform."""
    lo, hi = conduct.kappa_lo, conduct.kappa_hi
    u = rng.random(b)
    k = lo + (hi - lo) * rng.random(b)
    return np.where(u < 0.25, lo, np.where(u < 0.5, hi, k))


# ---------------------------------------------------------------------------
# discrete welfare


@dataclass(frozen=True)
class MergedGrid:
    edges: np.ndarray
    mid: np.ndarray
    width: np.ndarray
    path_cell: np.ndarray
    log_width: np.ndarray


def merged_grid(path_grid: Grid, curves: SampledCurves, log_path: bool) -> MergedGrid:
    """Union of path-grid edges (in prices) and demand-grid edges."""
    path_edges = np.exp(path_grid.edges) if log_path else path_grid.edges
    e = np.unique(np.concatenate([path_edges, curves.price_knots]))
    e = e[(e >= curves.p0) & (e <= curves.p1)]
    # drop slivers created by rounding when both grids share an edge
    keep = np.concatenate([[True], np.diff(e) > 1e-13 * curves.p1])
    e = e[keep]
    e[-1] = curves.p1
    mid = 0.5 * (e[:-1] + e[1:])
    pos = np.log(mid) if log_path else mid
    cell = np.clip(((pos - path_grid.lo) / path_grid.width).astype(np.int64), 0,
                   path_grid.n_cells - 1)
    return MergedGrid(e, mid, np.diff(e), cell, np.log(e[1:] / e[:-1]))


@dataclass(frozen=True)
class BatchWelfare:
    """Welfare objects for a batch of samples (arrays, one entry per sample)."""

    cs_integral: np.ndarray
    path_term: np.ndarray
    conduct_term: np.ndarray
    delta_tr: Optional[float]
    bias: np.ndarray

    @property
    def delta_cs(self):
        return -self.cs_integral

    @property
    def delta_ps(self):
        return self.cs_integral - self.path_term - self.conduct_term

    @property
    def delta_ts_priv(self):
        return self.delta_cs + self.delta_ps

    @property
    def delta_ts(self):
        return None if self.delta_tr is None else self.delta_ts_priv + self.delta_tr

    @property
    def dwl(self):
        return None if self.delta_tr is None else -self.delta_ts

    def value(self, name: str):
        return {
            "CS": self.delta_cs,
            "PS": self.delta_ps,
            "TR": None if self.delta_tr is None else np.full_like(self.cs_integral, self.delta_tr),
            "TS_priv": self.delta_ts_priv,
            "TS": self.delta_ts,
            "DWL": self.dwl,
        }[name]

    def row(self, i: int) -> WelfareBreakdown:
        tr = self.delta_tr
        return WelfareBreakdown(
            delta_cs=float(self.delta_cs[i]),
            delta_ps=float(self.delta_ps[i]),
            delta_ts_priv=float(self.delta_ts_priv[i]),
            delta_tr=tr,
            delta_ts=None if tr is None else float(self.delta_ts[i]),
            dwl=None if tr is None else float(self.dwl[i]),
            path_term=float(self.path_term[i]),
            conduct_term=float(self.conduct_term[i]),
            cs_integral=float(self.cs_integral[i]),
            i1=math.nan,
            i2=math.nan,
        )


def discrete_welfare(u: np.ndarray, curves: SampledCurves, kappa, change, path_grid: Grid
                     ) -> BatchWelfare:
    """Midpoint-rule welfare for paired rows of ``u``, ``curves`` and ``kappa``.

    ``u`` holds specific-tax weights on a price grid or, for an ad valorem
    change, log-price weights on a log-price grid.  ``bias`` estimates the
    midpoint-rule error of each sample from second differences of ``Q``.
    """
    ad_valorem = isinstance(change, AdValoremChange)
    mg = merged_grid(path_grid, curves, ad_valorem)
    q_mid = curves.quantity(mg.mid)
    q_edge = curves.quantity(mg.edges)
    w_mid = np.asarray(u)[:, mg.path_cell]
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (len(curves),))

    cs_integral = q_mid @ mg.width
    if ad_valorem:
        path = (q_mid * w_mid) @ mg.log_width
        tr = None
    else:
        path = (q_mid * w_mid) @ mg.width
        tr = delta_tr(change)

    second = np.abs(q_edge[:, :-1] - 2 * q_mid + q_edge[:, 1:])
    err_q = second @ (mg.width / 6.0)
    if ad_valorem:
        first = np.abs(q_edge[:, 1:] - q_edge[:, :-1])
        err_path = (second / 6.0 + first * mg.width / (12.0 * mg.mid)) @ (mg.width / mg.mid)
        err_path = err_path * np.max(u, axis=1)
    else:
        err_path = err_q * np.max(u, axis=1)
    bias = GRID_BIAS_FACTOR * (err_q * (1.0 + kappa) + err_path)
    return BatchWelfare(cs_integral, path, kappa * cs_integral, tr, bias)


# ---------------------------------------------------------------------------
# containment


def _objects(scenario):
    return AD_VALOREM_OBJECTS if scenario.mode == "ad_valorem" else OBJECTS


def path_grid_for(scenario, n_cells: int) -> Grid:
    ch = scenario.change
    if scenario.mode == "ad_valorem":
        return Grid(n_cells, ch.x0, ch.x1)
    return Grid(n_cells, ch.pre.price, ch.post.price)


def default_config(scenario) -> SampleConfig:
    o = scenario.oracle
    return SampleConfig(o.samples, o.seed, path_grid_for(scenario, o.grid))


def narrowed_bounds(bounds: WelfareBounds, fraction: float = 0.01) -> dict:
    """``{object: (lower, upper)}`` pulled inward by ``fraction`` of each width."""
    out = {}
    for name, ob in bounds.objects.items():
        w = ob.upper - ob.lower
        out[name] = (ob.lower + fraction * w, ob.upper - fraction * w)
    return out


def sample_batches(scenario, cfg: SampleConfig):
    """Yield ``(first_id, BatchWelfare)`` for ``cfg.n_samples`` samples."""
    rng = np.random.default_rng(cfg.seed)
    ch, shape = scenario.change, scenario.shape
    done = 0
    while done < cfg.n_samples:
        b = min(cfg.batch, cfg.n_samples - done)
        if scenario.mode == "ad_valorem":
            u = sample_admissible_weight(rng, ch, cfg.grid, b)
        else:
            u = sample_admissible_path(rng, scenario.inv, ch, cfg.grid, b)
        curves = sample_admissible_demand(rng, shape.band, shape.transform, ch,
                                          cfg.grid.n_cells, b)
        kappa = sample_conduct(rng, scenario.conduct, b)
        yield done, discrete_welfare(u, curves, kappa, ch, cfg.grid)
        done += b


def verify_containment(scenario, cfg: SampleConfig | None = None,
                       bounds: WelfareBounds | None = None, self_test: bool = False,
                       max_recorded: int = 1000) -> VerificationReport:
    """Check every sampled welfare value against the analytic bounds.

    A value counts as a violation when it leaves
    ``[lower - eps - bias, upper + eps + bias]`` with
    ``eps = 1e-6 * (1 + |bound|)`` and ``bias`` the sample's estimated grid
    error.  With ``self_test`` the bounds are first narrowed by 1% of their
    width, which a working harness must detect.
    """
    start = time.perf_counter()
    cfg = cfg or default_config(scenario)
    bounds = bounds or four_corner_bounds(scenario)
    limits = (narrowed_bounds(bounds) if self_test
              else {k: (v.lower, v.upper) for k, v in bounds.objects.items()})
    names = [n for n in _objects(scenario) if n in limits]
    hi_seen = {n: -math.inf for n in names}
    lo_seen = {n: math.inf for n in names}
    violations: list[Violation] = []
    n_viol = 0
    for first, bw in sample_batches(scenario, cfg):
        for name in names:
            vals = bw.value(name)
            lo, hi = limits[name]
            slack_lo = 1e-6 * (1 + abs(lo)) + bw.bias
            slack_hi = 1e-6 * (1 + abs(hi)) + bw.bias
            bad = np.nonzero((vals < lo - slack_lo) | (vals > hi + slack_hi))[0]
            n_viol += len(bad)
            for i in bad[: max(0, max_recorded - len(violations))]:
                violations.append(
                    Violation(first + int(i), name, float(vals[i]), lo, hi, float(bw.bias[i]))
                )
            hi_seen[name] = max(hi_seen[name], float(np.max(vals)))
            lo_seen[name] = min(lo_seen[name], float(np.min(vals)))
    gaps = {n: (limits[n][1] - hi_seen[n], lo_seen[n] - limits[n][0]) for n in names}
    violations.sort(key=lambda v: (v.sample_id, v.obj))
    return VerificationReport(
        n_checked=cfg.n_samples,
        violations=tuple(violations),
        n_violations=n_viol,
        max_attained_gap=gaps,
        runtime=time.perf_counter() - start,
        self_test=self_test,
        grid_cells=cfg.grid.n_cells,
    )


def check_attainability(scenario, bounds: WelfareBounds | None = None, rel: float = 1e-8,
                        quad=GENERIC_QUAD):
    """Re-evaluate each attaining corner through the generic pipeline.

    Corners are round-tripped through their report descriptors and every
    integral is recomputed by adaptive quadrature on pointwise demand.
    Returns ``[(object, end, reported, recomputed)]`` for every end that does
    not match to ``rel`` relative accuracy.
    """
    bounds = bounds or four_corner_bounds(scenario)
    failures = []
    for name, ob in bounds.objects.items():
        for end, value, corner in (("lower", ob.lower, ob.lower_corner),
                                   ("upper", ob.upper, ob.upper_corner)):
            if corner is None:
                recomputed = delta_tr(scenario.change)
            else:
                rebuilt = corner_from_descriptor(scenario, corner.descriptor())
                bd = welfare_at_corner(rebuilt, scenario.change, quad)
                recomputed = -bd.value("TS") if name == "DWL" else bd.value(name)
            if abs(recomputed - value) > rel * max(abs(value), 1.0):
                failures.append((name, end, value, recomputed))
    return failures


# ---------------------------------------------------------------------------
# exhaustive enumeration on coarse grids


@dataclass(frozen=True)
class PathSearchResult:
    n_cells: int
    best_max: float
    best_min: float
    analytic_max: float
    analytic_min: float
    argmax: tuple[float, ...]
    argmin: tuple[float, ...]
    argmax_single_cutoff: bool
    argmin_single_cutoff: bool
    tolerance: float

    @property
    def within_bound(self) -> bool:
        return (self.best_max <= self.analytic_max + self.tolerance
                and self.best_min >= self.analytic_min - self.tolerance)


@dataclass(frozen=True)
class DemandSearchResult:
    obj: str
    branch: str
    kappa: float
    direction: str
    sign_class: str
    best: float
    bound: float
    argbest: tuple[float, ...]
    single_block: bool
    tolerance: float

    @property
    def within_bound(self) -> bool:
        if self.direction == "upper":
            return self.best <= self.bound + self.tolerance
        return self.best >= self.bound - self.tolerance


@dataclass(frozen=True)
class ExhaustiveReport:
    paths: PathSearchResult
    demand: tuple[DemandSearchResult, ...] = field(default_factory=tuple)


def _two_level_assignments(n: int, lo: float, hi: float, target: float):
    """Every profile with ``k`` cells at ``hi``, one fractional cell, the rest at ``lo``."""
    if hi == lo:
        return np.full((1, n), lo)
    mass = (target - lo) / (hi - lo) * n
    k = min(int(math.floor(mass + 1e-12)), n)
    frac = mass - k
    rows = []
    for full in itertools.combinations(range(n), k):
        rest = [i for i in range(n) if i not in full]
        for j in (rest if frac > 1e-12 and rest else [None]):
            v = np.full(n, lo)
            v[list(full)] = hi
            if j is not None:
                v[j] = lo + frac * (hi - lo)
            rows.append(v)
    return np.array(rows)


def _gauss_segments(breaks: np.ndarray, order: int = 12):
    """Composite Gauss-Legendre nodes and weights on consecutive ``breaks``."""
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def _is_nonincreasing(v) -> bool:
    return bool(np.all(np.diff(v) <= 1e-12 * max(np.max(np.abs(v)), 1.0)))


def _is_nondecreasing(v) -> bool:
    return _is_nonincreasing(-np.asarray(v))


def _single_block(v, lo) -> bool:
    raised = np.nonzero(np.asarray(v) > lo + 1e-12 * max(abs(lo), 1.0))[0]
    return len(raised) == 0 or (raised[-1] - raised[0] + 1 == len(raised))


def _preferred_argbest(values, best, tie, rows, shape_test) -> int:
    """Index of an optimum, preferring one that passes ``shape_test``.

    Several profiles can tie when the weight vanishes on part of the
    support; any of them is an argmax.
    """
    tied = np.nonzero(values >= best - tie)[0]
    for i in tied:
        if shape_test(rows[i]):
            return int(i)
    return int(tied[np.argmax(values[tied])])


def exhaustive_path_search(scenario, n_cells: int = 8, demand=None,
                           grid_constant: float = 0.0) -> PathSearchResult:
    """Enumerate two-level path assignments on a coarse price grid.

    ``demand`` defaults to the scenario's constant-gradient curve.  Each
    assignment's path term uses exact cell integrals of demand, so the
    enumerated set is a subset of the admissible paths.
    """
    if not n_cells <= 12:
        raise ValueError("exhaustive search is limited to 12 cells")
    pc, inv = scenario.change, scenario.inv
    if demand is None:
        demand = _reference_curve(scenario)
    grid = Grid(n_cells, pc.p0, pc.p1)
    nodes, weights = _gauss_segments(np.unique(np.concatenate([grid.edges, demand.price_knots])))
    q = demand.quantity(nodes)[0]
    cell = np.clip(((nodes - grid.lo) / grid.width).astype(np.int64), 0, n_cells - 1)
    cell_int = np.bincount(cell, weights=q * weights, minlength=n_cells)

    target = pc.delta_tau / pc.delta_p
    assignments = _two_level_assignments(n_cells, inv.alpha, inv.beta, target)
    terms = assignments @ cell_int
    scale = (1 + inv.beta) * float(np.sum(cell_int))
    i_max = _preferred_argbest(terms, terms.max(), 1e-12 * scale, assignments, _is_nonincreasing)
    i_min = _preferred_argbest(-terms, -terms.min(), 1e-12 * scale, assignments, _is_nondecreasing)

    analytic = {}
    for br in PathBranch:
        path = extremal_cutoff(pc, inv, br)
        left = _integrate_split(demand, pc.p0, path.cutoff)
        right = _integrate_split(demand, path.cutoff, pc.p1)
        analytic[br] = path.left_weight * left + path.right_weight * right
    tol = grid_constant * pc.delta_p / n_cells + 1e-12 * scale
    return PathSearchResult(
        n_cells=n_cells,
        best_max=float(terms[i_max]),
        best_min=float(terms[i_min]),
        analytic_max=analytic[PathBranch.MAX],
        analytic_min=analytic[PathBranch.MIN],
        argmax=tuple(assignments[i_max]),
        argmin=tuple(assignments[i_min]),
        argmax_single_cutoff=_is_nonincreasing(assignments[i_max]),
        argmin_single_cutoff=_is_nondecreasing(assignments[i_min]),
        tolerance=tol,
    )


def _integrate_split(curves: SampledCurves, a: float, b: float) -> float:
    if b <= a:
        return 0.0
    knots = curves.price_knots
    breaks = np.unique(np.concatenate([[a, b], knots[(knots > a) & (knots < b)]]))
    nodes, weights = _gauss_segments(breaks)
    return float(curves.quantity(nodes)[0] @ weights)


def _reference_curve(scenario) -> SampledCurves:
    band, t = scenario.shape.band, scenario.shape.transform
    curvature = isinstance(band, CurvatureBand)
    ch = scenario.change
    s0 = float(_fwd(t.b_kind, ch.pre.price))
    s1 = float(_fwd(t.b_kind, ch.post.price))
    if curvature:
        level = band.delta_f / (s1 - s0)
    else:
        level = (float(_fwd(t.a_kind, ch.post.quantity)) - float(_fwd(t.a_kind, ch.pre.quantity))) / (s1 - s0)
    return SampledCurves(t, ch, np.full((1, 4), level), curvature)


def exhaustive_demand_search(scenario, n_cells: int = 8, placement: str | None = None,
                             grid_constant: float = 0.0) -> tuple[DemandSearchResult, ...]:
    """Enumerate two-level shape profiles for every corner's weight.

    For each object, path branch, conduct endpoint and direction, the best
    enumerated profile is compared with the value of the engine's extremal
    curve for the same weights, and its high cells are tested for forming
    one contiguous block.
    """
    from .demand_shape import WelfareObject, ad_valorem_phi, phi_coefficients

    if not n_cells <= 12:
        raise ValueError("exhaustive search is limited to 12 cells")
    placement = placement or scenario.placement
    ch, band, t = scenario.change, scenario.shape.band, scenario.shape.transform
    ad_valorem = scenario.mode == "ad_valorem"
    curvature = isinstance(band, CurvatureBand)
    ref = _reference_curve(scenario)
    if curvature:
        lo, hi, target = band.h_lo, band.h_hi, band.delta_f / (ref.s1 - ref.s0)
    else:
        lo, hi, target = band.f_lo, band.f_hi, (ref.g1 - ref.g0) / (ref.s1 - ref.s0)
    profiles = _two_level_assignments(n_cells, lo, hi, min(max(target, lo), hi))
    curves = SampledCurves(t, ch, profiles, curvature)
    ok = curves.admissible()
    profiles, curves = profiles[ok], curves.subset(ok)

    objs = [WelfareObject.CS, WelfareObject.PS, WelfareObject.TS_PRIV]
    if not ad_valorem:
        objs.append(WelfareObject.TS)
    out = []
    for br in PathBranch:
        if ad_valorem:
            path = ad_valorem_cutoff(ch, br)
            cut = min(max(path.cutoff_price, ch.p0), ch.p1)
        else:
            path = extremal_cutoff(ch, scenario.inv, br)
            cut = path.cutoff
        breaks = np.unique(np.concatenate([[ch.p0, cut, ch.p1], curves.price_knots]))
        nodes, weights = _gauss_segments(breaks)
        q = curves.quantity(nodes)
        left = nodes < cut
        if ad_valorem:
            i1 = q[:, left] @ (weights[left] / nodes[left])
            i2 = q[:, ~left] @ (weights[~left] / nodes[~left])
        else:
            i1 = q[:, left] @ weights[left]
            i2 = q[:, ~left] @ weights[~left]
        total = q @ weights
        path_term = path.left_weight * i1 + path.right_weight * i2
        for kappa in scenario.conduct.endpoints:
            ps = total - path_term - kappa * total
            values = {
                WelfareObject.CS: -total,
                WelfareObject.PS: ps,
                WelfareObject.TS_PRIV: ps - total,
            }
            if not ad_valorem:
                values[WelfareObject.TS] = ps - total + delta_tr(ch)
            for obj in objs:
                if ad_valorem:
                    prof = ad_valorem_phi(obj, br, kappa, ch, t)
                else:
                    prof = phi_coefficients(obj, br, kappa, scenario.inv, ch, t)
                vals = values[obj]
                for direction in Direction:
                    upper = direction is Direction.UPPER
                    curve = build_extremal(prof, band, t, direction, ch, placement)
                    bound = prof.evaluate(curve)
                    scale = 1.0 + abs(bound)
                    signed = vals if upper else -vals
                    idx = _preferred_argbest(signed, signed.max(), 1e-12 * scale, profiles,
                                             lambda v: _single_block(v, lo))
                    out.append(DemandSearchResult(
                        obj=obj.value, branch=br.value, kappa=kappa,
                        direction=direction.value, sign_class=prof.sign_class.value,
                        best=float(vals[idx]), bound=bound,
                        argbest=tuple(profiles[idx]),
                        single_block=_single_block(profiles[idx], lo),
                        tolerance=grid_constant * (ch.p1 - ch.p0) / n_cells + 1e-9 * scale,
                    ))
    return tuple(out)


def exhaustive_extremal_search(scenario, n_cells: int = 8, **kwargs) -> ExhaustiveReport:
    paths = exhaustive_path_search(scenario, n_cells) if scenario.mode == "specific" else None
    return ExhaustiveReport(paths, exhaustive_demand_search(scenario, n_cells, **kwargs))


# ---------------------------------------------------------------------------
# convergence


def convergence_study(scenario, grids=(16, 64, 256, 1024), n_samples: int = 2000,
                      seed: int = 0) -> list[dict]:
    """Largest sampled upper-bound gap per object as the grid is refined."""
    rows = []
    bounds = four_corner_bounds(scenario)
    for n in grids:
        cfg = SampleConfig(n_samples, seed, path_grid_for(scenario, n))
        rep = verify_containment(scenario, cfg, bounds)
        rows.append({
            "n_cells": n,
            "n_samples": n_samples,
            "violations": rep.n_violations,
            "upper_gap": {k: v[0] for k, v in rep.max_attained_gap.items()},
            "lower_gap": {k: v[1] for k, v in rep.max_attained_gap.items()},
        })
    return rows
