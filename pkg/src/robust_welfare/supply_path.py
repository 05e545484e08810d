"""Extremal inverse pass-through paths and the path term they generate.

For a fixed nonincreasing demand curve, the path term ``int Q u dp`` is
linear in ``u`` over a box-and-budget set, so its extremes are bang-bang:
``u`` sits at ``beta`` on one side of a single cutoff and ``alpha`` on the
other. The Max path puts the high weight where demand is largest (low
prices); the Min path puts it at the top of the price range.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DegenerateInterval, InfeasibleScenario, OutOfSupport
from .model import (
    REL_TOL,
    AdValoremChange,
    InversePassThroughBounds,
    PolicyChange,
    check_ad_valorem_feasibility,
    check_path_feasibility,
)
from .quadrature import DEFAULT_SETTINGS, QuadratureSettings, integrate, integrate_over_price


class PathBranch(enum.Enum):
    MAX = "max"
    MIN = "min"


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


@dataclass(frozen=True)
class ExtremalPath:
    """Bang-bang inverse pass-through on ``[p_lo, p_hi]`` with one switch.

    Max: ``beta`` on ``[p_lo, cutoff)``, ``alpha`` on ``[cutoff, p_hi]``.
    Min: the mirror image. The cutoff belongs to the right-hand piece.
    """

    branch: PathBranch
    cutoff: float
    alpha: float
    beta: float
    p_lo: float
    p_hi: float
    tau0: float = 0.0

    @property
    def left_weight(self) -> float:
        return self.beta if self.branch is PathBranch.MAX else self.alpha

    @property
    def right_weight(self) -> float:
        return self.alpha if self.branch is PathBranch.MAX else self.beta

    @property
    def high_region(self) -> tuple[float, float]:
        """Price interval on which the weight equals ``beta``."""
        if self.branch is PathBranch.MAX:
            return (self.p_lo, self.cutoff)
        return (self.cutoff, self.p_hi)

    def budget(self) -> float:
        return self.left_weight * (self.cutoff - self.p_lo) + self.right_weight * (
            self.p_hi - self.cutoff
        )

    def weight_at(self, p: float) -> float:
        return path_weight_at(self, p)

    def tau_at(self, p: float) -> float:
        """Tax level reached at price ``p``: ``tau0`` plus the accumulated weight."""
        if not self.p_lo <= p <= self.p_hi:
            raise OutOfSupport(f"price {p} outside [{self.p_lo}, {self.p_hi}]")
        left = min(p, self.cutoff) - self.p_lo
        right = max(p - self.cutoff, 0.0)
        return self.tau0 + self.left_weight * left + self.right_weight * right


@dataclass(frozen=True)
class AdValoremPath:
    """Bang-bang weight ``dxi/dlog p`` on ``[x_lo, x_hi]`` with one switch."""

    branch: PathBranch
    cutoff_x: float
    w_lo: float
    w_hi: float
    x_lo: float
    x_hi: float

    @property
    def left_weight(self) -> float:
        return self.w_hi if self.branch is PathBranch.MAX else self.w_lo

    @property
    def right_weight(self) -> float:
        return self.w_lo if self.branch is PathBranch.MAX else self.w_hi

    @property
    def cutoff_price(self) -> float:
        return math.exp(self.cutoff_x)

    @property
    def high_region(self) -> tuple[float, float]:
        """Price interval on which the weight equals ``w_hi``."""
        if self.branch is PathBranch.MAX:
            return (math.exp(self.x_lo), self.cutoff_price)
        return (self.cutoff_price, math.exp(self.x_hi))

    def budget(self) -> float:
        return self.left_weight * (self.cutoff_x - self.x_lo) + self.right_weight * (
            self.x_hi - self.cutoff_x
        )

    def weight_at_x(self, x: float) -> float:
        if not self.x_lo <= x <= self.x_hi:
            raise OutOfSupport(f"log-price {x} outside [{self.x_lo}, {self.x_hi}]")
        return self.left_weight if x < self.cutoff_x else self.right_weight

    def xi_at_x(self, x: float, xi0: float = 0.0) -> float:
        left = min(x, self.cutoff_x) - self.x_lo
        right = max(x - self.cutoff_x, 0.0)
        return xi0 + self.left_weight * left + self.right_weight * right


def _bang_bang_cutoff(lo, hi, budget, w_lo, w_hi, branch):
    """Cutoff for a {w_lo, w_hi} step on [lo, hi] integrating to ``budget``."""
    # length carrying the high weight
    span = hi - lo
    high_len = (budget - w_lo * span) / (w_hi - w_lo)
    high_len = _clamp(high_len, 0.0, span)
    if branch is PathBranch.MAX:
        return lo + high_len
    return hi - high_len


def extremal_cutoff(
    pc: PolicyChange, inv: InversePassThroughBounds, branch: PathBranch
) -> ExtremalPath:
    """Single-switch path maximising (Max) or minimising (Min) ``int Q u dp``."""
    p0, p1 = pc.p0, pc.p1
    if inv.alpha == inv.beta:
        if abs(pc.delta_tau - inv.alpha * pc.delta_p) > REL_TOL * max(
            abs(pc.delta_tau), 1.0
        ):
            raise DegenerateInterval(
                f"point pass-through needs tax change {inv.alpha * pc.delta_p}, "
                f"observed {pc.delta_tau}"
            )
        return ExtremalPath(branch, p0, inv.alpha, inv.beta, p0, p1, pc.pre.tax)
    if not check_path_feasibility(pc, inv):
        raise InfeasibleScenario(
            f"tax change {pc.delta_tau} outside [{inv.alpha * pc.delta_p}, "
            f"{inv.beta * pc.delta_p}]"
        )
    if branch is PathBranch.MAX:
        cut = p0 + (pc.delta_tau - inv.alpha * pc.delta_p) / (inv.beta - inv.alpha)
    else:
        cut = p0 + (inv.beta * pc.delta_p - pc.delta_tau) / (inv.beta - inv.alpha)
    return ExtremalPath(branch, _clamp(cut, p0, p1), inv.alpha, inv.beta, p0, p1, pc.pre.tax)


def path_weight_at(path: ExtremalPath, p: float) -> float:
    if not path.p_lo <= p <= path.p_hi:
        raise OutOfSupport(f"price {p} outside [{path.p_lo}, {path.p_hi}]")
    return path.left_weight if p < path.cutoff else path.right_weight


def _demand_integral(demand, a: float, b: float, quad: QuadratureSettings) -> float:
    if hasattr(demand, "integral"):
        return demand.integral(a, b)
    return integrate(demand, a, b, quad)


def _demand_price_integral(demand, a: float, b: float, quad: QuadratureSettings) -> float:
    if hasattr(demand, "price_weighted_integral"):
        return demand.price_weighted_integral(a, b)
    return integrate_over_price(demand, a, b, quad)


def building_blocks(
    demand, path: ExtremalPath, quad: QuadratureSettings = DEFAULT_SETTINGS
) -> tuple[float, float]:
    """``(I1, I2)``: demand integrated left and right of the cutoff."""
    return (
        _demand_integral(demand, path.p_lo, path.cutoff, quad),
        _demand_integral(demand, path.cutoff, path.p_hi, quad),
    )


def path_term(demand, path: ExtremalPath, quad: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """``int Q u dp`` along ``path``.

    ``demand`` is either a curve object exposing ``integral(a, b)`` or a plain
    callable, which is then integrated numerically.
    """
    i1, i2 = building_blocks(demand, path, quad)
    return path.left_weight * i1 + path.right_weight * i2


def ad_valorem_cutoff(av: AdValoremChange, branch: PathBranch) -> AdValoremPath:
    if av.w_lo == av.w_hi:
        if abs(av.delta_xi - av.w_lo * av.delta_x) > REL_TOL * max(abs(av.delta_xi), 1.0):
            raise DegenerateInterval(
                f"point ad valorem pass-through needs rate change {av.w_lo * av.delta_x}, "
                f"observed {av.delta_xi}"
            )
        return AdValoremPath(branch, av.x0, av.w_lo, av.w_hi, av.x0, av.x1)
    if not check_ad_valorem_feasibility(av):
        raise InfeasibleScenario(
            f"rate change {av.delta_xi} outside [{av.w_lo * av.delta_x}, {av.w_hi * av.delta_x}]"
        )
    cut = _bang_bang_cutoff(av.x0, av.x1, av.delta_xi, av.w_lo, av.w_hi, branch)
    return AdValoremPath(branch, cut, av.w_lo, av.w_hi, av.x0, av.x1)


def ad_valorem_building_blocks(
    demand, avp: AdValoremPath, quad: QuadratureSettings = DEFAULT_SETTINGS
) -> tuple[float, float]:
    """``(J1, J2)``: ``int Q/p dp`` left and right of the cutoff price."""
    p_lo, p_hi, p_cut = math.exp(avp.x_lo), math.exp(avp.x_hi), avp.cutoff_price
    p_cut = _clamp(p_cut, p_lo, p_hi)
    return (
        _demand_price_integral(demand, p_lo, p_cut, quad),
        _demand_price_integral(demand, p_cut, p_hi, quad),
    )


def ad_valorem_path_term(
    demand, avp: AdValoremPath, quad: QuadratureSettings = DEFAULT_SETTINGS
) -> float:
    """``int Q(p(xi)) dxi`` along the log-price path ``avp``."""
    j1, j2 = ad_valorem_building_blocks(demand, avp, quad)
    return avp.left_weight * j1 + avp.right_weight * j2
