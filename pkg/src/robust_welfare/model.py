"""Observed market data, supply-side intervals, and exact tax revenue.

Everything here is an immutable value object. Constructors validate their
own invariants so that a value which exists is a value which is usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InfeasibleScenario, SignConventionViolated

# Relative slack used for every interval-membership check on inputs.
REL_TOL = 1e-12


def _le(a: float, b: float, rel: float = REL_TOL) -> bool:
    """``a <= b`` up to a relative tolerance on the larger magnitude."""
    return a <= b + rel * max(abs(a), abs(b), 1.0)


@dataclass(frozen=True)
class Snapshot:
    """One observed equilibrium: consumer price, quantity and specific tax."""

    price: float
    quantity: float
    tax: float = 0.0

    def __post_init__(self):
        for name in ("price", "quantity", "tax"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.price <= 0:
            raise ValueError(f"price must be positive, got {self.price}")
        if self.quantity < 0:
            raise ValueError(f"quantity must be nonnegative, got {self.quantity}")
        if self.tax < 0:
            raise ValueError(f"tax must be nonnegative, got {self.tax}")


@dataclass(frozen=True)
class PolicyChange:
    """Two snapshots around a specific-tax increase, with their deltas."""

    pre: Snapshot
    post: Snapshot
    delta_p: float = field(init=False)
    delta_q: float = field(init=False)
    delta_tau: float = field(init=False)

    def __post_init__(self):
        dp = self.post.price - self.pre.price
        dq = self.post.quantity - self.pre.quantity
        dtau = self.post.tax - self.pre.tax
        problems = []
        if not dp > 0:
            problems.append(f"price change {dp} is not positive")
        if not dq < 0:
            problems.append(f"quantity change {dq} is not negative")
        if not dtau > 0:
            problems.append(f"tax change {dtau} is not positive")
        if problems:
            raise SignConventionViolated("; ".join(problems))
        object.__setattr__(self, "delta_p", dp)
        object.__setattr__(self, "delta_q", dq)
        object.__setattr__(self, "delta_tau", dtau)

    @property
    def p0(self) -> float:
        return self.pre.price

    @property
    def p1(self) -> float:
        return self.post.price


@dataclass(frozen=True)
class PassThroughInterval:
    rho_lo: float
    rho_hi: float

    def __post_init__(self):
        if not (0 < self.rho_lo <= self.rho_hi < math.inf):
            raise ValueError(
                f"need 0 < rho_lo <= rho_hi < inf, got [{self.rho_lo}, {self.rho_hi}]"
            )


@dataclass(frozen=True)
class InversePassThroughBounds:
    """Box ``[alpha, beta]`` for the inverse pass-through ``dtau/dp``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0 < self.alpha <= self.beta < math.inf):
            raise ValueError(
                f"need 0 < alpha <= beta < inf, got [{self.alpha}, {self.beta}]"
            )

    @property
    def near_degenerate(self) -> bool:
        """Interval so thin that cutoff formulas lose most of their digits."""
        return 0 < self.beta - self.alpha < 1e-10 * self.beta


@dataclass(frozen=True)
class ConductInterval:
    kappa_lo: float
    kappa_hi: float

    def __post_init__(self):
        if not (0 <= self.kappa_lo <= self.kappa_hi <= 1):
            raise ValueError(
                f"need 0 <= kappa_lo <= kappa_hi <= 1, got [{self.kappa_lo}, {self.kappa_hi}]"
            )

    @property
    def endpoints(self) -> tuple[float, ...]:
        if self.kappa_lo == self.kappa_hi:
            return (self.kappa_lo,)
        return (self.kappa_lo, self.kappa_hi)


@dataclass(frozen=True)
class AdValoremChange:
    """Two snapshots around an ad valorem rate increase.

    ``w_lo``/``w_hi`` bound the weight ``dxi/dlog p``; they are the
    reciprocals of the ad valorem pass-through interval endpoints.
    """

    xi_pre: float
    xi_post: float
    pre: Snapshot
    post: Snapshot
    w_lo: float
    w_hi: float
    delta_xi: float = field(init=False)
    x0: float = field(init=False)
    x1: float = field(init=False)
    delta_x: float = field(init=False)

    def __post_init__(self):
        if self.xi_pre < 0 or self.xi_post < 0:
            raise ValueError("ad valorem rates must be nonnegative")
        if not (0 < self.w_lo <= self.w_hi < math.inf):
            raise ValueError(f"need 0 < w_lo <= w_hi, got [{self.w_lo}, {self.w_hi}]")
        problems = []
        if not self.post.price > self.pre.price:
            problems.append("price change is not positive")
        if not self.post.quantity < self.pre.quantity:
            problems.append("quantity change is not negative")
        if not self.xi_post > self.xi_pre:
            problems.append("rate change is not positive")
        if problems:
            raise SignConventionViolated("; ".join(problems))
        x0, x1 = math.log(self.pre.price), math.log(self.post.price)
        object.__setattr__(self, "delta_xi", self.xi_post - self.xi_pre)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "delta_x", x1 - x0)

    @property
    def p0(self) -> float:
        return self.pre.price

    @property
    def p1(self) -> float:
        return self.post.price


def build_policy_change(pre: Snapshot, post: Snapshot) -> PolicyChange:
    """Pair two snapshots; raises :class:`SignConventionViolated` on bad signs."""
    return PolicyChange(pre, post)


def build_ad_valorem_change(
    pre: Snapshot,
    post: Snapshot,
    xi_pre: float,
    xi_post: float,
    rho_a_lo: float,
    rho_a_hi: float,
) -> AdValoremChange:
    if not (0 < rho_a_lo <= rho_a_hi < math.inf):
        raise ValueError(f"need 0 < rho_a_lo <= rho_a_hi, got [{rho_a_lo}, {rho_a_hi}]")
    return AdValoremChange(xi_pre, xi_post, pre, post, 1.0 / rho_a_hi, 1.0 / rho_a_lo)


def inverse_passthrough_bounds(pt: PassThroughInterval) -> InversePassThroughBounds:
    return InversePassThroughBounds(alpha=1.0 / pt.rho_hi, beta=1.0 / pt.rho_lo)


def check_path_feasibility(pc: PolicyChange, inv: InversePassThroughBounds) -> bool:
    """True iff some path with ``u`` in ``[alpha, beta]`` accumulates ``delta_tau``."""
    return _le(inv.alpha * pc.delta_p, pc.delta_tau) and _le(
        pc.delta_tau, inv.beta * pc.delta_p
    )


def check_ad_valorem_feasibility(av: AdValoremChange) -> bool:
    return _le(av.w_lo * av.delta_x, av.delta_xi) and _le(av.delta_xi, av.w_hi * av.delta_x)


def require_path_feasible(pc: PolicyChange, inv: InversePassThroughBounds) -> None:
    if not check_path_feasibility(pc, inv):
        raise InfeasibleScenario(
            f"tax change {pc.delta_tau} outside [{inv.alpha * pc.delta_p}, "
            f"{inv.beta * pc.delta_p}] implied by the pass-through interval"
        )


def delta_tr(pc: PolicyChange) -> float:
    """Exact change in tax revenue, ``tau1*Q1 - tau0*Q0``."""
    return pc.post.tax * pc.post.quantity - pc.pre.tax * pc.pre.quantity
