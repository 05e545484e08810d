"""Exception hierarchy shared by every module of the package."""


class WelfareBoundsError(Exception):
    """Base class for all package errors."""


class SchemaError(WelfareBoundsError):
    """A scenario document is malformed.

    ``errors`` carries every problem found, as ``(locus, message)`` pairs.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"{loc}: {msg}" for loc, msg in self.errors)
        super().__init__(lines or "invalid scenario")


class SignConventionViolated(WelfareBoundsError):
    """Snapshots disagree with dp > 0, dQ < 0, dtau > 0."""


class InfeasibleScenario(WelfareBoundsError):
    """The tax budget cannot be met by any admissible pass-through path."""


class DegenerateInterval(InfeasibleScenario):
    """Point pass-through interval whose budget does not match the data."""


class InfeasibleShape(WelfareBoundsError):
    """No demand curve in the shape class joins the two snapshots."""


class DegenerateBand(InfeasibleShape):
    """Point shape band inconsistent with the chord between the snapshots."""


class NegativeDemand(InfeasibleShape):
    """A constructed curve implies negative quantity somewhere."""


class NonmonotoneDemand(InfeasibleShape):
    """A constructed curve slopes upward somewhere."""


class OutOfSupport(WelfareBoundsError):
    """Evaluation point outside the price support."""


class DomainError(WelfareBoundsError):
    """Log transform applied to a nonpositive value."""


class ZeroQuantity(WelfareBoundsError):
    """Quantity is zero where a ratio by it is required."""


class ZeroElasticity(WelfareBoundsError):
    """Elasticity is zero where its reciprocal is required."""


class FlatDemand(WelfareBoundsError):
    """Demand slope is zero, so inverse-demand slope is undefined."""


class ToleranceNotMet(WelfareBoundsError):
    """Adaptive quadrature hit its depth limit before converging."""
