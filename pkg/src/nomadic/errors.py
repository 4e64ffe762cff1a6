"""Exception types raised across the package."""

__all__ = [
    "NomadicError",
    "NonHermitian",
    "NotPSD",
    "TooManyAgents",
    "NonFinite",
    "NoSignChange",
    "BracketFailure",
    "ConstraintViolated",
    "SingularLambda",
    "InfeasibleCovariance",
    "EmptySubset",
    "BadRange",
    "ZeroOutage",
    "SpecError",
]


class NomadicError(Exception):
    """Base class for all package errors."""


class NonHermitian(NomadicError, ValueError):
    """Matrix expected to be Hermitian is not."""


class NotPSD(NomadicError, ValueError):
    """Matrix expected to be positive semidefinite has a negative eigenvalue."""


class TooManyAgents(NomadicError, ValueError):
    """Exhaustive enumeration requested for too many agents."""


class NonFinite(NomadicError, ArithmeticError):
    """Objective returned NaN or Inf."""


class NoSignChange(NomadicError, ArithmeticError):
    """Bisection bracket does not enclose a sign change."""


class BracketFailure(NoSignChange):
    """Implicit equation has no root on the allowed bracket."""


class ConstraintViolated(NomadicError, ValueError):
    """A link-capacity constraint is violated.

    Attributes
    ----------
    agent : int
        Zero-based index of the offending agent.
    slack : float
        Constraint value minus capacity (positive means violated).
    """

    def __init__(self, agent, slack):
        self.agent = int(agent)
        self.slack = float(slack)
        super().__init__(
            f"link constraint of agent {self.agent} exceeded by {self.slack:.3g} bits"
        )


class SingularLambda(NomadicError, ValueError):
    """Quantization covariance is not positive semidefinite."""


class InfeasibleCovariance(NomadicError, ValueError):
    """Transmit covariances violate ordering constraints on a sample."""

    def __init__(self, sample, message="covariance constraint violated"):
        self.sample = int(sample)
        super().__init__(f"sample {self.sample}: {message}")


class EmptySubset(NomadicError, ValueError):
    """Operation requires a nonempty agent subset."""


class BadRange(NomadicError, ValueError):
    """Argument outside its admissible range."""


class ZeroOutage(NomadicError, ArithmeticError):
    """No outage events observed; the ensemble is too small."""


class SpecError(NomadicError, ValueError):
    """Invalid experiment specification."""
