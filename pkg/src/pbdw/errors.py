"""Exception hierarchy shared across the toolkit.

``NumericalFailure`` subclasses signal conditions the experiment driver maps
to exit code 3 (identifiability, unisolvency, stability); ``ConfigError``
maps to exit code 2.
"""


class PBDWError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PBDWError):
    """Invalid or inconsistent experiment configuration."""


class NumericalFailure(PBDWError):
    """Base class for numerical breakdowns of the formulation."""


class RankDeficiencyError(NumericalFailure):
    """A basis candidate is linearly dependent on its predecessors."""

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(
            message
            or f"basis element {index + 1} is linearly dependent on the previous ones"
        )


class UnisolvencyError(NumericalFailure):
    """The observation functionals do not determine the update space."""


class IdentifiabilityError(NumericalFailure):
    """A background direction is invisible to every observation functional."""


class StabilityError(NumericalFailure):
    """An inf-sup or operator-norm eigenproblem is numerically degenerate."""


class PlacementError(NumericalFailure):
    """Greedy sensor placement broke down at some iteration."""

    def __init__(self, iteration: int, message: str):
        self.iteration = iteration
        super().__init__(f"placement iteration {iteration}: {message}")
