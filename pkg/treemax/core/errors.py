"""Exceptions raised by the treemax package."""


class TreemaxError(Exception):
    """Base class for all treemax errors."""


class AdmissibilityError(TreemaxError, ValueError):
    """A parameter tuple violates one of the stated admissibility conditions."""

    def __init__(self, condition: str, detail: str = ""):
        """Initialize the error.

        Args:
            condition: The violated condition, e.g. "p > 1".
            detail: Optional description of the offending values.
        """
        self.condition = condition
        message = f"inadmissible parameters: requires {condition}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class BudgetExceededError(TreemaxError):
    """Enumeration would materialize more nodes than the configured budget."""


class HorizonError(TreemaxError):
    """A level or radius scan could not certify decay within its horizon."""


class ConfigError(TreemaxError, ValueError):
    """Malformed configuration or descriptor."""


class CrossCheckError(TreemaxError):
    """Two independent evaluation paths disagree."""
