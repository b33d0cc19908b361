"""Exception types shared across the package."""


class FairforgeError(Exception):
    """Base class for all package-specific errors."""


class MissingColumnError(FairforgeError):
    """A schema-referenced column is absent from the CSV header."""


class NonBinaryLabelError(FairforgeError):
    """The label column holds more than two distinct values."""


class EmptyGroupError(FairforgeError):
    """A demographic group (or a (group, label) stratum) has no instances."""


class EmptyMatchingError(FairforgeError):
    """A matched-pairs metric was asked to evaluate an empty pair list."""


class EmptyEOOPoolError(EmptyGroupError):
    """Under the EOO regime a group has no true-positive (y=1) instances."""


class ShapeMismatchError(FairforgeError):
    """Array shapes do not match the model's expected dimensions."""


class NonFiniteError(FairforgeError):
    """A NaN or Inf appeared where a finite number is required."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class NoFeasibleCandidateError(FairforgeError):
    """Every candidate breaches the stakeholder's accuracy tolerance."""


class PlanError(FairforgeError):
    """A sweep plan, train config, or stakeholder profile failed validation."""
