"""Exception hierarchy shared across the sampler."""

from __future__ import annotations


class HighDivError(Exception):
    """Base class for all sampler errors."""


class EmptyIntervalError(HighDivError):
    pass


class VerificationError(HighDivError):
    """A model failed re-evaluation against the formula it claims to satisfy."""


class DivisibilityError(HighDivError):
    pass


class InconsistentEqualityError(HighDivError):
    """Equality elimination derived a contradiction such as 0 = 3."""


class BudgetExhaustedError(HighDivError):
    pass


class NoMoveError(HighDivError):
    """No integer value of the chosen variable satisfies the target literal."""


class UnsatFormulaError(HighDivError):
    def __init__(self, message: str = "unsat", samples=None):
        super().__init__(message)
        self.samples = samples
