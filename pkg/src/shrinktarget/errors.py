"""Exception types shared across the package.

Exit-code mapping used by the CLI: ConfigInvalid -> 2, precondition
violations (ValueError and subclasses such as SlopeTooSmall) -> 3,
PrecisionExhausted -> 4, TolUnreachable -> 5.
"""


class PrecisionExhausted(RuntimeError):
    """An enclosure grew past the width tolerance.

    ``step`` records the last orbit step that completed; ``last_checkpoint``
    (when set by a counting run) carries the last fully evaluated checkpoint.
    """

    def __init__(self, message, step=None, last_checkpoint=None):
        super().__init__(message)
        self.step = step
        self.last_checkpoint = last_checkpoint


class BudgetTooLarge(ValueError):
    """A required precision exceeds the configured bit cap."""


class TolUnreachable(ValueError):
    """A requested tolerance would need a truncation order past the cap."""


class Indeterminate(RuntimeError):
    """An enclosure is too wide to decide a predicate; retry at higher precision."""


class SingularMatrix(ValueError):
    """Integer matrix with zero determinant."""


class SlopeTooSmall(ValueError):
    """Markov construction requires slope modulus strictly greater than 8."""


class DegenerateF(ValueError):
    """Conditioning set F has measure below the usable floor."""


class OutOfTable(ValueError):
    """Table rate function evaluated past its range with no extension rule."""


class InfiniteCoordinate(ValueError):
    """theta_i requested at a coordinate with t_i = +inf; use unbounded_bounds."""


class UnboundedU(ValueError):
    """Accumulation set has an infinite coordinate; use unbounded_bounds."""


class RateNotVanishing(ValueError):
    """The degenerate-eigenvalue reduction for beta = +-1 needs psi(n) -> 0."""


class AmbiguityBudgetExceeded(RuntimeError):
    """Interval-arithmetic indecision exceeded the configured fraction of hits."""


class ConfigInvalid(ValueError):
    """Experiment config failed validation; ``field`` is the offending key path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
