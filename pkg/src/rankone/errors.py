"""Exception hierarchy shared by all modules."""


class RankOneError(Exception):
    """Base class for every error raised by this package."""


class ScheduleShapeError(RankOneError, ValueError):
    """Spacer vector length does not match the cut count."""


class InvalidStageError(RankOneError, ValueError):
    """Stage parameters violate a construction precondition."""


class InvalidRangeError(RankOneError, IndexError):
    """A stage index or stage range lies outside the schedule."""


class ResourceError(RankOneError, MemoryError):
    """A materialization would exceed the configured budget.

    ``required`` carries the count that was asked for and ``budget`` the limit.
    """

    def __init__(self, message: str, required: int, budget: int):
        super().__init__(f"{message} (required {required}, budget {budget})")
        self.required = required
        self.budget = budget


class HeightOverflowError(RankOneError, OverflowError):
    """Tower height left the unsigned 64-bit range."""


class ParameterError(RankOneError, ValueError):
    """Recipe parameters violate their stated preconditions."""


class OutOfWindowError(RankOneError, ValueError):
    """A power of T moves every point outside the truncation tower."""


class DegenerateFamilyError(RankOneError, ValueError):
    """The pair family does not separate the basis of a weak-limit fit.

    ``dependent`` lists the basis labels found to be linearly dependent.
    """

    def __init__(self, message: str, dependent: list):
        super().__init__(f"{message}: dependent columns {dependent}")
        self.dependent = list(dependent)


class OracleScaleError(RankOneError, ValueError):
    """The brute-force oracle was asked to unroll a tower that is too tall."""


class ConfigError(RankOneError, ValueError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, diagnostics: list | None = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])
