"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class ConvertibleError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 2


class ParameterError(ConvertibleError, ValueError):
    """Invalid parameters (code sizes, field widths, partition shapes)."""


class RegimeError(ParameterError):
    """A bound or planner was called outside the parameter regime it covers."""


class ZeroInverseError(ConvertibleError, ZeroDivisionError):
    """Multiplicative inverse of the zero element."""


class SingularMatrixError(ConvertibleError):
    """Linear solve or inversion of a singular matrix."""


class BudgetError(ConvertibleError):
    """An exhaustive check would exceed its configured work budget."""


class ConstructionError(ConvertibleError):
    """A code with the requested properties could not be constructed."""

    exit_code = 3


class SearchExhaustedError(ConstructionError):
    """A seeded search ran out of draws without finding a valid code."""


class PlanInconsistencyError(ConvertibleError):
    """A conversion plan violates the node taxonomy or does not fit its spec."""

    exit_code = 1


class PayloadCorruptionError(ConvertibleError):
    """Stored data is not a valid codeword or fails manifest checks."""

    exit_code = 1
