"""
Exception hierarchy for nslfa.

InputError covers anything wrong with what the caller supplied (shapes,
designs, files); NumericalError covers failures of the numerics themselves.
Both also derive from the matching builtin so generic callers can catch
ValueError / ArithmeticError.
"""


class NSLFAError(Exception):
    """Root of all nslfa errors."""


class InputError(NSLFAError, ValueError):
    """Invalid user-supplied input."""


class NumericalError(NSLFAError, ArithmeticError):
    """A numerical procedure failed."""


# ── Input errors ──

class EmptyMatrix(InputError):
    pass


class NonBinaryEntry(InputError):
    pass


class AllZeroRow(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class WrongColumnCount(InputError):
    pass


class MissingLabels(InputError):
    pass


class NonFiniteData(InputError):
    pass


class TooFewRows(InputError):
    pass


class FactorIndexOutOfRange(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class FactorCountTooLarge(InputError):
    pass


class ZeroPatternViolated(InputError):
    pass


class ConstrainedLoading(InputError):
    pass


class UnknownScenario(InputError):
    pass


class IndivisibleJ(InputError):
    pass


# ── Numerical errors ──

class FactorizationFailed(NumericalError):
    pass


class NonFiniteObjective(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class SingularSubproblem(NumericalError):
    pass


class DegenerateDraw(NumericalError):
    pass


class ZeroVector(NumericalError):
    pass


class DegenerateVariance(NumericalError):
    pass
