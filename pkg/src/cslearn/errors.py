"""Exception hierarchy.

Two families: :class:`InputError` for anything the caller got wrong (bad
shapes, bad parameters, files that do not parse) and :class:`NumericalError`
for inputs that are well formed but numerically degenerate. The CLI maps the
first to exit code 2 and the second to exit code 3.
"""


class CslError(Exception):
    """Base class for every error raised by this package."""


class InputError(CslError, ValueError):
    pass


class NumericalError(CslError, ArithmeticError):
    pass


class InvariantViolation(CslError, AssertionError):
    """An internal post-condition failed. Always a bug."""


# -- input errors -----------------------------------------------------------

class NonFiniteInput(InputError):
    pass


class BadDims(InputError):
    pass


class DimMismatch(InputError):
    pass


class AmbientMismatch(DimMismatch):
    pass


class LengthNotPowerOfTwo(InputError):
    pass


class CountExceedsPopulation(InputError):
    pass


class NotSymmetric(InputError):
    pass


class RankDeficient(InputError):
    pass


class ZeroVector(InputError):
    pass


class UnequalDimUnsupported(InputError):
    def __init__(self, kind):
        self.kind = kind
        super().__init__(
            f"distance {kind} is only defined for subspaces of equal dimension")


class OddTargetDim(BadDims):
    pass


class TooLarge(InputError):
    pass


class AmbientTooSmall(BadDims):
    pass


class MissingBasis(InputError):
    pass


class EmptyBank(InputError):
    pass


class BadAffinity(InputError):
    pass


class BadClusterCount(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DegenerateAtom(InputError):
    pass


class DegenerateInput(InputError):
    pass


class InsufficientData(InputError):
    pass


class ConfigError(InputError):
    pass


# -- numerical errors -------------------------------------------------------

class NoConvergence(NumericalError):
    pass


class DimensionCollapsed(NumericalError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class NonPositiveEigenvalue(DegenerateSpectrum):
    pass
