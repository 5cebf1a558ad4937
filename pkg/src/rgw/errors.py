"""Exception hierarchy.

Errors fall in two families that the CLI maps to distinct exit codes:
``InvalidInput`` (bad laws, parameters, configs) and ``NumericFailure``
(an algorithm did not reach its tolerance or budget).
"""


class RGWError(Exception):
    """Base class for every error raised by the package."""


class InvalidInput(RGWError, ValueError):
    pass


class NumericFailure(RGWError, ArithmeticError):
    pass


# reproduction laws and parameters
class NotAProbabilityVector(InvalidInput):
    pass


class TopAtomMissing(InvalidInput):
    pass


class DegenerateSupport(InvalidInput):
    pass


class InvalidReinforcement(InvalidInput):
    pass


class ColorOutsideSupport(InvalidInput):
    pass


class ZeroMeanLaw(InvalidInput):
    pass


class QNotPositive(InvalidInput):
    pass


class PoleAtUnitActivity(InvalidInput):
    pass


class NotComparable(InvalidInput):
    pass


class PathTooShort(InvalidInput):
    pass


class NotApplicable(InvalidInput):
    pass


class ConfigError(InvalidInput):
    pass


# numerics
class QuadratureFailure(NumericFailure):
    pass


class RootCountMismatch(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass


class HorizonTooLarge(NumericFailure):
    pass


class TreeBudgetExceeded(NumericFailure):
    pass
