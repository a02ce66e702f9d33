"""Exception hierarchy.

Every numerical failure raised by the package derives from
:class:`TwoDelayError`, so callers (and the CLI) can catch one type.
"""


class TwoDelayError(Exception):
    """Base class for all package errors."""


# model / integrator
class WellPosednessViolated(TwoDelayError):
    pass


class DegenerateStateDependence(TwoDelayError):
    pass


class HistoryOutOfRange(TwoDelayError):
    pass


class HistoryTooShort(HistoryOutOfRange):
    pass


class DelayAdvanced(TwoDelayError):
    pass


class BoundViolated(TwoDelayError):
    pass


class StepCollapse(TwoDelayError):
    pass


class OutOfRange(TwoDelayError):
    pass


# spectral
class NoConvergence(TwoDelayError):
    pass


class JacobianSingular(TwoDelayError):
    pass


class SeedNotOnBranch(TwoDelayError):
    pass


class StrongResonance(TwoDelayError):
    pass


class CharacteristicDegenerate(TwoDelayError):
    pass


class RegularityViolated(TwoDelayError):
    pass


# normal form
class NormalizationDegenerate(TwoDelayError):
    pass


class ResonantDenominator(TwoDelayError):
    pass


class DegenerateCubic(TwoDelayError):
    pass


class WrongCase(TwoDelayError):
    pass


# dynamics
class TooFewEvents(TwoDelayError):
    pass
