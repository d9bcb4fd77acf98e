"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`RqfiError`, which itself subclasses :class:`ValueError` so that
callers doing plain input validation keep working.
"""


class RqfiError(ValueError):
    """Base class for all library errors."""


class ZeroNorm(RqfiError):
    pass


class NonFinite(RqfiError):
    pass


class QuadratureDomainTooSmall(RqfiError):
    pass


class EpsilonNegative(RqfiError):
    """A mode-distortion coefficient came out clearly negative.

    Usually means the sampled PSF is too coarse or the quadrature domain
    cuts off part of the function.
    """


class EtaOutOfRange(RqfiError):
    pass


class DegenerateAngle(RqfiError):
    pass


class CutoffOverflow(RqfiError):
    pass


class UnsupportedBasis(RqfiError):
    pass


class UnsupportedState(RqfiError):
    pass


class UnphysicalState(RqfiError):
    pass


class ZeroInformation(RqfiError):
    pass


class TruncationBudgetExceeded(RqfiError):
    def __init__(self, budget: str, value: float, limit: float):
        self.budget = budget
        self.value = value
        self.limit = limit
        super().__init__(f"truncation budget '{budget}' exceeded: {value:.3e} > {limit:.3e}")


class UnsupportedPsf(RqfiError):
    pass


class IllConditioned(RqfiError):
    pass


class FlatLikelihood(RqfiError):
    pass


class DegenerateDistribution(RqfiError):
    pass
