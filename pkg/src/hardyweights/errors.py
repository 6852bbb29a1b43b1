"""Exception hierarchy shared by every module."""


class HardyWeightsError(Exception):
    """Base class for all toolkit errors."""


class DivergentTail(HardyWeightsError):
    pass


class UncertifiableTail(HardyWeightsError):
    pass


class UnsupportedFamily(HardyWeightsError):
    pass


class ZeroCumulativeWeight(HardyWeightsError):
    pass


class ZeroDenominator(HardyWeightsError):
    pass


class NotQuasiMonotone(HardyWeightsError):
    pass


class VerificationFailure(HardyWeightsError):
    """A numeric scan contradicted a bound that should hold."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InvalidRegime(HardyWeightsError):
    pass


class OutOfRange(HardyWeightsError):
    pass


class NotMember(HardyWeightsError):
    pass


class BisectionExhausted(HardyWeightsError):
    pass


class EmptyGrid(HardyWeightsError):
    pass


class HypothesisViolated(HardyWeightsError):
    pass


class ZeroPartialSum(HardyWeightsError):
    pass


class ConvergentSum(HardyWeightsError):
    pass


class BadRange(HardyWeightsError):
    pass


class PreconditionFailed(HardyWeightsError):
    pass
