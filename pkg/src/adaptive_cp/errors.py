"""Exception hierarchy.

Every error raised for invalid input derives from :class:`AdaptiveCPError`,
which is itself a :class:`ValueError`, so callers can catch either.
"""


class AdaptiveCPError(ValueError):
    """Base class for all invalid-input errors raised by this package."""


# numerology
class PlanningError(AdaptiveCPError):
    pass


class CPExceedsSymbolError(PlanningError):
    pass


class BlockTooLargeError(PlanningError):
    pass


class NoFeasibleClockError(PlanningError):
    pass


class EmptyGroupError(PlanningError):
    pass


class OutOfRangeError(PlanningError):
    pass


# dsp_core
class TransformSizeError(AdaptiveCPError):
    pass


class ShrinkError(AdaptiveCPError):
    pass


class AliasError(AdaptiveCPError):
    pass


class KernelLengthError(AdaptiveCPError):
    pass


# channel
class ZeroPowerError(AdaptiveCPError):
    pass


class LengthTooShortError(AdaptiveCPError):
    pass


# resampler
class InfeasibleFilterError(AdaptiveCPError):
    pass


class MismatchedPrototypeError(AdaptiveCPError):
    pass


class RankError(AdaptiveCPError):
    pass


# transceiver / scenario
class ConfigMismatchError(AdaptiveCPError):
    pass


class ZeroChannelBinError(AdaptiveCPError):
    pass


class LengthMismatchError(AdaptiveCPError):
    pass


class OverlappingSubcarrierError(AdaptiveCPError):
    pass
