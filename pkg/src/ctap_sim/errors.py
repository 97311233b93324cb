"""Exception types shared across the simulator."""


class CtapSimError(Exception):
    """Base class for all simulator errors."""


class NonHermitianInput(CtapSimError):
    pass


class DidNotConverge(CtapSimError):
    pass


class InvalidGeometry(CtapSimError):
    pass


class SingularTime(CtapSimError):
    pass


class BadRates(CtapSimError):
    pass


class DimensionTooLarge(CtapSimError):
    pass


class TooManyBlocks(CtapSimError):
    pass


class DimensionMismatch(CtapSimError):
    pass


class UndefinedMixingAngle(CtapSimError):
    pass


class NormDrift(CtapSimError):
    pass


class PositivityLoss(CtapSimError):
    pass


class ConfigError(CtapSimError):
    pass
