"""Exception hierarchy shared by every module of the package."""


class NoisyDupError(ValueError):
    """Base class for all model, data and numerical errors raised here."""


class DimensionError(NoisyDupError):
    pass


class RowSumError(NoisyDupError):
    pass


class ReducibleError(NoisyDupError):
    pass


class RangeError(NoisyDupError):
    pass


class SingularSystemError(NoisyDupError):
    pass


class ZeroProbabilityError(NoisyDupError):
    """An observed sequence has probability zero under the model."""


class LengthError(NoisyDupError):
    """Output length is outside the band reachable with the given segment count."""


class TooLargeError(NoisyDupError):
    """An exhaustive enumeration would exceed the configured term budget."""


class ConfigError(NoisyDupError):
    pass
