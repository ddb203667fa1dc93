class FentropyBaseError(Exception):
    """Base class for all fentropy errors."""


class ConfigError(FentropyBaseError):
    """A run config references missing blocks or holds out-of-range options."""


# Words and Cayley trees


class RankMismatchError(FentropyBaseError):
    pass


class WordFormatError(FentropyBaseError):
    pass


class NotRightConnectedError(FentropyBaseError):
    pass


class NotLeftConnectedError(FentropyBaseError):
    pass


class NotBiConnectedError(FentropyBaseError):
    pass


class MissingIdentityError(FentropyBaseError):
    pass


# Subgroups


class NonBijectiveError(FentropyBaseError):
    pass


class NotTransitiveError(FentropyBaseError):
    pass


class NotNormalError(FentropyBaseError):
    pass


class NotInSubgroupError(FentropyBaseError):
    pass


class ImageTooLargeError(FentropyBaseError):
    pass


class NotVirtuallyFreeError(FentropyBaseError):
    pass


# Measures


class BadStochasticError(FentropyBaseError):
    pass


class NotStationaryError(FentropyBaseError):
    pass


class ZeroMassError(FentropyBaseError):
    """A symbol has zero stationary mass; prune it before building the measure."""


class NotInvariantError(FentropyBaseError):
    pass


class HullTooLargeError(FentropyBaseError):
    pass


class InconsistentMarginalsError(FentropyBaseError):
    pass


# Entropy


class NotADistributionError(FentropyBaseError):
    pass


class InternalError(FentropyBaseError):
    """A numerical check that a theorem guarantees has failed."""
