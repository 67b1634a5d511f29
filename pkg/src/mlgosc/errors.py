"""Exception types raised by mlgosc."""


class MlgError(Exception):
    """Base class for all library errors."""


class TruncationError(MlgError):
    """A Fock-space or spectral-sum cutoff is too small for the requested tolerance."""


class ZeroNormError(MlgError):
    """An operator image vanished, so it cannot be normalized."""


class SeriesError(MlgError):
    """Generating-function coefficient extraction lost too much precision."""


class WindowMismatchError(MlgError):
    """Correlator windows are not nested/contiguous as an inequality requires."""


class CouplingError(MlgError):
    """Operation is not defined for the given detector coupling."""


class DomainError(MlgError):
    """An empty or malformed search domain."""


class DwellTimeError(MlgError):
    """Dwell time too small to normalize a correlator by."""
