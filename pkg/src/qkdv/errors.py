"""Exception types raised by the engine."""


class QKdVError(Exception):
    """Base class for all mathematical failures reported by the engine."""


class NotInImage(QKdVError):
    """A differential polynomial has no d/dx antiderivative."""


class RecursionInconsistent(QKdVError):
    """The two recursion equations for the densities disagree."""


class NotRecognized(QKdVError):
    """A q-series is not a quasimodular form of the requested weight bound."""


class InsufficientOrder(QKdVError):
    """A q-series is truncated too early to identify a quasimodular form."""


class DegenerateSpectrum(QKdVError):
    """The commuting family does not separate two eigenvectors."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
