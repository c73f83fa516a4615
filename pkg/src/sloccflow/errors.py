"""Exception types raised by sloccflow."""

from __future__ import annotations


class SloccFlowError(Exception):
    """Base class for all sloccflow errors."""


class ZeroState(SloccFlowError):
    """All amplitudes are below the zero-state tolerance."""


class SectorMismatch(SloccFlowError):
    """Operation applied to states or objects from incompatible sectors."""


class ShapeMismatch(SloccFlowError):
    """Operator or array shapes do not match the sector layout."""


class PartyOutOfRange(SloccFlowError):
    """Party index outside 0..parties-1."""


class IndexOutOfRange(SloccFlowError):
    """Basis or excitation index outside the valid range."""


class NotQubitSector(SloccFlowError):
    """Operation requires local dimension 2."""


class NotInWeylChamber(SloccFlowError):
    """Spectra are not weakly decreasing shifted density spectra."""


class NotConverged(SloccFlowError):
    """Gradient flow hit the iteration cap above tolerance.

    The partial trajectory is attached as ``trace``.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class NotCritical(SloccFlowError):
    """State is not a critical point at the requested tolerance."""


class NotSymmetric(SloccFlowError):
    """Matrix is not complex symmetric."""


class NotAntisymmetric(SloccFlowError):
    """Matrix is not complex antisymmetric."""


class ConvergenceFailure(SloccFlowError):
    """A variational reduction stalled above its residual target."""


class UnknownFamily(SloccFlowError):
    """Unrecognized four-qubit family name."""


class UnknownDemo(SloccFlowError):
    """Unrecognized demo name."""


class Divergent(SloccFlowError):
    """One-parameter limit annihilates the state."""
