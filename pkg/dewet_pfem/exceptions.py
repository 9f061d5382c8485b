"""
This module provides exception classes for the dewet_pfem package.

Every error raised by the library derives from Error, so callers can catch
the whole family with a single except clause. Step failures carry the step
index and the phase (predictor, corrector, bootstrap) they occurred in.
"""


class Error(Exception):
    """Root of all dewet_pfem errors."""


class ParameterError(Error, ValueError):
    """A numeric parameter is outside its documented domain."""


class ConfigError(ParameterError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message, key=None):
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)
        self.key = key


class CurveError(Error):
    """A polygonal curve violates one of its invariants."""


class DegenerateMeshError(CurveError):
    """A segment of the curve has zero length."""


class ContactCrossingError(CurveError):
    """The left contact point lies to the right of the right one."""


class RegionError(Error):
    """The region bounded by a curve and the substrate is unusable."""


class NonSimpleRegionError(RegionError):
    """The substrate-closed polygon self-intersects."""


class ClippingError(RegionError):
    """The polygon boolean operation failed."""


class SchemeError(Error):
    """Base class for time stepping failures."""


class WellPosednessError(SchemeError):
    """The reference curve violates the well-posedness conditions."""


class SolveError(SchemeError):
    """
    The linear system could not be solved to tolerance.

    residual -- max-norm residual of the returned solution, or None if the
                factorization itself failed
    matrix_norm -- 1-norm of the system matrix
    condition -- estimated 1-norm condition number, when available
    """

    def __init__(self, message, residual=None, matrix_norm=None, condition=None):
        super().__init__(message)
        self.residual = residual
        self.matrix_norm = matrix_norm
        self.condition = condition


class RankDeficientError(SchemeError):
    """The least-squares problem for the initial curvature is rank deficient."""


class HistoryError(SchemeError):
    """A multistep history is too short or inconsistent."""


class StepFailure(SchemeError):
    """
    A time step failed.

    step -- index m of the step that was attempted (producing m+1), or None
    phase -- 'predictor', 'corrector', 'bootstrap' or None
    """

    def __init__(self, message, step=None, phase=None):
        parts = [message]
        if phase is not None:
            parts.insert(0, f"[{phase}]")
        if step is not None:
            parts.insert(0, f"step {step}:")
        super().__init__(" ".join(parts))
        self.reason = message
        self.step = step
        self.phase = phase


class HarnessError(Error):
    """Base class for trajectory and study failures."""


class TrajectoryError(HarnessError):
    """
    A trajectory aborted. The last accepted curve and the partial record are
    attached so that callers can write a diagnostic snapshot.
    """

    def __init__(self, message, last_curve=None, record=None):
        super().__init__(message)
        self.last_curve = last_curve
        self.record = record


class EquilibriumNotReached(TrajectoryError):
    """The equilibrium criterion was not met within the step cap."""
