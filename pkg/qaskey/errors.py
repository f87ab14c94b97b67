"""
qaskey errors.py
Exception hierarchy shared by the numeric kernels. Library code raises, never prints.
"""

__all__ = [
    "QaskeyError", "DomainError", "ConvergenceError", "DivergenceError", "ShapeError",
    "SingularRepresentationError", "QuadratureError", "PrecisionError", "PoleOrderError",
    "SingularSystemError",
]


class QaskeyError(Exception):
    """Root of every error raised by qaskey."""


class DomainError(QaskeyError):
    """Input outside the domain of a formula (zero parameter, pole, wrong regime)."""


class ConvergenceError(QaskeyError):
    """Truncated sum or product did not reach its tail bound within the iteration cap."""


class DivergenceError(DomainError):
    """Nonterminating series whose convergence class is divergent."""


class ShapeError(QaskeyError):
    """A transformation was applied to a series of the wrong shape."""


class SingularRepresentationError(DomainError):
    """A denominator parameter of the chosen representation hits the q-lattice."""


class QuadratureError(ConvergenceError):
    """Quadrature refinement stalled before reaching the requested tolerance."""


class PrecisionError(QaskeyError):
    """Exact evaluation lost more digits than the tolerance budget allows."""


class PoleOrderError(QaskeyError):
    """The scaled limit at a candidate pole did not stabilize."""


class SingularSystemError(QaskeyError):
    """Linear system for recurrence coefficients is degenerate."""
