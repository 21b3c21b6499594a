"""Exception types shared across the package.

Solver failures carry diagnostic state (best iterate, residual) so callers
can decide whether a partial result is usable.
"""

from __future__ import annotations


class BandedgeError(Exception):
    """Base class for all package-specific failures."""


class DomainError(BandedgeError, ValueError):
    """Input outside the mathematical domain of an operation."""


class AccuracyLossError(BandedgeError):
    """A special-function or quadrature evaluation lost accuracy
    (non-finite intermediate, overflow, or failed internal convergence)."""


class NoConvergenceError(BandedgeError):
    """Iterative root search exhausted its iteration cap.

    Attributes
    ----------
    best : complex
        Iterate with the smallest residual seen.
    residual : float
        Residual magnitude at ``best``.
    """

    def __init__(self, message: str, best: complex, residual: float):
        super().__init__(message)
        self.best = best
        self.residual = residual


class OscillationDetectedError(BandedgeError):
    """Numerical inverse Laplace transform did not stabilise under
    node doubling; the requested node count is insufficient."""


class StepSizeTooCoarseError(BandedgeError):
    """Volterra step-size self-check (dt vs dt/2) exceeded tolerance."""


class CrossCheckError(BandedgeError):
    """Two independent evaluation routes disagree beyond tolerance."""


class QuadratureError(BandedgeError):
    """Adaptive quadrature failed to reach its target accuracy."""


class TransformError(BandedgeError):
    """Forward Laplace transform of sampled data did not converge
    (signal not decayed below threshold at the end of the grid)."""


class TruncationError(BandedgeError):
    """Series truncation bound exceeded the requested tolerance."""


class GridError(BandedgeError, ValueError):
    """Evaluation grid incompatible with the data it is applied to."""


class UnknownUnitError(BandedgeError, ValueError):
    """Unit tag not recognised by the unit system."""
