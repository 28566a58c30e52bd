"""Exception hierarchy.

Validation problems (bad user input) and numerical failures are kept apart so
the command line can map them onto distinct exit codes.
"""

from __future__ import annotations


class QcmapError(Exception):
    """Base class for all package errors."""


class ValidationError(QcmapError, ValueError):
    """Input violates a documented precondition."""


class NumericalError(QcmapError, RuntimeError):
    """A numerical procedure failed to produce a trustworthy result."""


class ConvergenceError(NumericalError):
    """Iterative solve stopped without meeting its tolerance.

    Attributes
    ----------
    iterations : int
        Iterations performed before giving up.
    residuals : list of float
        Residual history, one entry per iteration.
    pair : tuple of int or None
        Species pair with the largest final residual (multi-component solves).
    """

    def __init__(self, message, iterations=0, residuals=None, pair=None):
        super().__init__(message)
        self.iterations = iterations
        self.residuals = list(residuals or [])
        self.pair = pair

    def diagnostics(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_residual": self.residuals[-1] if self.residuals else None,
            "pair": list(self.pair) if self.pair is not None else None,
            "residuals": self.residuals,
        }


class DivergenceError(ConvergenceError):
    """Residual grew monotonically for too long, or became non-finite."""


class CouplingSweepError(NumericalError):
    """A solve inside a coupling-constant sweep failed.

    ``partial`` holds the integrand rows computed before the failure.
    """

    def __init__(self, message, partial, cause=None):
        super().__init__(message)
        self.partial = list(partial)
        self.cause = cause
