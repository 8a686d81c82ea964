"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GraphSturmError(Exception):
    """Base class for all package errors."""


class ProblemError(GraphSturmError, ValueError):
    """Invalid problem data: bad geometry, coupling, potential, or config file."""


class DomainError(GraphSturmError, ValueError):
    """Evaluation requested outside the valid domain of an operation."""


class SearchError(GraphSturmError, RuntimeError):
    """Root bracketing or refinement failed within the scan budget."""

    def __init__(self, message: str, last_interval: tuple[float, float] | None = None):
        super().__init__(message)
        self.last_interval = last_interval


class SeriesError(GraphSturmError, RuntimeError):
    """Kernel or Picard series failed to converge within the term cap."""


class SolverError(GraphSturmError, RuntimeError):
    """Dense eigensolver exceeded its iteration cap."""


class ContourError(GraphSturmError, RuntimeError):
    """Contour passes too close to a zero; counting would be unreliable."""

    def __init__(self, message: str, suggested_l: int | None = None):
        super().__init__(message)
        self.suggested_l = suggested_l


class CertificateUnavailableError(GraphSturmError, RuntimeError):
    """Geometry is degenerate (a = b or |p| = 1); no enclosure radius can be emitted."""


class CertificateViolationError(GraphSturmError, RuntimeError):
    """A certified enclosure failed verification; treated as a hard failure."""
