"""Spectra and localization certificates for a two-segment Sturm-Liouville operator."""

from .bounds import (ContourCount, LocalizationRadius, SmallnessReport,
                     complex_lower_bound, delta0_lower_bound, localization_radius,
                     qprime_lower_check, rouche_count, smallness_condition)
from .determinant import (DeterminantEval, KernelContext, eval_delta_q, eval_phi,
                          phi_bound, shooting_delta_q)
from .errors import (CertificateUnavailableError, CertificateViolationError,
                     ContourError, DomainError, GraphSturmError, ProblemError,
                     SearchError, SeriesError, SolverError)
from .oracle import (DiscreteOperator, assemble, compare_spectra, eigenvalues,
                     fd_eigenvalue_table, observed_orders)
from .problem import (Constant, CosineSeries, DerivedShape, PotentialNorms,
                      SegmentGraphProblem, Table, derive_shape, eval_potential,
                      potential_norms, problem_from_dict, problem_from_json)
from .transform import (HalfLineSolution, KernelSeries, build_kernel_series,
                        kernel_base, kernel_bound_margin, series_bound_margin,
                        solve_halfline, term_bound_margins)
from .unperturbed import (Eigenfunction0, SpectrumTable, eigenfunction0,
                          eval_delta0, eval_secular_f, simplicity_margin,
                          unperturbed_spectrum)
from .cli import LocalizationReport, LocalizationRow, localize

__version__ = "0.1.0"

__all__ = [
    "CertificateUnavailableError", "CertificateViolationError", "Constant",
    "ContourCount", "ContourError", "CosineSeries", "DerivedShape",
    "DeterminantEval", "DiscreteOperator", "DomainError", "Eigenfunction0",
    "GraphSturmError", "HalfLineSolution", "KernelContext", "KernelSeries",
    "LocalizationRadius", "LocalizationReport", "LocalizationRow",
    "PotentialNorms", "ProblemError", "SearchError", "SegmentGraphProblem",
    "SeriesError", "SmallnessReport", "SolverError", "SpectrumTable", "Table",
    "assemble", "build_kernel_series", "compare_spectra", "complex_lower_bound",
    "delta0_lower_bound", "derive_shape", "eigenfunction0", "eigenvalues",
    "eval_delta0", "eval_delta_q", "eval_phi", "eval_potential",
    "eval_secular_f", "fd_eigenvalue_table", "kernel_base",
    "kernel_bound_margin", "localization_radius", "localize",
    "observed_orders", "phi_bound", "potential_norms", "problem_from_dict",
    "problem_from_json", "qprime_lower_check", "rouche_count",
    "series_bound_margin", "shooting_delta_q", "simplicity_margin",
    "smallness_condition", "solve_halfline", "term_bound_margins",
    "unperturbed_spectrum",
]
