"""Counting statistics of degenerate chaotic light behind a linear scatterer."""

from .core import (CountingWindow, EnsembleName, ModeCovariance, RegimeWarning,
                   SpectralData, TransmissionSpec, ValidationReport,
                   reduce_to_spectrum, validate)
from .ensembles import (EigenvalueDensity, MomentSet, fano_bose, fano_fermi,
                        fano_haar, kappa_correction, moments, sample_eigenvalues,
                        sample_haar_unitary)
from .genfn import (CumulantSummary, GeneratingFunction, Statistics,
                    fano_broadband, lorentzian_profile)
from .montecarlo import McConfig, chi_square_vs_pmf, empirical_summary, sample_counts
from .pmf import (CountDistribution, DoubleBarrierGF, closed_form_double_barrier,
                  fitted_tail_decay, invert_fourier, k_distribution,
                  poisson_log_pmf, saddle_point, tail_rate)

__all__ = [
    "CountDistribution", "CountingWindow", "CumulantSummary", "DoubleBarrierGF",
    "EigenvalueDensity", "EnsembleName", "GeneratingFunction", "McConfig",
    "ModeCovariance", "MomentSet", "RegimeWarning", "SpectralData", "Statistics",
    "TransmissionSpec", "ValidationReport", "chi_square_vs_pmf",
    "closed_form_double_barrier", "empirical_summary", "fano_bose", "fano_broadband",
    "fano_fermi", "fano_haar", "fitted_tail_decay", "invert_fourier",
    "k_distribution", "kappa_correction", "lorentzian_profile", "moments",
    "poisson_log_pmf", "reduce_to_spectrum", "saddle_point", "sample_counts",
    "sample_eigenvalues", "sample_haar_unitary", "tail_rate", "validate",
]

__version__ = "0.1.0"
