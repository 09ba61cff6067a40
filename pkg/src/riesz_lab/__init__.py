"""
riesz_lab: Riesz products, contraction schedules and square-function
multiplier checks, with desk-scale convolution experiments.
"""

__version__ = "0.1.0"

from .clouds import (
    CloudSystem,
    GapBoundReport,
    build_clouds,
    closed_form_bound,
    gap_bound_table,
    locate,
    off_cloud_bound,
    tail_constant,
)
from .convolution import (
    ConvergenceReport,
    PeriodicSignal,
    convergence_experiment,
    convolve,
    square_function_spatial,
)
from .core import (
    ContractionSchedule,
    RieszSpec,
    SignVector,
    TrigPolynomial,
    contraction_ft,
    decompose_frequency,
    fourier_coefficient,
    ft_real,
    interpolated_ft,
    lebesgue_ft,
    partial_product,
)
from .errors import CertificationError, RieszLabError, SelectionExhausted
from .multipliers import (
    ContractionFamily,
    MultiplierFunction,
    SigmaScan,
    greedy_subsequence,
    scan_sup,
    sigma_K,
    square_norm_bound,
)
from .schedules import disjointness_check, dyadic_construct, intertwine_construct, rate_scheduler

__all__ = [
    "CertificationError",
    "CloudSystem",
    "ContractionFamily",
    "ContractionSchedule",
    "ConvergenceReport",
    "GapBoundReport",
    "MultiplierFunction",
    "PeriodicSignal",
    "RieszLabError",
    "RieszSpec",
    "SelectionExhausted",
    "SigmaScan",
    "SignVector",
    "TrigPolynomial",
    "build_clouds",
    "closed_form_bound",
    "contraction_ft",
    "convergence_experiment",
    "convolve",
    "decompose_frequency",
    "disjointness_check",
    "dyadic_construct",
    "fourier_coefficient",
    "ft_real",
    "gap_bound_table",
    "greedy_subsequence",
    "interpolated_ft",
    "intertwine_construct",
    "lebesgue_ft",
    "locate",
    "off_cloud_bound",
    "partial_product",
    "rate_scheduler",
    "scan_sup",
    "sigma_K",
    "square_function_spatial",
    "square_norm_bound",
    "tail_constant",
]
