"""Complex-measure random walks: exact amplitudes, coupled probabilities,
asymptotics, twist-and-shrink Brownian motion and a lattice Schroedinger solver."""

from .gaussian import GaussianRational
from .amplitudes import (
    AmplitudeTable, EXACT, SCALED, amplitude_direct, amplitude_hypergeometric,
    amplitude_row_by_m_recursion, amplitude_table, amplitude_table_by_recursion,
    four_method_report, sum_check,
)
from .coupled import (
    CoupledDistribution, coupled_distribution, coupled_from_length, markov_fit_for,
    odd_step_anomaly, table1_grid, tail_ratio_check,
)
from .asymptotics import AsymptoticParams, estimate_c2, extrapolate_c2, h_inh_limit, main_term
from .brownian import build_hierarchy, gaussianity_report, sample_lazy_walk, stopping_times, twist
from .schrodinger import (
    ComplexTransitionKernel, LatticeWaveFunction, PotentialSpec, continuum_comparison, evolve,
    kernel_checks, path_integral_oracle,
)
from .config import RunArtifact, RunConfig

__version__ = "0.1.0"

__all__ = [
    "AmplitudeTable", "AsymptoticParams", "ComplexTransitionKernel", "CoupledDistribution",
    "EXACT", "GaussianRational", "LatticeWaveFunction", "PotentialSpec", "RunArtifact",
    "RunConfig", "SCALED", "amplitude_direct", "amplitude_hypergeometric",
    "amplitude_row_by_m_recursion", "amplitude_table", "amplitude_table_by_recursion",
    "build_hierarchy", "continuum_comparison", "coupled_distribution", "coupled_from_length",
    "estimate_c2", "evolve", "extrapolate_c2", "four_method_report", "gaussianity_report",
    "h_inh_limit", "kernel_checks", "main_term", "markov_fit_for", "odd_step_anomaly",
    "path_integral_oracle", "sample_lazy_walk", "stopping_times", "sum_check", "table1_grid",
    "tail_ratio_check", "twist",
]
