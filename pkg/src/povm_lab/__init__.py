"""Optimal POVM search for quantum state tomography with known parameters.

Modules:
    linalg      dense Hermitian eigenvalues, determinants, linear solves
    basis       orthonormal Hermitian operator bases, Bloch conversions
    povm        POVM types, closure, validation, diagnostics, file format
    statespace  constrained-state grids and eigenvalue clustering
    objective   estimator design matrix, averaged covariance, DACM
    annealer    Glauber-dynamics simulated annealing over POVM coordinates
    rankone     equi-modular rank-one phase refinement
    catalog     analytic optima and the conditional-SIC certification report
    cli         the povm-lab command line front end
"""

from .annealer import AnnealConfig, AnnealResult, TraceRecord, anneal
from .basis import OrthonormalBasis, ParameterPattern, gell_mann_basis
from .catalog import ConditionalSicReport, conditional_sic_report
from .objective import AveragedCovariance, DesignMatrix, dacm
from .povm import Povm, PovmElementCoords, PovmMetrics
from .rankone import PhaseConfiguration, refine
from .statespace import Cluster, GridSpec

__all__ = [
    "AnnealConfig",
    "AnnealResult",
    "AveragedCovariance",
    "Cluster",
    "ConditionalSicReport",
    "DesignMatrix",
    "GridSpec",
    "OrthonormalBasis",
    "ParameterPattern",
    "PhaseConfiguration",
    "Povm",
    "PovmElementCoords",
    "PovmMetrics",
    "TraceRecord",
    "anneal",
    "conditional_sic_report",
    "dacm",
    "gell_mann_basis",
    "refine",
]

__version__ = "0.1.0"
