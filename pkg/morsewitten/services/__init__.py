"""
Services module for morse-witten-lab.

Landscape analysis, filtrations and persistence, the rank oracle,
asymptotic predictions, Witten operator assembly, eigen solvers, sweeps,
result storage and the pipelines built on them.
"""

from .asymptotics import predict_relative, predict_spectrum
from .barannikov import match_cells_to_points, reduce, relative_basis
from .filtration import build_cubical, load_simplicial, restrict_window
from .landscape import MorseFunction, check_hypotheses, critical_points_from_complex, find_critical_points
from .rank_oracle import classify_by_rank_oracle
from .spectral import low_spectrum
from .storage import ResultStore
from .sweep import fit_arrhenius, sweep_h
from .witten_numerics import AssemblyConfig, assemble_conjugated, assemble_direct_0form
from .pipeline import analyze, persistence, recompute_report, verify
from .selftest import run_selftest
from .orchestrator import ExperimentOrchestrator

__all__ = [
    # Topology
    "build_cubical",
    "load_simplicial",
    "restrict_window",
    "reduce",
    "match_cells_to_points",
    "relative_basis",
    "classify_by_rank_oracle",
    # Landscape and predictions
    "MorseFunction",
    "find_critical_points",
    "critical_points_from_complex",
    "check_hypotheses",
    "predict_spectrum",
    "predict_relative",
    # Numerics
    "AssemblyConfig",
    "assemble_conjugated",
    "assemble_direct_0form",
    "low_spectrum",
    "sweep_h",
    "fit_arrhenius",
    # Pipelines
    "ResultStore",
    "analyze",
    "verify",
    "persistence",
    "recompute_report",
    "run_selftest",
    "ExperimentOrchestrator",
]
