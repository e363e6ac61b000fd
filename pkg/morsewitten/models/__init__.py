"""
Data models for morse-witten-lab.

Pydantic records for landscapes, filtered complexes, predictions, operators
and experiment reports.
"""

from .base import BaseModel
from .experiment import ComparisonRow, CountCheck, ExperimentConfig, FitCheck, Provenance, Report
from .landscape import CriticalPoint, Domain, DomainKind, HypothesisReport, PointClass, Violation
from .spectral import (
    BoundarySpec,
    FitResult,
    GridSpec,
    PredictionKind,
    PredictionSet,
    Scheme,
    SolverKind,
    SpectralPrediction,
    SpectrumResult,
    SweepRow,
    WittenOperator,
)
from .topology import (
    BarannikovComplex,
    BasisReason,
    Cell,
    EssentialClass,
    FilteredComplex,
    GridInfo,
    PersistencePair,
    PersistencePairing,
    RelativeBasis,
    RelativeGenerator,
    WindowSpec,
)

__all__ = [
    "BaseModel",
    # Landscape
    "CriticalPoint",
    "Domain",
    "DomainKind",
    "HypothesisReport",
    "PointClass",
    "Violation",
    # Topology
    "BarannikovComplex",
    "BasisReason",
    "Cell",
    "EssentialClass",
    "FilteredComplex",
    "GridInfo",
    "PersistencePair",
    "PersistencePairing",
    "RelativeBasis",
    "RelativeGenerator",
    "WindowSpec",
    # Spectral
    "BoundarySpec",
    "FitResult",
    "GridSpec",
    "PredictionKind",
    "PredictionSet",
    "Scheme",
    "SolverKind",
    "SpectralPrediction",
    "SpectrumResult",
    "SweepRow",
    "WittenOperator",
    # Experiments
    "ComparisonRow",
    "CountCheck",
    "ExperimentConfig",
    "FitCheck",
    "Provenance",
    "Report",
]
