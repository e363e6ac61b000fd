"""
Spectral records: predictions, assembled Witten operators, spectra,
sweep rows and Arrhenius fits.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import Field, model_validator

from ..utils.exceptions import PredictionUnavailableError
from .base import BaseModel
from .topology import GridInfo, WindowSpec


class PredictionKind(str, Enum):
    ZERO = "zero"
    PAIR = "pair"


class SpectralPrediction(BaseModel):
    """
    Predicted small eigenvalue attached to one critical point.

    ``coefficient`` is None when the Hessians needed for the prefactor are
    unknown (points found combinatorially on a complex); the activation is
    still exact in that case.
    """

    point_id: int
    degree: int
    kind: PredictionKind
    coefficient: Optional[float] = None
    activation: float = 0.0
    kappa: float = 1.0
    partner_id: Optional[int] = None

    @model_validator(mode="after")
    def validate_kind(self) -> "SpectralPrediction":
        if self.kind == PredictionKind.PAIR:
            if not self.activation > 0:
                raise ValueError("pair predictions need a positive activation")
            if self.coefficient is not None and not self.coefficient > 0:
                raise ValueError("pair predictions need a positive coefficient")
        return self

    @property
    def is_zero(self) -> bool:
        return self.kind == PredictionKind.ZERO

    def eval(self, h: float) -> float:
        """kappa^2 * coefficient * (h/pi) * exp(-activation/h), or 0."""
        if self.is_zero:
            return 0.0
        if self.coefficient is None:
            raise PredictionUnavailableError("prediction has no prefactor (missing Hessians)", point_id=self.point_id)
        return self.kappa ** 2 * self.coefficient * (h / math.pi) * math.exp(-self.activation / h)

    def same_value(self, other: "SpectralPrediction", rtol: float = 1e-12) -> bool:
        if self.kind != other.kind:
            return False
        if self.is_zero:
            return True
        if (self.coefficient is None) != (other.coefficient is None):
            return False
        coef_ok = self.coefficient is None or math.isclose(self.coefficient, other.coefficient, rel_tol=rtol)
        return (
            coef_ok
            and math.isclose(self.activation, other.activation, rel_tol=rtol)
            and math.isclose(self.kappa ** 2, other.kappa ** 2, rel_tol=rtol)
        )


class PredictionSet(BaseModel):
    """Per-degree predictions, sorted with zeros first then by increasing eval."""

    by_degree: Dict[int, List[SpectralPrediction]] = Field(default_factory=dict)
    h_validity: Tuple[float, float] = (0.0, math.inf)

    def degree(self, p: int) -> List[SpectralPrediction]:
        return self.by_degree.get(p, [])

    def nonzero(self, p: int) -> List[SpectralPrediction]:
        return [pred for pred in self.degree(p) if not pred.is_zero]

    def zero_count(self, p: int) -> int:
        return sum(1 for pred in self.degree(p) if pred.is_zero)

    def for_point(self, point_id: int) -> SpectralPrediction:
        for preds in self.by_degree.values():
            for pred in preds:
                if pred.point_id == point_id:
                    return pred
        raise KeyError(point_id)

    def all(self) -> List[SpectralPrediction]:
        return [pred for p in sorted(self.by_degree) for pred in self.by_degree[p]]


class Scheme(str, Enum):
    CONJUGATED_DEC = "dec"
    DIRECT_STENCIL = "stencil"


class SolverKind(str, Enum):
    DENSE_TRIDIAGONAL = "dense_tridiagonal"
    DENSE_SYMMETRIC = "dense_symmetric"
    DENSE_SVD = "dense_svd"
    SHIFT_INVERT = "shift_invert"


@dataclass(frozen=True)
class BoundarySpec:
    """No boundary, or TN conditions on the window (a, b)."""

    window: Optional[WindowSpec] = None

    @property
    def is_tn(self) -> bool:
        return self.window is not None

    @classmethod
    def none(cls) -> "BoundarySpec":
        return cls(None)

    @classmethod
    def tn(cls, a: float, b: float) -> "BoundarySpec":
        return cls(WindowSpec(a=a, b=b))

    def describe(self) -> str:
        return f"TN{self.window}" if self.window is not None else "none"


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution and spacing of an assembled operator."""

    shape: Tuple[int, int]
    spacing: Tuple[float, float]
    periodic: Tuple[bool, bool]

    @property
    def dimension(self) -> int:
        return 1 if self.shape[1] == 1 else 2

    @property
    def n_nodes(self) -> int:
        return self.shape[0] * self.shape[1]

    def to_grid_info(self) -> GridInfo:
        return GridInfo(shape=self.shape, periodic=self.periodic)


@dataclass(eq=False)
class WittenOperator:
    """
    A discrete Witten Laplacian on p-cochains.

    ``cells`` are the complex cell ids (conjugated scheme) or node indices
    (direct scheme) the unknowns live on. For the conjugated scheme
    ``down`` and ``up`` hold the orthonormalised Witten coboundaries
    D_{p-1} and D_p, so that ``matrix = up.T @ up + down @ down.T``.
    """

    matrix: sp.csr_matrix
    degree: int
    h: float
    scheme: Scheme
    boundary: BoundarySpec
    grid: GridSpec
    f_data: np.ndarray
    cells: np.ndarray
    down: Optional[sp.csr_matrix] = None
    up: Optional[sp.csr_matrix] = None
    kernel_defect: float = 0.0
    norm: float = field(init=False)

    def __post_init__(self) -> None:
        self.matrix = sp.csr_matrix(self.matrix)
        self.norm = float(abs(self.matrix).sum(axis=1).max()) if self.matrix.nnz else 0.0

    @property
    def size(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def is_tridiagonal(self) -> bool:
        coo = self.matrix.tocoo()
        return bool(np.all(np.abs(coo.row - coo.col) <= 1))


@dataclass
class SpectrumResult:
    """Lowest eigenvalues of one operator with residual certificates."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    solver: SolverKind
    count_below_h32: int
    norm: float
    floor: float
    h: float
    degree: int
    converged: bool = True

    @property
    def residual_max(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    def nonzero(self, kernel_tol: float) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues > kernel_tol]


@dataclass(frozen=True)
class SweepRow:
    """One h value of a sweep."""

    h: float
    degree: int
    eigenvalues: Tuple[float, ...]
    count_below_h32: int
    residual_max: float
    scheme: Scheme
    solver: SolverKind
    norm: float
    floor: float


class FitResult(BaseModel):
    """Least-squares line through (1/h, log(lambda/h)); ``points_used`` holds the (h, lambda) pairs.

    ``correction`` is the coefficient of the optional term linear in h, zero for a plain line.
    """

    slope: float
    log_prefactor: float
    r2: float
    points_used: List[Tuple[float, float]]
    correction: float = 0.0

    @property
    def activation_estimate(self) -> float:
        return -self.slope

    @property
    def prefactor_estimate(self) -> float:
        return math.exp(self.log_prefactor)
