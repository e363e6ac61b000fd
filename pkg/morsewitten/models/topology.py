"""
Topology records: filtered complexes, windows, persistence pairings,
Barannikov complexes and relative bases.

The filtered complex is a dataclass over numpy arrays; it is built once and
never mutated (windows produce new instances).
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import Field, model_validator

from .base import BaseModel
from .landscape import CriticalPoint, Domain, PointClass


class WindowSpec(BaseModel):
    """Open window (a, b) of f-levels; infinite ends allowed."""

    a: float = -math.inf
    b: float = math.inf

    @model_validator(mode="after")
    def validate_order(self) -> "WindowSpec":
        if math.isnan(self.a) or math.isnan(self.b) or not self.a < self.b:
            raise ValueError("window requires a < b")
        return self

    @property
    def is_full(self) -> bool:
        return self.a == -math.inf and self.b == math.inf

    def contains(self, value: float) -> bool:
        return self.a < value < self.b

    def __str__(self) -> str:
        return f"({self.a:g}, {self.b:g})"


@dataclass(frozen=True)
class Cell:
    """One cell of a filtered complex."""

    id: int
    dim: int
    boundary: Tuple[Tuple[int, int], ...]
    filtration_value: float
    order_index: int


@dataclass(frozen=True)
class GridInfo:
    """Geometry of a cubical complex built from a regular grid."""

    shape: Tuple[int, int]
    periodic: Tuple[bool, bool]

    @property
    def dimension(self) -> int:
        return 1 if self.shape[1] == 1 else 2


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """
    A lower-star filtered cell complex.

    Cells are indexed by id. ``order`` maps id to order_index (position in
    the total order by filtration value, dimension, id). ``lower_vertex``
    maps every cell to the vertex whose lower star contains it.
    ``quotiented`` and ``active`` encode a relative pair: quotiented cells
    count as zero in relative boundary maps, inactive cells are dropped.
    """

    dims: np.ndarray
    values: np.ndarray
    boundaries: Tuple[Tuple[Tuple[int, int], ...], ...]
    order: np.ndarray
    vertex_values: np.ndarray
    lower_vertex: np.ndarray
    domain: Domain
    coordinates: Optional[np.ndarray] = None
    barycenters: Optional[np.ndarray] = None
    grid: Optional[GridInfo] = None
    quotiented: Optional[np.ndarray] = None
    active: Optional[np.ndarray] = None
    window: Optional[WindowSpec] = None
    sorted_ids: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        sorted_ids = np.empty_like(self.order)
        sorted_ids[self.order] = np.arange(len(self.order))
        object.__setattr__(self, "sorted_ids", sorted_ids)
        if self.quotiented is None:
            object.__setattr__(self, "quotiented", np.zeros(len(self.dims), dtype=bool))
        if self.active is None:
            object.__setattr__(self, "active", np.ones(len(self.dims), dtype=bool))

    @property
    def n_cells(self) -> int:
        return int(len(self.dims))

    @property
    def max_dim(self) -> int:
        return int(self.dims.max()) if self.n_cells else -1

    @property
    def n_vertices(self) -> int:
        return int(len(self.vertex_values))

    def cell(self, cell_id: int) -> Cell:
        return Cell(
            id=int(cell_id),
            dim=int(self.dims[cell_id]),
            boundary=self.boundaries[cell_id],
            filtration_value=float(self.values[cell_id]),
            order_index=int(self.order[cell_id]),
        )

    def cells(self) -> Iterator[Cell]:
        """Cells in filtration order."""
        for cell_id in self.sorted_ids:
            yield self.cell(int(cell_id))

    def ids_of_dim(self, p: int, relative: bool = False) -> np.ndarray:
        """Ids of p-cells in filtration order; ``relative`` keeps active, non-quotiented cells."""
        ids = self.sorted_ids[self.dims[self.sorted_ids] == p]
        if relative:
            keep = self.active[ids] & ~self.quotiented[ids]
            ids = ids[keep]
        return ids

    def counts(self) -> List[int]:
        return [int(np.sum(self.dims == p)) for p in range(self.max_dim + 1)]

    @property
    def euler_characteristic(self) -> int:
        return int(sum((-1) ** p * n for p, n in enumerate(self.counts())))

    @property
    def is_relative(self) -> bool:
        return bool(self.quotiented.any() or not self.active.all())

    def with_marks(self, quotiented: np.ndarray, active: np.ndarray, window: WindowSpec) -> "FilteredComplex":
        return replace(self, quotiented=quotiented, active=active, window=window)


class PersistencePair(BaseModel):
    birth: int
    death: int
    birth_value: float
    death_value: float
    degree: int

    @property
    def persistence(self) -> float:
        return self.death_value - self.birth_value


class EssentialClass(BaseModel):
    cell: int
    value: float
    degree: int


class PersistencePairing(BaseModel):
    """Result of boundary-matrix reduction."""

    pairs: List[PersistencePair] = Field(default_factory=list)
    essentials: List[EssentialClass] = Field(default_factory=list)

    def significant_pairs(self, noise_floor: float) -> List[PersistencePair]:
        return [pair for pair in self.pairs if pair.persistence > noise_floor]

    def essential_counts(self, max_dim: int) -> List[int]:
        counts = [0] * (max_dim + 1)
        for ess in self.essentials:
            counts[ess.degree] += 1
        return counts


class BarannikovComplex(BaseModel):
    """Classified critical points with the pairing upper id -> lower id."""

    points: List[CriticalPoint]
    pairing: Dict[int, int] = Field(default_factory=dict)
    betti: List[int] = Field(default_factory=list)
    degree_lists: Dict[int, List[int]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_pairing(self) -> "BarannikovComplex":
        by_id = {point.id: point for point in self.points}
        lowers = set(self.pairing.values())
        if len(lowers) != len(self.pairing):
            raise ValueError("pairing must be injective")
        for upper_id, lower_id in self.pairing.items():
            upper, lower = by_id[upper_id], by_id[lower_id]
            if upper.morse_index != lower.morse_index + 1:
                raise ValueError(f"pair {upper_id}->{lower_id} does not drop the index by one")
            if not upper.value > lower.value:
                raise ValueError(f"pair {upper_id}->{lower_id} does not drop the value")
            if upper_id in lowers:
                raise ValueError("a point cannot be both upper and lower")
        return self

    @classmethod
    def assemble(cls, points: List[CriticalPoint], pairing: Dict[int, int], max_dim: int) -> "BarannikovComplex":
        """Fill classes, Betti numbers and degree lists from a pairing."""
        lower_of = {lower: upper for upper, lower in pairing.items()}
        classified = []
        for point in points:
            if point.id in pairing:
                classified.append(point.classified(PointClass.UPPER, pairing[point.id]))
            elif point.id in lower_of:
                classified.append(point.classified(PointClass.LOWER, lower_of[point.id]))
            else:
                classified.append(point.classified(PointClass.HOMOLOGICAL, None))
        classified.sort(key=lambda pt: (pt.value, pt.id))
        betti = [0] * (max_dim + 1)
        degree_lists: Dict[int, List[int]] = {p: [] for p in range(max_dim + 1)}
        for point in classified:
            degree_lists.setdefault(point.morse_index, []).append(point.id)
            if point.point_class == PointClass.HOMOLOGICAL:
                betti[point.morse_index] += 1
        return cls(points=classified, pairing=dict(pairing), betti=betti, degree_lists=degree_lists)

    def point(self, point_id: int) -> CriticalPoint:
        for point in self.points:
            if point.id == point_id:
                return point
        raise KeyError(point_id)

    def of_class(self, point_class: PointClass, degree: Optional[int] = None) -> List[CriticalPoint]:
        return [
            pt for pt in self.points
            if pt.point_class == point_class and (degree is None or pt.morse_index == degree)
        ]

    def gaps(self) -> List[Tuple[int, int, float]]:
        """(upper id, lower id, f(upper) - f(lower)) for every pair, sorted by gap."""
        rows = [(u, l, self.point(u).value - self.point(l).value) for u, l in self.pairing.items()]
        return sorted(rows, key=lambda row: row[2])

    @property
    def dimension(self) -> int:
        return len(self.betti) - 1

    def classes(self) -> Dict[int, PointClass]:
        return {pt.id: pt.point_class for pt in self.points}

    def table(self) -> List[Tuple[int, int, float, str, Optional[int], Optional[float]]]:
        """Rows (id, degree, value, class, partner, gap) sorted by value."""
        rows = []
        for pt in self.points:
            gap = abs(pt.value - self.point(pt.partner).value) if pt.partner is not None else None
            rows.append((pt.id, pt.morse_index, pt.value, pt.point_class.value, pt.partner, gap))
        return rows


class BasisReason(str, Enum):
    HOMOLOGICAL_IN_M = "HomologicalInM"
    UPPER_WITH_PARTNER_BELOW_A = "UpperWithPartnerBelowA"
    LOWER_WITH_PARTNER_ABOVE_B = "LowerWithPartnerAboveB"


class RelativeGenerator(BaseModel):
    point_id: int
    reason: BasisReason
    degree: int


class RelativeBasis(BaseModel):
    """Critical points generating H_*(f^b, f^a)."""

    window: WindowSpec
    generators: List[RelativeGenerator] = Field(default_factory=list)

    def counts(self, max_dim: int) -> List[int]:
        counts = [0] * (max_dim + 1)
        for gen in self.generators:
            counts[gen.degree] += 1
        return counts
