"""
Landscape records: domains, critical points and hypothesis reports.
"""

import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import Field, field_validator, model_validator

from .base import BaseModel


class DomainKind(str, Enum):
    """Supported domains."""

    CIRCLE = "circle"
    FLAT_TORUS = "torus"
    INTERVAL = "interval"
    ABSTRACT_COMPLEX = "complex"


class Domain(BaseModel):
    """
    A flat compact domain, or an abstract complex.

    ``INTERVAL`` is the part of an ambient circle of length ``lengths[0]``
    lying strictly between the f-levels ``window = (a, b)``.
    """

    kind: DomainKind
    lengths: Tuple[float, ...] = ()
    window: Optional[Tuple[float, float]] = None
    name: str = ""

    @field_validator("lengths")
    @classmethod
    def validate_lengths(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        for length in v:
            if not length > 0 or not math.isfinite(length):
                raise ValueError("domain lengths must be positive and finite")
        return v

    @model_validator(mode="after")
    def validate_shape(self) -> "Domain":
        expected = {DomainKind.CIRCLE: 1, DomainKind.INTERVAL: 1, DomainKind.FLAT_TORUS: 2, DomainKind.ABSTRACT_COMPLEX: 0}
        if len(self.lengths) != expected[self.kind]:
            raise ValueError(f"{self.kind.value} domain needs {expected[self.kind]} lengths, got {len(self.lengths)}")
        if self.kind == DomainKind.INTERVAL:
            if self.window is None or not self.window[0] < self.window[1]:
                raise ValueError("interval domains carry window levels a < b")
        elif self.window is not None:
            raise ValueError("only interval domains carry a window")
        return self

    @classmethod
    def circle(cls, length: float = 2 * math.pi) -> "Domain":
        return cls(kind=DomainKind.CIRCLE, lengths=(length,), name="circle")

    @classmethod
    def flat_torus(cls, lx: float = 2 * math.pi, ly: float = 2 * math.pi) -> "Domain":
        return cls(kind=DomainKind.FLAT_TORUS, lengths=(lx, ly), name="torus")

    @classmethod
    def interval(cls, a: float, b: float, length: float = 2 * math.pi) -> "Domain":
        return cls(kind=DomainKind.INTERVAL, lengths=(length,), window=(a, b), name="interval")

    @classmethod
    def abstract(cls, name: str = "complex") -> "Domain":
        return cls(kind=DomainKind.ABSTRACT_COMPLEX, name=name)

    @property
    def dimension(self) -> int:
        """Manifold dimension; 2 for abstract (surface) complexes."""
        return {DomainKind.CIRCLE: 1, DomainKind.INTERVAL: 1, DomainKind.FLAT_TORUS: 2}.get(self.kind, 2)

    @property
    def periodic(self) -> Tuple[bool, ...]:
        return tuple(True for _ in self.lengths)

    @property
    def diameter(self) -> float:
        """Largest distance between two points of the flat domain."""
        return math.sqrt(sum((0.5 * length) ** 2 for length in self.lengths))

    @property
    def euler_characteristic(self) -> Optional[int]:
        if self.kind in (DomainKind.CIRCLE, DomainKind.FLAT_TORUS):
            return 0
        return None

    @property
    def betti(self) -> Optional[List[int]]:
        """Betti numbers of the closed flat domains."""
        return {DomainKind.CIRCLE: [1, 1], DomainKind.FLAT_TORUS: [1, 2, 1]}.get(self.kind)

    @property
    def is_closed_manifold(self) -> bool:
        return self.kind in (DomainKind.CIRCLE, DomainKind.FLAT_TORUS)


class PointClass(str, Enum):
    """Barannikov class of a critical point."""

    HOMOLOGICAL = "H"
    LOWER = "L"
    UPPER = "U"
    UNCLASSIFIED = "?"


class CriticalPoint(BaseModel):
    """
    A nondegenerate critical point.

    Points found on a complex without a smooth evaluator have an empty
    ``hessian_eigs`` and carry the complex ``vertex`` they sit on.
    """

    id: int = Field(ge=0)
    position: Tuple[float, ...]
    value: float
    morse_index: int = Field(ge=0, le=2)
    hessian_eigs: Tuple[float, ...] = ()
    point_class: PointClass = PointClass.UNCLASSIFIED
    partner: Optional[int] = None
    vertex: Optional[int] = None

    @model_validator(mode="after")
    def validate_hessian(self) -> "CriticalPoint":
        eigs = self.hessian_eigs
        if eigs:
            if any(e == 0 for e in eigs):
                raise ValueError("hessian eigenvalues must be nonzero")
            if list(eigs) != sorted(eigs):
                raise ValueError("hessian eigenvalues must be sorted ascending")
            if sum(1 for e in eigs if e < 0) != self.morse_index:
                raise ValueError("negative eigenvalue count must equal the Morse index")
        if self.point_class == PointClass.HOMOLOGICAL and self.partner is not None:
            raise ValueError("homological points have no partner")
        return self

    @property
    def has_hessian(self) -> bool:
        return len(self.hessian_eigs) > 0

    @property
    def negative_eigs(self) -> Tuple[float, ...]:
        return tuple(e for e in self.hessian_eigs if e < 0)

    @property
    def abs_det(self) -> float:
        return math.prod(abs(e) for e in self.hessian_eigs)

    def classified(self, point_class: PointClass, partner: Optional[int] = None) -> "CriticalPoint":
        """Copy with the given class and partner."""
        return self.model_copy(update={"point_class": point_class, "partner": partner})


class Violation(BaseModel):
    point_ids: Tuple[int, ...]
    description: str

    def __str__(self) -> str:
        return f"{list(self.point_ids)}: {self.description}"


class HypothesisReport(BaseModel):
    """Outcome of the excellent-Morse and distinct-gap checks."""

    nondegenerate: bool
    distinct_values: bool
    distinct_gaps: bool = True
    gaps_checked: bool = False
    violations: List[Violation] = Field(default_factory=list)

    @property
    def excellent(self) -> bool:
        return self.nondegenerate and self.distinct_values

    @property
    def ok(self) -> bool:
        return self.excellent and self.distinct_gaps
