"""
Experiment configuration and report records.

An experiment file is a dotenv-style key=value text file, one experiment
per file::

    NAME=double_well
    FUNCTION=double_well
    DOMAIN=circle
    RESOLUTION=2048
    H_LIST=0.30,0.25,0.20,0.15,0.12,0.10
    DEGREES=0,1
    WINDOW=-inf,inf
    KAPPA=2-1=1.0
    SCHEME=dec

Keys are case-insensitive. List values are comma separated. Relative file
paths are resolved against the directory of the experiment file.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from dotenv import dotenv_values
from pydantic import Field, ValidationError as PydanticValidationError, field_validator, model_validator

from ..utils.exceptions import ConfigurationError, MorseWittenError
from ..utils.helpers import parse_float, text_hash
from ..utils.validators import validate_h_list, validate_resolution
from .base import BaseModel
from .landscape import DomainKind, HypothesisReport
from .spectral import FitResult, Scheme

_FILE_KEYS = ("samples_file", "complex_file")


def _split(value: Any) -> List[str]:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return list(value)


class ExperimentConfig(BaseModel):
    """One experiment: landscape, grids, h values, degrees, window and outputs."""

    name: str = "experiment"
    function: Optional[str] = None
    coefficients: Optional[List[float]] = None
    samples_file: Optional[str] = None
    complex_file: Optional[str] = None
    domain: DomainKind = DomainKind.CIRCLE
    lengths: Optional[List[float]] = None
    resolution: int = 2048
    persistence_resolution: Optional[int] = None
    seed_resolution: int = Field(default=64, ge=8)
    h_list: List[float] = Field(default_factory=list)
    degrees: List[int] = Field(default_factory=lambda: [0])
    window: Optional[Tuple[float, float]] = None
    kappa: Dict[str, float] = Field(default_factory=dict)
    scheme: Scheme = Scheme.CONJUGATED_DEC
    output_dir: Optional[str] = None
    seed: int = 0
    negate: bool = False
    eigen_count: Optional[int] = Field(default=None, ge=1)

    @field_validator("coefficients", "lengths", mode="before")
    @classmethod
    def parse_float_list(cls, v: Any) -> Any:
        if v is None or v == "":
            return None
        return [parse_float(item) if isinstance(item, str) else float(item) for item in _split(v)]

    @field_validator("h_list", mode="before")
    @classmethod
    def parse_h_list(cls, v: Any) -> List[float]:
        if v is None or v == "":
            return []
        try:
            return validate_h_list(parse_float(item) if isinstance(item, str) else item for item in _split(v))
        except MorseWittenError as exc:
            raise ValueError(exc.message) from exc

    @field_validator("degrees", mode="before")
    @classmethod
    def parse_degrees(cls, v: Any) -> List[int]:
        if v is None or v == "":
            return [0]
        return sorted({int(item) for item in _split(v)})

    @field_validator("window", mode="before")
    @classmethod
    def parse_window(cls, v: Any) -> Any:
        if v is None or v == "":
            return None
        items = _split(v)
        if len(items) != 2:
            raise ValueError("window needs two levels a,b")
        a, b = (parse_float(item) if isinstance(item, str) else float(item) for item in items)
        if not a < b:
            raise ValueError("window requires a < b")
        return (a, b)

    @field_validator("kappa", mode="before")
    @classmethod
    def parse_kappa(cls, v: Any) -> Dict[str, float]:
        if v is None or v == "":
            return {}
        if isinstance(v, dict):
            return {str(k): float(val) for k, val in v.items()}
        table = {}
        for item in _split(v):
            pair, _, value = item.rpartition("=")
            if not pair:
                raise ValueError(f"kappa entry {item!r} is not PAIR=VALUE")
            table[pair.strip()] = float(value)
        return table

    @field_validator("resolution", "persistence_resolution")
    @classmethod
    def check_resolution(cls, v: Optional[int]) -> Optional[int]:
        if v is None:
            return v
        try:
            return validate_resolution(v)
        except MorseWittenError as exc:
            raise ValueError(exc.message) from exc

    @field_validator("negate", mode="before")
    @classmethod
    def parse_bool(cls, v: Any) -> Any:
        if isinstance(v, str):
            return v.strip().lower() in ("1", "true", "yes", "on")
        return v

    @model_validator(mode="after")
    def check_source(self) -> "ExperimentConfig":
        sources = [s for s in (self.function, self.samples_file, self.complex_file) if s]
        if len(sources) != 1:
            raise ValueError("exactly one of FUNCTION, SAMPLES_FILE, COMPLEX_FILE is required")
        if self.complex_file and self.domain != DomainKind.ABSTRACT_COMPLEX:
            raise ValueError("COMPLEX_FILE requires DOMAIN=complex")
        if self.domain == DomainKind.INTERVAL and self.window is None:
            raise ValueError("DOMAIN=interval requires WINDOW")
        return self

    @property
    def domain_lengths(self) -> Tuple[float, ...]:
        if self.lengths:
            return tuple(self.lengths)
        if self.domain == DomainKind.FLAT_TORUS:
            return (2 * math.pi, 2 * math.pi)
        if self.domain == DomainKind.ABSTRACT_COMPLEX:
            return ()
        return (2 * math.pi,)

    def kappa_table(self) -> Dict[Tuple[int, int], float]:
        """Kappa overrides keyed by (upper id, lower id)."""
        table = {}
        for key, value in self.kappa.items():
            upper, _, lower = key.partition("-")
            table[(int(upper), int(lower))] = value
        return table

    def config_hash(self) -> str:
        return text_hash(self.model_dump_json())

    @classmethod
    def from_file(cls, path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> "ExperimentConfig":
        """
        Load an experiment file.

        Args:
            path: Experiment file in key=value form
            overrides: Values taking precedence over the file (CLI flags)

        Returns:
            Validated configuration

        Raises:
            ConfigurationError: If the file is missing or invalid
        """
        source = Path(path)
        if not source.is_file():
            raise ConfigurationError(f"experiment file not found: {source}", config_key="config")
        raw = {key.lower(): value for key, value in dotenv_values(source).items() if value is not None}
        for key in _FILE_KEYS:
            if raw.get(key) and not Path(raw[key]).is_absolute():
                raw[key] = str((source.parent / raw[key]).resolve())
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        raw.setdefault("name", source.stem)
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "ExperimentConfig":
        try:
            return cls(**values)
        except PydanticValidationError as exc:
            first = exc.errors()[0]
            key = ".".join(str(loc) for loc in first.get("loc", ())) or None
            raise ConfigurationError(f"invalid experiment config: {first.get('msg')}", config_key=key) from exc


class ComparisonRow(BaseModel):
    """Predicted versus measured small eigenvalue at one h."""

    h: float
    degree: int
    point_ids: Tuple[int, ...]
    predicted: float
    measured: float
    relative_error: float
    tolerance: float
    passed: bool


class FitCheck(BaseModel):
    """Arrhenius fit with the tolerances it is judged against."""

    degree: int
    point_ids: Tuple[int, ...]
    fit: FitResult
    predicted_activation: float
    activation_error: float
    activation_tolerance: float
    predicted_prefactor: Optional[float] = None
    prefactor_error: Optional[float] = None
    prefactor_tolerance: Optional[float] = 0.10
    passed: bool


class CountCheck(BaseModel):
    h: float
    degree: int
    expected: int
    measured: int
    kernel_expected: Optional[int] = None
    kernel_measured: Optional[int] = None
    passed: bool


class Provenance(BaseModel):
    config_hash: str
    versions: Dict[str, str]
    scheme: str
    resolution: Optional[int] = None


class Report(BaseModel):
    """Everything a verification run measured, with verdicts."""

    name: str
    hypotheses: HypothesisReport
    classification: List[Dict[str, Any]] = Field(default_factory=list)
    predictions: List[Dict[str, Any]] = Field(default_factory=list)
    counts: List[CountCheck] = Field(default_factory=list)
    comparisons: List[ComparisonRow] = Field(default_factory=list)
    fits: List[FitCheck] = Field(default_factory=list)
    supersymmetry: List[ComparisonRow] = Field(default_factory=list)
    dimension: int = 1
    error_band_estimate: Optional[float] = None
    provenance: Provenance

    @property
    def passed(self) -> bool:
        return (
            all(row.passed for row in self.counts)
            and all(row.passed for row in self.comparisons)
            and all(fit.passed for fit in self.fits)
            and all(row.passed for row in self.supersymmetry)
        )
