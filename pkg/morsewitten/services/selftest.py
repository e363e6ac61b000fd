"""
Built-in self checks: Betti numbers, chain-complex structure, persistence
against the rank oracle, supersymmetry of the discrete Witten complex and
duality under f -> -f.

Failures are collected as results; nothing here raises on a failed check.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
import structlog

from ..config import Settings, get_settings
from ..models.experiment import ExperimentConfig
from ..models.landscape import Domain, DomainKind
from ..models.topology import BarannikovComplex, FilteredComplex
from ..utils.exceptions import DegenerateCriticalError, MorseWittenError
from ..utils.helpers import asset_path
from .asymptotics import compare_predictions, mirror
from .barannikov import betti, match_cells_to_points, reduce, verify_betti
from .filtration import build_cubical, check_chain_complex, load_simplicial, with_vertex_values
from .functions import builtin
from .landscape import MorseFunction, critical_points_from_complex
from .pipeline import analyze
from .rank_oracle import classify_by_rank_oracle, compare_classifications, rational_betti
from .spectral import kernel_dimension, low_spectrum
from .witten_numerics import AssemblyConfig, supersymmetry_defect

logger = structlog.get_logger(__name__)

ORACLE_CASES = 50
MAX_REDRAWS = 25


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, message: str) -> None:
        self.failures.append(message)
        logger.warning("selftest_failure", suite=self.name, failure=message)


@dataclass
class SelftestSummary:
    suites: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    def render(self) -> str:
        lines = []
        for suite in self.suites:
            lines.append(f"{suite.name:<14} {'PASS' if suite.passed else 'FAIL'}  ({suite.cases} cases)")
            lines.extend(f"    {failure}" for failure in suite.failures)
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _grid(nx: int, ny: int, periodic: Tuple[bool, bool], rng: np.random.Generator) -> FilteredComplex:
    return build_cubical(nx, ny, periodic, rng.random(nx * ny))


def reference_complexes(rng: np.random.Generator) -> List[Tuple[str, FilteredComplex, List[int]]]:
    """Named complexes with known Betti numbers."""
    return [
        ("circle", _grid(16, 1, (True, False), rng), [1, 1]),
        ("disk", _grid(5, 5, (False, False), rng), [1, 0, 0]),
        ("torus", _grid(6, 6, (True, True), rng), [1, 2, 1]),
        ("sphere", load_simplicial(asset_path("octahedron.simplicial")), [1, 0, 1]),
        ("torus7", load_simplicial(asset_path("torus7.simplicial")), [1, 2, 1]),
        ("genus2", load_simplicial(asset_path("genus2.simplicial")), [1, 4, 1]),
    ]


def corrupt_incidence(fc: FilteredComplex) -> FilteredComplex:
    """Flip the sign of the first incidence of the first top cell."""
    top = int(np.flatnonzero(fc.dims == fc.max_dim)[0])
    boundaries = list(fc.boundaries)
    (face, sign), *rest = boundaries[top]
    boundaries[top] = ((face, -sign), *rest)
    return replace(fc, boundaries=tuple(boundaries))


def _classified(fc: FilteredComplex) -> BarannikovComplex:
    points = critical_points_from_complex(fc)
    return match_cells_to_points(reduce(fc), points, fc.max_dim)


def betti_suite(rng: np.random.Generator) -> SuiteResult:
    suite = SuiteResult("betti")
    for name, fc, expected in reference_complexes(rng):
        suite.cases += 1
        try:
            exact = rational_betti(fc)
            if exact != expected:
                suite.fail(f"{name}: rational Betti {exact}, expected {expected}")
            fc = _redraw_until_morse(fc, rng) if name in ("circle", "disk", "torus") else fc
            verify_betti(reduce(fc), fc, expected)
            bc = _classified(fc)
            if betti(bc) != expected:
                suite.fail(f"{name}: homological counts {betti(bc)}, expected {expected}")
        except MorseWittenError as exc:
            suite.fail(f"{name}: {exc.error_code}: {exc.message}")
    return suite


def boundary_suite(rng: np.random.Generator, inject_fault: bool = False) -> SuiteResult:
    suite = SuiteResult("boundary")
    for name, fc, _ in reference_complexes(rng):
        suite.cases += 1
        if inject_fault:
            fc = corrupt_incidence(fc)
        for problem in check_chain_complex(fc):
            suite.fail(f"{name}: {problem}")
    return suite


def _redraw_until_morse(fc: FilteredComplex, rng: np.random.Generator) -> FilteredComplex:
    """New random vertex values until every critical vertex is simple."""
    for _ in range(MAX_REDRAWS):
        candidate = with_vertex_values(fc, rng.random(fc.n_vertices))
        try:
            critical_points_from_complex(candidate)
            return candidate
        except DegenerateCriticalError:
            continue
    raise DegenerateCriticalError("no Morse vertex values found", min_abs_eig=0.0)


def _random_case(i: int, rng: np.random.Generator) -> Tuple[str, FilteredComplex]:
    kind = i % 4
    if kind == 0:
        n = int(rng.integers(6, 41))
        return f"circle{n}", _grid(n, 1, (True, False), rng)
    if kind == 1:
        nx, ny = (int(v) for v in rng.integers(3, 9, size=2))
        return f"disk{nx}x{ny}", _grid(nx, ny, (False, False), rng)
    if kind == 2:
        nx, ny = (int(v) for v in rng.integers(3, 7, size=2))
        return f"torus{nx}x{ny}", _grid(nx, ny, (True, True), rng)
    asset = "octahedron.simplicial" if (i // 4) % 2 == 0 else "torus7.simplicial"
    return asset.split(".")[0], load_simplicial(asset_path(asset))


def oracle_suite(seed: int, cases: int = ORACLE_CASES, settings: Optional[Settings] = None) -> SuiteResult:
    """Persistence plus matching against the rank oracle on random lower-star filtrations."""
    settings = settings or get_settings()
    rng = np.random.default_rng(seed)
    suite = SuiteResult("oracle")
    labelled = []
    for i in range(cases):
        name, fc = _random_case(i, rng)
        labelled.append((f"case {i} ({name})", True, fc))
    labelled.append(("genus2", False, load_simplicial(asset_path("genus2.simplicial"))))
    for label, redraw, fc in labelled:
        suite.cases += 1
        try:
            if redraw:
                fc = _redraw_until_morse(fc, rng)
            points = critical_points_from_complex(fc)
            fast = match_cells_to_points(reduce(fc), points, fc.max_dim)
            slow = classify_by_rank_oracle(fc, points, settings=settings.persistence)
            for difference in compare_classifications(fast, slow):
                suite.fail(f"{label}: {difference}")
            for lower in fast.pairing.values():
                if lower in fast.pairing:
                    suite.fail(f"{label}: point {lower} is paired both ways")
        except MorseWittenError as exc:
            suite.fail(f"{label}: {exc.error_code}: {exc.message}")
    return suite


def supersymmetry_suite(settings: Optional[Settings] = None) -> SuiteResult:
    """Exact pairing of nonzero spectra and kernel dimensions of the discrete Witten complex."""
    settings = settings or get_settings()
    suite = SuiteResult("supersymmetry")
    cases = [
        ("circle", MorseFunction(builtin("double_well", (2 * np.pi,)), Domain.circle()), (64,), 0.3, [1, 1]),
        ("torus", MorseFunction(builtin("torus_perturbed", (2 * np.pi, 2 * np.pi)), Domain.flat_torus()), (16, 16), 0.6, [1, 2, 1]),
    ]
    for name, function, shape, h, expected in cases:
        assembly = AssemblyConfig.from_function(function, shape, settings=settings.spectral)
        for p in range(function.dimension + 1):
            suite.cases += 1
            try:
                op = assembly.build(h, p)
                defect = supersymmetry_defect(op)
                if defect > 1e-10:
                    suite.fail(f"{name} p={p}: nonzero spectra of D^T D and D D^T differ by {defect:.3g}")
                if op.up is not None and op.down is not None:
                    composed = op.up @ op.down
                    largest = float(abs(composed).max()) if composed.nnz else 0.0
                    if largest > 1e-12 * max(op.norm, 1.0):
                        suite.fail(f"{name} p={p}: D_p D_(p-1) has entries up to {largest:.3g}")
                result = low_spectrum(op, expected[p] + 2, settings.spectral)
                kernel = kernel_dimension(result, settings.spectral)
                if kernel != expected[p]:
                    suite.fail(f"{name} p={p}: kernel dimension {kernel}, expected {expected[p]}")
            except MorseWittenError as exc:
                suite.fail(f"{name} p={p}: {exc.error_code}: {exc.message}")
    return suite


def duality_suite(settings: Optional[Settings] = None) -> SuiteResult:
    """Predictions of -f equal those of f with degrees mirrored."""
    settings = settings or get_settings()
    suite = SuiteResult("duality")
    configs = [
        ExperimentConfig(name="double_well", function="double_well", domain=DomainKind.CIRCLE, resolution=512),
        ExperimentConfig(
            name="torus_perturbed",
            function="torus_perturbed",
            domain=DomainKind.FLAT_TORUS,
            resolution=128,
            persistence_resolution=32,
        ),
        ExperimentConfig(
            name="genus2",
            complex_file=str(asset_path("genus2.simplicial")),
            domain=DomainKind.ABSTRACT_COMPLEX,
        ),
    ]
    for config in configs:
        suite.cases += 1
        try:
            forward = analyze(config, settings=settings)
            backward = analyze(config.model_copy(update={"negate": True}), settings=settings)
            dimension = forward.bc.dimension
            for difference in compare_predictions(mirror(forward.predictions, dimension), backward.predictions):
                suite.fail(f"{config.name}: {difference}")
        except MorseWittenError as exc:
            suite.fail(f"{config.name}: {exc.error_code}: {exc.message}")
    return suite


SUITES: Tuple[str, ...] = ("betti", "boundary", "oracle", "supersymmetry", "duality")


def run_selftest(
    seed: int = 0,
    inject_fault: bool = False,
    suites: Optional[Tuple[str, ...]] = None,
    settings: Optional[Settings] = None,
) -> SelftestSummary:
    """
    Run the built-in suites.

    Args:
        seed: Seed of the randomized complexes
        inject_fault: Corrupt one incidence sign per complex in the boundary suite
        suites: Subset of :data:`SUITES` to run
    """
    settings = settings or get_settings()
    rng = np.random.default_rng(seed)
    runners: List[Tuple[str, Callable[[], SuiteResult]]] = [
        ("betti", lambda: betti_suite(rng)),
        ("boundary", lambda: boundary_suite(rng, inject_fault)),
        ("oracle", lambda: oracle_suite(seed, settings=settings)),
        ("supersymmetry", lambda: supersymmetry_suite(settings)),
        ("duality", lambda: duality_suite(settings)),
    ]
    selected = suites or SUITES
    results = []
    for name, runner in runners:
        if name not in selected:
            continue
        logger.info("selftest_suite_started", suite=name)
        results.append(runner())
    summary = SelftestSummary(results)
    logger.info("selftest_finished", passed=summary.passed, suites=[s.name for s in results])
    return summary
