"""
Experiment pipelines: landscape -> filtration -> classification ->
predictions, and sweep -> comparisons -> fits -> report.

:func:`build_report` is a pure function of the prediction and sweep tables,
so every verdict of a run can be recomputed from the files it wrote.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog

from ..components.arrhenius_plot import ArrheniusPlot
from ..components.tables import SummaryTable
from ..config import Settings, get_settings
from ..models.experiment import (
    ComparisonRow,
    CountCheck,
    ExperimentConfig,
    FitCheck,
    Provenance,
    Report,
)
from ..models.landscape import CriticalPoint, Domain, DomainKind, HypothesisReport
from ..models.spectral import (
    BoundarySpec,
    PredictionKind,
    PredictionSet,
    Scheme,
    SpectralPrediction,
    SweepRow,
)
from ..models.topology import BarannikovComplex, FilteredComplex, PersistencePairing, RelativeBasis, WindowSpec
from ..utils.exceptions import (
    ConfigurationError,
    FloorContaminationError,
    HypothesisViolatedError,
    SpectralError,
)
from ..utils.helpers import package_versions, relative_error
from .asymptotics import predict_relative, predict_spectrum
from .barannikov import match_cells_to_points, reduce, relative_basis, verify_betti
from .filtration import build_cubical, load_simplicial, with_vertex_values
from .functions import BUILTIN_FUNCTIONS, builtin, load_samples
from .landscape import MorseFunction, check_hypotheses, critical_points_from_complex, find_critical_points
from .storage import PREDICTIONS_FILE, ResultStore
from .sweep import MIN_FIT_ROWS, fit_arrhenius, sweep_h
from .witten_numerics import AssemblyConfig

logger = structlog.get_logger(__name__)

MAX_PERTURBATION_ATTEMPTS = 5
PERTURBATION_STEP = 0.01
SUPERSYMMETRY_TOLERANCE = 1e-8
ACTIVATION_TOLERANCE = {1: 0.02, 2: 0.05}
PREFACTOR_TOLERANCE = 0.10


@dataclass
class Landscape:
    """What an experiment studies: a filtered complex, its critical points and (maybe) a smooth function."""

    config: ExperimentConfig
    complex: FilteredComplex
    points: List[CriticalPoint]
    function: Optional[MorseFunction] = None
    noise_floor: float = 0.0
    match_tol: float = 0.0

    @property
    def dimension(self) -> int:
        return self.complex.max_dim

    @property
    def window(self) -> Optional[WindowSpec]:
        if self.config.window is None:
            return None
        a, b = self.config.window
        return WindowSpec(a=-b, b=-a) if self.config.negate else WindowSpec(a=a, b=b)


@dataclass
class AnalysisResult:
    landscape: Landscape
    pairing: PersistencePairing
    bc: BarannikovComplex
    hypotheses: HypothesisReport
    predictions: PredictionSet
    basis: Optional[RelativeBasis] = None
    attempts: int = 1


def build_function(config: ExperimentConfig, attempt: int = 0) -> MorseFunction:
    """
    The smooth landscape of a FUNCTION or SAMPLES_FILE experiment.

    ``attempt`` > 0 shifts the last coefficient of a built-in by
    ``attempt * PERTURBATION_STEP``.
    """
    lengths = config.domain_lengths
    if config.function:
        coefficients = list(config.coefficients) if config.coefficients else None
        if attempt:
            terms = BUILTIN_FUNCTIONS.get(config.function, ())
            coefficients = coefficients or [t.coefficient for t in terms]
            if coefficients:
                coefficients[-1] += attempt * PERTURBATION_STEP
        evaluator = builtin(config.function, lengths, coefficients)
    elif config.samples_file:
        evaluator = load_samples(config.samples_file, lengths)
    else:
        raise ConfigurationError("experiment has no smooth landscape", config_key="function")

    if config.domain == DomainKind.CIRCLE:
        domain = Domain.circle(lengths[0])
    elif config.domain == DomainKind.FLAT_TORUS:
        domain = Domain.flat_torus(*lengths)
    elif config.domain == DomainKind.INTERVAL:
        domain = Domain.interval(config.window[0], config.window[1], lengths[0])
    else:
        raise ConfigurationError("functions need a circle, interval or torus domain", config_key="domain")
    function = MorseFunction(evaluator, domain, name=config.function or "samples")
    return function.negated() if config.negate else function


def ambient(function: MorseFunction) -> MorseFunction:
    """The same function on the closed circle or torus carrying it."""
    if function.domain.kind == DomainKind.INTERVAL:
        return MorseFunction(function.evaluator, Domain.circle(function.domain.lengths[0]), function.name)
    return function


def persistence_shape(config: ExperimentConfig, dimension: int) -> Tuple[int, int]:
    if dimension == 1:
        return (config.persistence_resolution or min(config.resolution, 512), 1)
    n = config.persistence_resolution or min(config.resolution, 128)
    return (n, n)


def grid_tolerances(
    samples: np.ndarray, shape: Tuple[int, int], spacing: float, points: Sequence[CriticalPoint], settings: Settings
) -> Tuple[float, float]:
    """
    Noise floor and match tolerance of a sampled landscape.

    The noise floor is a multiple of the largest value spread inside one
    cell; the match tolerance bounds the gap between a smooth critical
    value and the value of its grid event.
    """
    nx, ny = shape
    field2d = np.asarray(samples, dtype=float).reshape(ny, nx)
    spread = np.abs(np.roll(field2d, -1, axis=1) - field2d)
    if ny > 1:
        block = np.stack(
            [field2d, np.roll(field2d, -1, axis=1), np.roll(field2d, -1, axis=0), np.roll(np.roll(field2d, -1, axis=0), -1, axis=1)]
        )
        spread = block.max(axis=0) - block.min(axis=0)
    dimension = 1 if ny == 1 else 2
    max_hess = max((max(abs(e) for e in pt.hessian_eigs) for pt in points if pt.has_hessian), default=0.0)
    noise_floor = settings.persistence.noise_floor_factor * float(spread.max())
    match_tol = settings.persistence.match_tol_factor * (dimension / 8) * spacing ** 2 * max_hess
    return noise_floor, match_tol


def load_landscape(config: ExperimentConfig, attempt: int = 0, settings: Optional[Settings] = None) -> Landscape:
    settings = settings or get_settings()
    if config.complex_file:
        fc = load_simplicial(config.complex_file)
        if config.negate:
            fc = with_vertex_values(fc, -fc.vertex_values)
        return Landscape(config=config, complex=fc, points=critical_points_from_complex(fc))

    function = build_function(config, attempt)
    closed = ambient(function)
    points = find_critical_points(closed, config.seed_resolution, settings.landscape)
    shape = persistence_shape(config, closed.dimension)
    samples = closed.sample_grid(shape[: closed.dimension])
    fc = build_cubical(
        shape[0], shape[1], (True, True), samples, lengths=closed.domain.lengths, domain=closed.domain,
        settings=settings.persistence,
    )
    spacing = max(length / n for length, n in zip(closed.domain.lengths, shape))
    noise_floor, match_tol = grid_tolerances(samples, shape, spacing, points, settings)
    return Landscape(
        config=config, complex=fc, points=points, function=function, noise_floor=noise_floor, match_tol=match_tol
    )


def _classify(landscape: Landscape) -> Tuple[PersistencePairing, BarannikovComplex]:
    pairing = reduce(landscape.complex)
    verify_betti(pairing, landscape.complex, landscape.complex.domain.betti)
    bc = match_cells_to_points(
        pairing, landscape.points, landscape.dimension, landscape.noise_floor, landscape.match_tol
    )
    return pairing, bc


def analyze(
    config: ExperimentConfig, store: Optional[ResultStore] = None, settings: Optional[Settings] = None
) -> AnalysisResult:
    """
    Classify the critical points of an experiment and predict its small spectrum.

    Built-in landscapes that turn out not to be excellent are perturbed and
    re-checked, up to five attempts.

    Raises:
        HypothesisViolatedError: If the landscape stays non-excellent or two gaps coincide
    """
    settings = settings or get_settings()
    attempts = MAX_PERTURBATION_ATTEMPTS if config.function else 1
    for attempt in range(attempts):
        landscape = load_landscape(config, attempt, settings)
        if check_hypotheses(landscape.points, settings=settings.landscape).excellent:
            break
        logger.warning("landscape_not_excellent", experiment=config.name, attempt=attempt + 1)
    pairing, bc = _classify(landscape)
    hypotheses = check_hypotheses(bc.points, bc, settings.landscape)
    if store is not None:
        store.write_pairing(pairing)
        store.write_classification(bc)

    kappa = config.kappa_table()
    window = landscape.window
    basis = None
    if window is not None:
        predictions = predict_relative(bc, window, kappa_table=kappa, value_tol=landscape.match_tol, settings=settings.asymptotics)
        basis = relative_basis(bc, window, landscape.match_tol)
    else:
        predictions = predict_spectrum(bc, kappa_table=kappa, settings=settings.asymptotics)

    result = AnalysisResult(
        landscape=landscape,
        pairing=pairing,
        bc=bc,
        hypotheses=hypotheses,
        predictions=predictions,
        basis=basis,
        attempts=attempt + 1,
    )
    if store is not None:
        store.write_predictions(predictions)
        if basis is not None:
            store.write_relative_basis(basis)
        tables = SummaryTable()
        store.write_text(
            f"experiment: {config.name}\n\nclassification:\n{tables.classification(bc)}\n\n"
            f"predictions (h validity {predictions.h_validity[0]:.4g} .. {predictions.h_validity[1]:.4g}):\n"
            f"{tables.predictions(predictions)}\n",
            "analysis.txt",
        )
    logger.info("analysis_finished", experiment=config.name, betti=bc.betti, pairs=len(bc.pairing), attempts=attempt + 1)
    return result


def persistence(config: ExperimentConfig, store: Optional[ResultStore] = None, settings: Optional[Settings] = None):
    """Pairing and classification only, without hypotheses or predictions."""
    settings = settings or get_settings()
    landscape = load_landscape(config, settings=settings)
    pairing, bc = _classify(landscape)
    basis = relative_basis(bc, landscape.window, landscape.match_tol) if landscape.window is not None else None
    if store is not None:
        store.write_pairing(pairing)
        store.write_classification(bc)
        if basis is not None:
            store.write_relative_basis(basis)
    return pairing, bc, basis


# Verdicts


def _kernel_count(row: SweepRow, kernel_factor: float) -> int:
    return sum(1 for v in row.eigenvalues if v <= kernel_factor * row.norm)


def _measured_pairs(row: SweepRow, preds: List[SpectralPrediction], zero_count: int) -> List[Tuple[SpectralPrediction, float]]:
    """Match nonzero predictions to measured eigenvalues by sorted order at this h."""
    nonzero = sorted((p for p in preds if not p.is_zero), key=lambda p: p.eval(row.h))
    for first, second in zip(nonzero, nonzero[1:]):
        if math.isclose(first.eval(row.h), second.eval(row.h), rel_tol=1e-12):
            raise HypothesisViolatedError(
                f"predictions of points {first.point_id} and {second.point_id} tie at h={row.h:g}",
                violations=[first.point_id, second.point_id],
            )
    small = row.eigenvalues[zero_count : zero_count + len(nonzero)]
    if len(small) < len(nonzero):
        raise SpectralError(
            f"sweep at h={row.h:g} computed {len(row.eigenvalues)} eigenvalues, {zero_count + len(nonzero)} needed",
            error_code="TOO_FEW_EIGENVALUES",
        )
    return list(zip(nonzero, small))


def build_report(
    name: str,
    hypotheses: HypothesisReport,
    predictions: PredictionSet,
    sweeps: Dict[int, List[SweepRow]],
    dimension: int,
    provenance: Provenance,
    classification: Optional[List[Dict]] = None,
    settings: Optional[Settings] = None,
) -> Report:
    """
    Judge sweeps against predictions.

    Raises:
        FloorContaminationError: If a compared value lies at or below the eigenvalue floor
        HypothesisViolatedError: If two predictions tie
    """
    settings = settings or get_settings()
    band = settings.asymptotics.error_band
    counts: List[CountCheck] = []
    comparisons: List[ComparisonRow] = []
    fits: List[FitCheck] = []
    measured_by: Dict[Tuple[int, float, int], float] = {}

    for p, rows in sorted(sweeps.items()):
        preds = predictions.degree(p)
        zeros = predictions.zero_count(p)
        for row in rows:
            kernel = _kernel_count(row, settings.spectral.kernel_factor)
            counts.append(
                CountCheck(
                    h=row.h,
                    degree=p,
                    expected=len(preds),
                    measured=row.count_below_h32,
                    kernel_expected=zeros,
                    kernel_measured=kernel,
                    passed=row.count_below_h32 == len(preds) and kernel == zeros,
                )
            )
            for pred, measured in _measured_pairs(row, preds, zeros):
                predicted = pred.eval(row.h)
                for value in (predicted, measured):
                    if not value > row.floor:
                        raise FloorContaminationError(
                            f"value {value:.3g} at h={row.h:g} is at or below the floor {row.floor:.3g}",
                            h=row.h,
                            value=value,
                            floor=row.floor,
                        )
                error = relative_error(measured, predicted)
                comparisons.append(
                    ComparisonRow(
                        h=row.h,
                        degree=p,
                        point_ids=(pred.point_id, pred.partner_id),
                        predicted=predicted,
                        measured=measured,
                        relative_error=error,
                        tolerance=band * row.h,
                        passed=error <= band * row.h,
                    )
                )
                measured_by[(p, row.h, pred.point_id)] = measured

        if len(rows) < MIN_FIT_ROWS:
            continue
        for pred in (pred for pred in preds if not pred.is_zero):
            fit = fit_arrhenius(
                rows,
                lambda row, p=p, pid=pred.point_id: measured_by[(p, row.h, pid)],
                linear_correction=dimension == 1,
            )
            activation_error = abs(-fit.slope - pred.activation) / pred.activation
            activation_tolerance = ACTIVATION_TOLERANCE.get(dimension, 0.05)
            predicted_prefactor = pred.kappa ** 2 * pred.coefficient / math.pi
            prefactor_error = abs(fit.prefactor_estimate - predicted_prefactor) / predicted_prefactor
            prefactor_tolerance = PREFACTOR_TOLERANCE if dimension == 1 else None
            fits.append(
                FitCheck(
                    degree=p,
                    point_ids=(pred.point_id, pred.partner_id),
                    fit=fit,
                    predicted_activation=pred.activation,
                    activation_error=activation_error,
                    activation_tolerance=activation_tolerance,
                    predicted_prefactor=predicted_prefactor,
                    prefactor_error=prefactor_error,
                    prefactor_tolerance=prefactor_tolerance,
                    passed=activation_error <= activation_tolerance
                    and (prefactor_tolerance is None or prefactor_error <= prefactor_tolerance),
                )
            )

    supersymmetry: List[ComparisonRow] = []
    schemes = {row.scheme for rows in sweeps.values() for row in rows}
    if schemes == {Scheme.CONJUGATED_DEC}:
        for p in sorted(sweeps):
            if p + 1 not in sweeps:
                continue
            for pred in predictions.nonzero(p):
                if pred.partner_id is None:
                    continue
                try:
                    partner = predictions.for_point(pred.partner_id)
                except KeyError:
                    continue
                if partner.degree != p + 1:
                    continue
                for row in sweeps[p]:
                    below = measured_by.get((p, row.h, pred.point_id))
                    above = measured_by.get((p + 1, row.h, partner.point_id))
                    if below is None or above is None:
                        continue
                    error = relative_error(above, below)
                    supersymmetry.append(
                        ComparisonRow(
                            h=row.h,
                            degree=p,
                            point_ids=(pred.point_id, partner.point_id),
                            predicted=below,
                            measured=above,
                            relative_error=error,
                            tolerance=SUPERSYMMETRY_TOLERANCE,
                            passed=error <= SUPERSYMMETRY_TOLERANCE,
                        )
                    )

    band_estimate = max((row.relative_error / row.h for row in comparisons), default=None)
    return Report(
        name=name,
        hypotheses=hypotheses,
        classification=classification or [],
        predictions=[pred.model_dump(mode="json") for pred in predictions.all()],
        counts=counts,
        comparisons=comparisons,
        fits=fits,
        supersymmetry=supersymmetry,
        dimension=dimension,
        error_band_estimate=band_estimate,
        provenance=provenance,
    )


def _classification_rows(bc: BarannikovComplex) -> List[Dict]:
    columns = ("id", "index", "value", "class", "partner", "gap")
    return [dict(zip(columns, row)) for row in bc.table()]


def _write_plots(store: ResultStore, report: Report, predictions: PredictionSet, settings: Settings) -> None:
    for p in sorted({row.degree for row in report.comparisons}):
        measured = []
        for pred in predictions.nonzero(p):
            points = [(row.h, row.measured) for row in report.comparisons if row.degree == p and row.point_ids[0] == pred.point_id]
            measured.append((f"point {pred.point_id}", sorted(points)))
        plot = ArrheniusPlot(
            title=f"{report.name}: degree {p}",
            measured=measured,
            predicted=[(f"predicted {pred.point_id}", pred) for pred in predictions.nonzero(p)],
        )
        store.write_text(plot.render_svg(), f"arrhenius_p{p}.svg")
        if settings.harness.write_html_report:
            plot.render_html(str(store.path(f"arrhenius_p{p}.html")))


def verify(config: ExperimentConfig, store: Optional[ResultStore] = None, settings: Optional[Settings] = None) -> Report:
    """
    Sweep h for every requested degree and judge the measured small
    eigenvalues against the predictions.

    Raises:
        ConfigurationError: If the experiment has no smooth landscape or no h values
        FloorContaminationError: If a compared value is below the eigenvalue floor
        HypothesisViolatedError: If the landscape violates the standing hypotheses
    """
    settings = settings or get_settings()
    if not config.h_list:
        raise ConfigurationError("verify needs H_LIST", config_key="h_list")
    analysis = analyze(config, store, settings)
    landscape = analysis.landscape
    if landscape.function is None:
        raise ConfigurationError("verify needs FUNCTION or SAMPLES_FILE", config_key="function")
    dimension = landscape.function.dimension
    degrees = [p for p in config.degrees if 0 <= p <= dimension]
    if config.scheme == Scheme.DIRECT_STENCIL and degrees != [0]:
        raise ConfigurationError("the stencil scheme only covers degree 0", config_key="degrees")

    window = landscape.window
    boundary = BoundarySpec.tn(window.a, window.b) if window is not None else BoundarySpec.none()
    shape = (config.resolution,) * dimension
    assembly = AssemblyConfig.from_function(landscape.function, shape, config.scheme, boundary, settings.spectral)

    sweeps: Dict[int, List[SweepRow]] = {}
    for p in degrees:
        m_p = len(analysis.predictions.degree(p))
        k = config.eigen_count or max(1, m_p + settings.spectral.extra_vectors)
        sweeps[p] = sweep_h(assembly, config.h_list, p, k, settings.spectral, settings.harness.max_workers)
        if store is not None:
            store.write_sweep(sweeps[p], p)

    provenance = Provenance(
        config_hash=config.config_hash(),
        versions=package_versions(),
        scheme=config.scheme.value,
        resolution=config.resolution,
    )
    report = build_report(
        config.name,
        analysis.hypotheses,
        analysis.predictions,
        sweeps,
        dimension,
        provenance,
        classification=_classification_rows(analysis.bc),
        settings=settings,
    )
    if store is not None:
        store.write_report(report)
        store.write_text(SummaryTable().report(report))
        _write_plots(store, report, analysis.predictions, settings)
    logger.info("verification_finished", experiment=config.name, passed=report.passed)
    return report


def predictions_from_table(frame: pd.DataFrame) -> PredictionSet:
    """Rebuild a prediction set from its CSV table."""
    by_degree: Dict[int, List[SpectralPrediction]] = {}
    h_validity = (0.0, math.inf)
    for record in frame.to_dict("records"):
        pred = SpectralPrediction(
            point_id=int(record["point_id"]),
            degree=int(record["degree"]),
            kind=PredictionKind(record["kind"]),
            coefficient=None if pd.isna(record["coefficient"]) else float(record["coefficient"]),
            activation=float(record["activation"]),
            kappa=float(record["kappa"]),
            partner_id=None if pd.isna(record["partner_id"]) else int(record["partner_id"]),
        )
        by_degree.setdefault(pred.degree, []).append(pred)
        h_validity = (float(record["h_min"]), float(record["h_max"]))
    return PredictionSet(by_degree=by_degree, h_validity=h_validity)


@dataclass
class ReportCheck:
    report: Report
    mismatches: List[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.mismatches


def recompute_report(store: ResultStore, settings: Optional[Settings] = None) -> ReportCheck:
    """
    Recompute every verdict of a run from its CSV tables and compare with the stored report.
    """
    settings = settings or get_settings()
    stored = store.read_report()
    predictions = predictions_from_table(store.read(PREDICTIONS_FILE))
    sweeps = {p: store.read_sweep(p) for p in store.sweep_degrees()}
    report = build_report(
        stored.name,
        stored.hypotheses,
        predictions,
        sweeps,
        stored.dimension,
        stored.provenance,
        classification=stored.classification,
        settings=settings,
    )
    mismatches = []
    for section in ("counts", "comparisons", "fits", "supersymmetry"):
        old, new = getattr(stored, section), getattr(report, section)
        if len(old) != len(new):
            mismatches.append(f"{section}: {len(old)} stored rows, {len(new)} recomputed")
            continue
        for i, (a, b) in enumerate(zip(old, new)):
            if a.passed != b.passed:
                mismatches.append(f"{section}[{i}]: stored passed={a.passed}, recomputed passed={b.passed}")
    if stored.passed != report.passed:
        mismatches.append(f"verdict: stored {stored.passed}, recomputed {report.passed}")
    store.write_text(SummaryTable().report(report))
    _write_plots(store, report, predictions, settings)
    logger.info("report_recomputed", root=str(store.root), passed=report.passed, mismatches=len(mismatches))
    return ReportCheck(report=report, mismatches=mismatches)
