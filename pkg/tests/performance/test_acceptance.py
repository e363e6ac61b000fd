"""
Acceptance runs of the full experiments.

These sweep fine grids and take minutes; they are deselected by default
and run with ``pytest -m performance``.
"""

import math

import numpy as np
import pytest

from morsewitten.config import Settings
from morsewitten.models.experiment import ExperimentConfig
from morsewitten.models.spectral import BoundarySpec, Scheme
from morsewitten.services.barannikov import match_cells_to_points, reduce
from morsewitten.services.landscape import critical_points_from_complex
from morsewitten.services.pipeline import analyze, recompute_report, verify
from morsewitten.services.selftest import run_selftest
from morsewitten.services.spectral import low_spectrum
from morsewitten.services.storage import ResultStore
from morsewitten.services.witten_numerics import AssemblyConfig
from tests.conftest import EXPERIMENTS_DIR
from tests.factories import MorseGridFactory

pytestmark = pytest.mark.performance

DOUBLE_WELL_H = [0.3, 0.25, 0.2, 0.15, 0.12, 0.1]


@pytest.fixture(scope="module")
def settings():
    return Settings()


@pytest.fixture(scope="module")
def double_well_run(tmp_path_factory, settings):
    """The double well sweep in degrees 0 and 1 at N = 2048"""
    config = ExperimentConfig.from_file(EXPERIMENTS_DIR / "double_well.env")
    store = ResultStore(tmp_path_factory.mktemp("double_well"), settings.harness)
    return verify(config, store, settings), store


def _run(name, tmp_path, settings):
    config = ExperimentConfig.from_file(EXPERIMENTS_DIR / f"{name}.env")
    return verify(config, ResultStore(tmp_path / name, settings.harness), settings)


class TestTopology:
    """Classification against homology"""

    def test_betti_counts(self, settings):
        """Homological counts on circle, disk, torus, sphere and genus two"""
        summary = run_selftest(seed=0, suites=("betti",), settings=settings)

        assert summary.passed, summary.render()

    def test_oracle_equivalence(self, settings):
        """Fifty random lower-star filtrations classify identically both ways"""
        summary = run_selftest(seed=0, suites=("oracle",), settings=settings)

        assert summary.passed, summary.render()
        assert summary.suites[0].cases >= 50

    @pytest.mark.parametrize("seed", range(10))
    def test_pairing_is_a_differential(self, seed):
        """Upper to lower bijection with index drop one and positive value drop"""
        fc = MorseGridFactory(nx=6, ny=5, periodic=(True, True), seed=seed)
        bc = match_cells_to_points(reduce(fc), critical_points_from_complex(fc), fc.max_dim)

        lowers = list(bc.pairing.values())
        assert len(set(lowers)) == len(lowers)
        for upper, lower in bc.pairing.items():
            assert bc.point(upper).morse_index == bc.point(lower).morse_index + 1
            assert bc.point(upper).value > bc.point(lower).value
            assert lower not in bc.pairing

    def test_duality(self, settings):
        """Predictions of -f mirror those of f"""
        summary = run_selftest(seed=0, suites=("duality",), settings=settings)

        assert summary.passed, summary.render()


class TestDoubleWell:
    """The asymmetric double well on the circle"""

    def test_counts(self, double_well_run):
        """Two eigenvalues below h^1.5 in degrees 0 and 1 at every h"""
        report, _ = double_well_run

        assert len(report.counts) == 2 * len(DOUBLE_WELL_H)
        assert all(row.measured == 2 and row.passed for row in report.counts)

    def test_small_eigenvalue_band(self, double_well_run):
        """Measured over predicted stays within 1 +/- 1.5 h"""
        report, _ = double_well_run
        rows = [row for row in report.comparisons if row.degree == 0]

        assert [row.h for row in rows] == DOUBLE_WELL_H
        assert all(row.relative_error <= 1.5 * row.h for row in rows)

    def test_arrhenius_fit(self, double_well_run):
        """Slope within 2% of the activation, prefactor within 10%"""
        report, _ = double_well_run
        (fit,) = [fit for fit in report.fits if fit.degree == 0]

        assert fit.activation_error <= 0.02
        assert fit.prefactor_error <= 0.10
        assert fit.passed

    def test_supersymmetry(self, double_well_run):
        """The degree one eigenvalue equals the degree zero one"""
        report, _ = double_well_run

        assert len(report.supersymmetry) == len(DOUBLE_WELL_H)
        assert all(row.relative_error <= 1e-8 for row in report.supersymmetry)

    def test_verdict_recomputable(self, double_well_run, settings):
        """The stored verdict follows from the written tables"""
        report, store = double_well_run

        check = recompute_report(store, settings)

        assert report.passed
        assert check.consistent


class TestWindows:
    """Relative spectra on energy windows"""

    def test_cut_partner(self, double_well, settings):
        """Cutting below the saddle sends the shallow well eigenvalue to zero"""
        shape = (2048,)
        full = AssemblyConfig.from_function(double_well, shape, settings=settings.spectral).build(0.15, 0)
        cut = AssemblyConfig.from_function(
            double_well, shape, boundary=BoundarySpec.tn(-math.inf, 0.5), settings=settings.spectral
        ).build(0.15, 0)

        full_value = low_spectrum(full, 3, settings.spectral).eigenvalues[1]
        cut_value = low_spectrum(cut, 3, settings.spectral).eigenvalues[1]

        assert cut_value < 1e-3 * full_value

    def test_cut_prediction_is_zero(self, settings):
        """The windowed prediction has no nonzero entry in degree zero"""
        result = analyze(ExperimentConfig.from_file(EXPERIMENTS_DIR / "double_well_cut.env"), settings=settings)

        assert result.predictions.nonzero(0) == []

    def test_window_with_both_partners(self, tmp_path, settings):
        """A window holding the pair reproduces the closed-circle eigenvalue"""
        report = _run("double_well_window", tmp_path, settings)

        assert report.comparisons
        assert all(row.passed for row in report.comparisons)


class TestTorus:
    """Flat torus landscapes"""

    def test_counts(self, tmp_path, settings):
        """Small eigenvalue counts match the critical point counts in every degree"""
        report = _run("torus_perturbed", tmp_path, settings)

        assert {row.degree for row in report.counts} == {0, 1, 2}
        assert all(row.passed for row in report.counts)

    def test_arrhenius_slope(self, tmp_path, settings):
        """The smallest nonzero degree zero eigenvalue follows the predicted activation"""
        report = _run("torus_double_well", tmp_path, settings)

        assert report.fits
        assert all(fit.activation_error <= 0.05 for fit in report.fits)


class TestSchemes:
    """Finite-difference and conjugated schemes"""

    def test_second_order_agreement(self, double_well, settings):
        """The gap between schemes shrinks at order close to two"""
        gaps = []
        for n in (512, 1024, 2048):
            values = []
            for scheme in (Scheme.CONJUGATED_DEC, Scheme.DIRECT_STENCIL):
                op = AssemblyConfig.from_function(double_well, (n,), scheme=scheme, settings=settings.spectral).build(0.2, 0)
                values.append(low_spectrum(op, 3, settings.spectral).eigenvalues[1])
            gaps.append(abs(values[0] - values[1]))

        orders = np.log2(np.asarray(gaps[:-1]) / np.asarray(gaps[1:]))

        assert np.all(orders >= 1.8), orders
