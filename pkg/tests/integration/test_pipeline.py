"""
Integration tests for the analyze, persistence and verify pipelines.
"""

import math

import pytest

from morsewitten.models.landscape import PointClass
from morsewitten.models.spectral import Scheme
from morsewitten.models.experiment import ExperimentConfig
from morsewitten.services.pipeline import analyze, persistence, recompute_report, verify
from morsewitten.utils.exceptions import ConfigurationError
from tests.conftest import EXPERIMENTS_DIR
from tests.factories import DoubleWellConfigFactory, ExperimentConfigFactory


class TestAnalyze:
    """Test classification and prediction runs"""

    def test_cosine(self, store, test_settings):
        """One minimum and one maximum, both homological"""
        config = ExperimentConfigFactory(name="cosine", resolution=1024)

        result = analyze(config, store, test_settings)

        assert [pt.point_class for pt in result.bc.points] == [PointClass.HOMOLOGICAL] * 2
        assert result.bc.betti == [1, 1]
        assert result.predictions.zero_count(0) == 1
        assert result.predictions.zero_count(1) == 1
        assert result.hypotheses.excellent
        for name in ("classification.csv", "pairing.csv", "predictions.csv", "analysis.txt"):
            assert store.path(name).is_file()

    def test_double_well(self, store, test_settings):
        """The shallow well pairs with the lower maximum"""
        config = DoubleWellConfigFactory(name="double_well")

        result = analyze(config, store, test_settings)

        classes = [pt.point_class.value for pt in result.bc.points]
        assert classes == ["H", "L", "U", "H"]
        assert result.bc.pairing == {2: 1}
        (pair,) = result.predictions.nonzero(0)
        assert pair.activation == pytest.approx(2 * (result.bc.points[2].value - result.bc.points[1].value))
        assert pair.coefficient is not None
        assert [p.point_id for p in result.predictions.nonzero(1)] == [2]
        assert result.attempts == 1

    def test_genus_two_surface(self, store, test_settings):
        """Abstract complexes classify without prefactors"""
        config = ExperimentConfig.from_file(EXPERIMENTS_DIR / "genus2.env")

        result = analyze(config, store, test_settings)

        assert result.bc.betti == [1, 4, 1]
        assert result.landscape.function is None
        assert all(pred.coefficient is None for pred in result.predictions.all() if not pred.is_zero)

    def test_genus_two_height_function(self, store, test_settings):
        """Six homological points and three upper/lower pairs"""
        config = ExperimentConfig.from_file(EXPERIMENTS_DIR / "genus2.env")

        result = analyze(config, store, test_settings)

        points = result.bc.points
        assert len(points) == 12
        assert len(store.read("classification.csv")) == 12
        assert [pt.value for pt in points if pt.point_class == PointClass.HOMOLOGICAL] == [0, 12, 25, 34, 45, 63]
        pairs = sorted((points[u].value, points[l].value) for u, l in result.bc.pairing.items())
        assert pairs == [(20, 14), (53, 48), (61, 36)]
        assert result.hypotheses.ok
        assert result.predictions.zero_count(1) == 4
        assert [p.point_id for p in result.predictions.nonzero(1)] == [6, 3, 8]
        assert [p.point_id for p in result.predictions.nonzero(2)] == [10, 9]

    def test_window_below_saddle(self, store, test_settings):
        """Cutting below the saddle leaves the shallow well without a partner"""
        config = ExperimentConfig.from_file(EXPERIMENTS_DIR / "double_well_cut.env")

        result = analyze(config, store, test_settings)

        assert result.basis is not None
        assert result.predictions.nonzero(0) == []
        assert result.predictions.zero_count(0) == 2
        assert store.path("relative_basis.csv").is_file()


class TestPersistence:
    """Test pairing-only runs"""

    def test_pairing_and_basis(self, store, test_settings):
        """Windowed persistence writes the relative basis too"""
        config = DoubleWellConfigFactory(name="cut", window=(-math.inf, 0.5))

        pairing, bc, basis = persistence(config, store, test_settings)

        assert bc.betti == [1, 1]
        assert len(pairing.essentials) == 2
        assert basis is not None and len(basis.generators) == 2
        assert not store.path("predictions.csv").exists()


class TestVerify:
    """Test sweeps judged against predictions"""

    def test_cosine_passes_and_recomputes(self, store, test_settings):
        """Every verdict can be recomputed from the written tables"""
        config = ExperimentConfigFactory(name="cosine", resolution=512, h_list=[0.3, 0.25, 0.2], degrees=[0, 1])

        report = verify(config, store, test_settings)

        assert report.passed
        assert len(report.counts) == 6
        assert all(row.kernel_measured == 1 for row in report.counts)
        assert report.comparisons == []
        assert store.path("report.json").is_file()
        assert store.path("sweep_p1.csv").is_file()

        check = recompute_report(store, test_settings)

        assert check.consistent
        assert check.report.passed

    def test_tampered_table_is_detected(self, store, test_settings):
        """Editing a sweep table changes the recomputed verdict"""
        config = ExperimentConfigFactory(name="cosine", resolution=512, h_list=[0.3, 0.25], degrees=[0])
        verify(config, store, test_settings)
        table = store.path("sweep_p0.csv")
        lines = table.read_text().splitlines()
        fields = lines[1].split(",")
        fields[5] = "3"
        lines[1] = ",".join(fields)
        table.write_text("\n".join(lines) + "\n")

        check = recompute_report(store, test_settings)

        assert not check.consistent
        assert not check.report.passed

    def test_needs_h_values(self, store, test_settings):
        """Verification without h values is a configuration error"""
        with pytest.raises(ConfigurationError):
            verify(ExperimentConfigFactory(h_list=[]), store, test_settings)

    def test_needs_smooth_landscape(self, store, test_settings):
        """Abstract complexes carry no operator"""
        config = ExperimentConfig.from_file(EXPERIMENTS_DIR / "genus2.env", overrides={"h_list": "0.3"})

        with pytest.raises(ConfigurationError):
            verify(config, store, test_settings)

    def test_stencil_degree_zero_only(self, store, test_settings):
        """The stencil scheme refuses one-forms"""
        config = DoubleWellConfigFactory(scheme=Scheme.DIRECT_STENCIL, degrees=[0, 1])

        with pytest.raises(ConfigurationError):
            verify(config, store, test_settings)
