"""
Unit tests for result tables.
"""

import math

import pytest

from morsewitten.models.experiment import ComparisonRow, CountCheck, Provenance, Report
from morsewitten.models.landscape import HypothesisReport
from morsewitten.models.spectral import Scheme, SolverKind, SweepRow
from morsewitten.models.topology import WindowSpec
from morsewitten.services.asymptotics import predict_spectrum
from morsewitten.services.barannikov import match_cells_to_points, reduce, relative_basis
from morsewitten.services.landscape import critical_points_from_complex
from morsewitten.services.storage import ResultStore
from morsewitten.services.witten_numerics import AssemblyConfig
from morsewitten.utils.exceptions import ConfigurationError


def _rows(degree=0):
    return [
        SweepRow(
            h=h,
            degree=degree,
            eigenvalues=(1e-300 * h, math.pi * h, 1.0 / 3.0),
            count_below_h32=1,
            residual_max=1.25e-14,
            scheme=Scheme.CONJUGATED_DEC,
            solver=SolverKind.DENSE_SVD,
            norm=123.456,
            floor=1.5e-20,
        )
        for h in (0.3, 0.2)
    ]


def _report(passed=True):
    return Report(
        name="unit",
        hypotheses=HypothesisReport(nondegenerate=True, distinct_values=True),
        counts=[CountCheck(h=0.2, degree=0, expected=2, measured=2, passed=True)],
        comparisons=[
            ComparisonRow(
                h=0.2,
                degree=0,
                point_ids=(1, 2),
                predicted=1e-5,
                measured=1.1e-5,
                relative_error=0.1,
                tolerance=0.3,
                passed=passed,
            )
        ],
        provenance=Provenance(config_hash="abc", versions={"python": "3"}, scheme="dec", resolution=64),
    )


@pytest.fixture
def circle_bc(square_circle):
    return match_cells_to_points(
        reduce(square_circle), critical_points_from_complex(square_circle), square_circle.max_dim
    )


class TestSweepTables:
    """Test sweep CSV files"""

    def test_read_back_exactly(self, store):
        """Seventeen significant digits reproduce every float"""
        rows = _rows()
        store.write_sweep(rows, 0)

        assert store.read_sweep(0) == rows

    def test_columns(self, store):
        """Eigenvalue columns are numbered from one"""
        path = store.write_sweep(_rows(), 0)

        header = path.read_text().splitlines()[0]
        assert header == "h,p,lambda_1,lambda_2,lambda_3,count_below_h32,residual_max,scheme,solver,norm,floor"

    def test_degrees(self, store):
        """Written degrees are discovered from file names"""
        store.write_sweep(_rows(1), 1)
        store.write_sweep(_rows(0), 0)

        assert store.sweep_degrees() == [0, 1]

    def test_deterministic(self, tmp_path, test_settings):
        """Two writes of the same rows are byte-identical"""
        first = ResultStore(tmp_path / "a", test_settings.harness).write_sweep(_rows(), 0)
        second = ResultStore(tmp_path / "b", test_settings.harness).write_sweep(_rows(), 0)

        assert first.read_bytes() == second.read_bytes()

    def test_missing_table(self, store):
        """Reading a table that was never written is a configuration error"""
        with pytest.raises(ConfigurationError):
            store.read_sweep(2)


class TestTopologyTables:
    """Test classification, pairing and basis tables"""

    def test_classification(self, store, circle_bc):
        """One row per critical point in value order"""
        store.write_classification(circle_bc)

        frame = store.read("classification.csv")
        assert frame["class"].tolist() == ["H", "L", "U", "H"]
        assert frame["partner"].tolist()[1:3] == [2, 1]
        assert frame["gap"].tolist()[1:3] == [1.0, 1.0]

    def test_pairing(self, store, square_circle):
        """Pairs first, then essential classes with infinite death"""
        store.write_pairing(reduce(square_circle))

        frame = store.read("pairing.csv")
        assert frame["kind"].tolist() == ["pair"] * 3 + ["essential"] * 2
        assert math.isinf(frame["persistence"].iloc[-1])

    def test_predictions(self, store, circle_bc):
        """Prediction rows carry the validity window"""
        store.write_predictions(predict_spectrum(circle_bc))

        frame = store.read("predictions.csv")
        assert frame["kind"].tolist().count("pair") == 2
        assert frame["h_max"].nunique() == 1

    def test_relative_basis(self, store, circle_bc):
        """Generators are listed with their reason"""
        store.write_relative_basis(relative_basis(circle_bc, WindowSpec(a=1.5, b=3.5)))

        frame = store.read("relative_basis.csv")
        assert frame["reason"].tolist() == ["UpperWithPartnerBelowA", "HomologicalInM"]


class TestReport:
    """Test report persistence"""

    def test_round_trip(self, store):
        """The JSON report reads back equal and keeps its verdict"""
        report = _report()
        store.write_report(report)

        loaded = store.read_report()

        assert loaded == report
        assert loaded.passed
        assert store.path("comparisons.csv").is_file()
        assert store.path("counts.csv").is_file()

    def test_failed_comparison_fails_report(self):
        """Any failed row fails the whole report"""
        assert not _report(passed=False).passed

    def test_missing_report(self, store):
        """A directory without a report is a configuration error"""
        with pytest.raises(ConfigurationError):
            store.read_report()

    def test_flattened_tuples(self, store):
        """Tuple fields become space-separated cells"""
        store.write_models(_report().comparisons, "comparisons.csv")

        assert store.read("comparisons.csv")["point_ids"].tolist() == ["1 2"]


class TestOperatorDump:
    """Test coordinate dumps of assembled operators"""

    def test_header_and_entries(self, store, flat_circle):
        """A header line, then one entry per line in row-major order"""
        op = AssemblyConfig.from_function(flat_circle, (32,)).build(0.5, 0)

        path = store.dump_operator(op)
        lines = path.read_text().splitlines()

        assert lines[0].startswith(f"# 32 32 {op.matrix.nnz} p=0 h=0.5 scheme=dec")
        assert len(lines) == 1 + op.matrix.nnz
        assert lines[1].split()[:2] == ["0", "0"]
        assert path.name == "operator_p0_h0.5.txt"
