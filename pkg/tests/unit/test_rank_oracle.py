"""
Unit tests for the homology-rank classification oracle.
"""

import pytest

from morsewitten.config import PersistenceSettings
from morsewitten.models.landscape import PointClass
from morsewitten.services.barannikov import match_cells_to_points, reduce
from morsewitten.services.filtration import load_simplicial
from morsewitten.services.landscape import critical_points_from_complex
from morsewitten.services.rank_oracle import (
    classify_by_rank_oracle,
    compare_classifications,
    rational_betti,
)
from morsewitten.utils.exceptions import OracleSizeExceededError, ValidationError
from morsewitten.utils.helpers import asset_path
from tests.factories import MorseGridFactory


class TestRankOracle:
    """Test classification from ranks of sublevel homology"""

    def test_circle(self, square_circle):
        """The oracle pairs the saddle at 2 with the minimum at 1"""
        points = critical_points_from_complex(square_circle)

        bc = classify_by_rank_oracle(square_circle, points)

        assert bc.pairing == {2: 1}
        assert bc.betti == [1, 1]

    def test_level_offsets(self, square_circle):
        """Points without vertices are classified through value offsets"""
        points = [pt.model_copy(update={"vertex": None}) for pt in critical_points_from_complex(square_circle)]

        bc = classify_by_rank_oracle(square_circle, points, epsilon=0.25)

        assert bc.pairing == {2: 1}

    def test_offsets_required(self, square_circle):
        """Points without vertices need a positive offset"""
        points = [pt.model_copy(update={"vertex": None}) for pt in critical_points_from_complex(square_circle)]

        with pytest.raises(ValidationError):
            classify_by_rank_oracle(square_circle, points)

    def test_size_limit(self, torus_grid):
        """Large complexes are refused"""
        with pytest.raises(OracleSizeExceededError):
            classify_by_rank_oracle(torus_grid, [], settings=PersistenceSettings(oracle_max_cells=5))

    @pytest.mark.parametrize("seed", [2, 7, 13, 19])
    def test_agrees_with_reduction(self, seed):
        """Reduction and ranks give the same classes and partners"""
        fc = MorseGridFactory(seed=seed)
        points = critical_points_from_complex(fc)

        by_reduction = match_cells_to_points(reduce(fc), points, fc.max_dim)
        by_ranks = classify_by_rank_oracle(fc, points)

        assert compare_classifications(by_reduction, by_ranks) == []

    def test_sphere(self):
        """The octahedron height function has one minimum and one maximum"""
        fc = load_simplicial(asset_path("octahedron.simplicial"))
        points = critical_points_from_complex(fc)

        bc = classify_by_rank_oracle(fc, points)

        assert bc.betti == rational_betti(fc) == [1, 0, 1]
        assert compare_classifications(bc, match_cells_to_points(reduce(fc), points, fc.max_dim)) == []

    def test_compare_reports_differences(self, square_circle):
        """Differing classes and partners are listed"""
        points = critical_points_from_complex(square_circle)
        bc = classify_by_rank_oracle(square_circle, points)
        other = bc.assemble([pt.classified(PointClass.UNCLASSIFIED) for pt in points], {}, 1)

        differences = compare_classifications(bc, other)

        assert "partner of 2: 1 vs None" in differences
        assert any(diff.startswith("point 1:") for diff in differences)
