"""
Unit tests for persistence reduction and the Barannikov classification.
"""

import math

import numpy as np
import pytest

from morsewitten.models.experiment import ExperimentConfig
from morsewitten.models.landscape import DomainKind, PointClass
from morsewitten.models.topology import BasisReason, WindowSpec
from morsewitten.services.barannikov import (
    betti,
    match_cells_to_points,
    reduce,
    relative_basis,
    verify_betti,
)
from morsewitten.services.filtration import build_cubical, load_simplicial, restrict_window
from morsewitten.services.landscape import critical_points_from_complex
from morsewitten.services.pipeline import persistence
from morsewitten.services.rank_oracle import relative_betti
from morsewitten.utils.exceptions import (
    AmbiguousMatchError,
    PairingMismatchError,
    UnmatchedEventError,
    WindowOnCriticalValueError,
)
from morsewitten.utils.helpers import asset_path
from tests.factories import MorseGridFactory


@pytest.fixture
def circle_points(square_circle):
    return critical_points_from_complex(square_circle)


@pytest.fixture
def circle_bc(square_circle, circle_points):
    return match_cells_to_points(reduce(square_circle), circle_points, square_circle.max_dim)


class TestReduction:
    """Test boundary matrix reduction"""

    def test_circle_pairs(self, square_circle):
        """Only the second minimum dies with positive persistence"""
        pairing = reduce(square_circle)

        assert len(pairing.pairs) == 3
        significant = pairing.significant_pairs(0.0)
        assert len(significant) == 1
        pair = significant[0]
        assert (pair.birth, pair.birth_value, pair.death_value, pair.degree) == (2, 1.0, 2.0, 0)
        assert pair.persistence == 1.0

    def test_circle_essentials(self, square_circle):
        """The global minimum and the last edge never die"""
        pairing = reduce(square_circle)

        assert [ess.cell for ess in pairing.essentials] == [0, 7]
        assert pairing.essential_counts(1) == [1, 1]

    def test_every_cell_is_accounted_for(self, torus_grid):
        """Births, deaths and essentials partition the cells"""
        pairing = reduce(torus_grid)

        cells = [pair.birth for pair in pairing.pairs] + [pair.death for pair in pairing.pairs]
        cells += [ess.cell for ess in pairing.essentials]
        assert sorted(cells) == list(range(torus_grid.n_cells))
        assert pairing.essential_counts(2) == [1, 2, 1]

    def test_verify_betti(self, torus_grid):
        """Essential counts match the Betti numbers of the torus"""
        assert verify_betti(reduce(torus_grid), torus_grid) == [1, 2, 1]

    def test_verify_betti_mismatch(self, torus_grid):
        """A wrong expectation raises"""
        with pytest.raises(PairingMismatchError):
            verify_betti(reduce(torus_grid), torus_grid, expected=[1, 0, 1])


class TestClassification:
    """Test matching persistence events to critical points"""

    def test_circle_classes(self, circle_bc):
        """Homological, lower, upper, homological in value order"""
        assert [pt.point_class for pt in circle_bc.points] == [
            PointClass.HOMOLOGICAL,
            PointClass.LOWER,
            PointClass.UPPER,
            PointClass.HOMOLOGICAL,
        ]
        assert circle_bc.pairing == {2: 1}
        assert circle_bc.betti == [1, 1]
        assert betti(circle_bc) == [1, 1]
        assert circle_bc.gaps() == [(2, 1, 1.0)]

    def test_partners_are_symmetric(self, circle_bc):
        """Lower points point back at their upper partner"""
        assert circle_bc.point(1).partner == 2
        assert circle_bc.point(2).partner == 1
        assert circle_bc.point(0).partner is None

    def test_unmatched_point(self, square_circle, circle_points):
        """An essential class with no critical point raises"""
        with pytest.raises(UnmatchedEventError):
            match_cells_to_points(reduce(square_circle), circle_points[:3], square_circle.max_dim)

    def test_point_without_event(self, square_circle, circle_points):
        """Pairs under the noise floor leave their points unmatched"""
        with pytest.raises(UnmatchedEventError):
            match_cells_to_points(reduce(square_circle), circle_points, square_circle.max_dim, noise_floor=1.5)

    def test_ambiguous_match(self, square_circle, circle_points):
        """A tolerance covering several values raises"""
        with pytest.raises(AmbiguousMatchError):
            match_cells_to_points(reduce(square_circle), circle_points, square_circle.max_dim, match_tol=10.0)

    @pytest.mark.parametrize("seed", [3, 11, 29])
    def test_random_torus(self, seed):
        """Morse grids on the torus classify with Betti numbers 1, 2, 1"""
        fc = MorseGridFactory(seed=seed)
        points = critical_points_from_complex(fc)

        bc = match_cells_to_points(reduce(fc), points, fc.max_dim)

        assert bc.betti == [1, 2, 1]
        assert len(bc.of_class(PointClass.UPPER)) == len(bc.of_class(PointClass.LOWER)) == len(bc.pairing)
        for upper, lower in bc.pairing.items():
            assert bc.point(upper).morse_index == bc.point(lower).morse_index + 1
            assert bc.point(upper).value > bc.point(lower).value

    def test_equal_maxima_on_shifted_grid(self):
        """Sampling off the mirror axis separates the maxima: two H and one pair"""
        t = 2 * math.pi * (np.arange(256) + 0.3) / 256
        fc = build_cubical(256, 1, (True, False), np.cos(2 * t) + 0.45 * np.sin(t))
        points = critical_points_from_complex(fc)

        bc = match_cells_to_points(reduce(fc), points, fc.max_dim)

        assert [pt.point_class.value for pt in bc.points] == ["H", "L", "U", "H"]
        assert bc.pairing == {2: 1}
        assert bc.point(1).value == pytest.approx(-0.55, abs=1e-3)
        assert bc.point(2).value < bc.point(3).value


class TestRefinement:
    """Test classification stability when the persistence grid is doubled"""

    @pytest.mark.parametrize(
        "config, sizes",
        [
            (ExperimentConfig(name="double_well", function="double_well", resolution=512), (256, 512)),
            (
                ExperimentConfig(
                    name="torus_perturbed", function="torus_perturbed", domain=DomainKind.FLAT_TORUS, resolution=128
                ),
                (32, 64),
            ),
        ],
    )
    def test_same_classes(self, config, sizes, test_settings):
        """Classes and pairing agree at N and 2N"""
        coarse, fine = (
            persistence(config.model_copy(update={"persistence_resolution": n}), settings=test_settings)[1]
            for n in sizes
        )

        assert [pt.point_class for pt in coarse.points] == [pt.point_class for pt in fine.points]
        assert coarse.pairing == fine.pairing
        assert coarse.betti == fine.betti


class TestRelativeBasis:
    """Test generators of sublevel pair homology"""

    def test_upper_with_partner_below(self, circle_bc):
        """The saddle survives when its partner is quotiented"""
        basis = relative_basis(circle_bc, WindowSpec(a=1.5, b=3.5))

        assert [(gen.point_id, gen.reason) for gen in basis.generators] == [
            (2, BasisReason.UPPER_WITH_PARTNER_BELOW_A),
            (3, BasisReason.HOMOLOGICAL_IN_M),
        ]
        assert basis.counts(1) == [0, 2]

    def test_lower_with_partner_above(self, circle_bc):
        """The minimum survives when its partner is dropped"""
        basis = relative_basis(circle_bc, WindowSpec(a=-math.inf, b=1.5))

        assert [(gen.point_id, gen.reason) for gen in basis.generators] == [
            (0, BasisReason.HOMOLOGICAL_IN_M),
            (1, BasisReason.LOWER_WITH_PARTNER_ABOVE_B),
        ]
        assert basis.counts(1) == [2, 0]

    def test_pair_inside_cancels(self, circle_bc):
        """A pair entirely inside the window contributes nothing"""
        assert relative_basis(circle_bc, WindowSpec(a=0.5, b=2.5)).generators == []

    def test_level_on_critical_value(self, circle_bc):
        """Window levels may not be critical values"""
        with pytest.raises(WindowOnCriticalValueError):
            relative_basis(circle_bc, WindowSpec(a=0.5, b=2.0))

    @pytest.mark.parametrize(
        "window", [(1.5, 3.5), (-math.inf, 1.5), (0.5, 2.5), (-0.5, math.inf), (2.5, 3.5)]
    )
    def test_counts_match_relative_homology(self, square_circle, circle_bc, window):
        """Generator counts equal the ranks of H(f^b, f^a)"""
        spec = WindowSpec(a=window[0], b=window[1])
        marked = restrict_window(square_circle, spec)

        assert relative_basis(circle_bc, spec).counts(1) == relative_betti(marked)

    @pytest.mark.parametrize("seed", [5, 17])
    def test_random_torus_windows(self, seed):
        """Counts agree with relative homology for windows between critical values"""
        fc = MorseGridFactory(seed=seed)
        bc = match_cells_to_points(reduce(fc), critical_points_from_complex(fc), fc.max_dim)
        values = sorted(pt.value for pt in bc.points)
        mids = [(lo + hi) / 2 for lo, hi in zip(values, values[1:])]

        rng = np.random.default_rng(seed)
        for _ in range(4):
            a, b = sorted(rng.choice(mids, size=2, replace=False))
            spec = WindowSpec(a=float(a), b=float(b))
            assert relative_basis(bc, spec).counts(2) == relative_betti(restrict_window(fc, spec))


@pytest.fixture(scope="module")
def genus_two():
    fc = load_simplicial(asset_path("genus2.simplicial"))
    return fc, match_cells_to_points(reduce(fc), critical_points_from_complex(fc), fc.max_dim)


class TestGenusTwoWindows:
    """Test relative bases around one pair of the genus-two height function"""

    def test_pair_inside_window(self, genus_two):
        """A window holding both 48 and 53 has no generator"""
        fc, bc = genus_two
        spec = WindowSpec(a=46.0, b=55.0)

        assert relative_basis(bc, spec).generators == []
        assert relative_betti(restrict_window(fc, spec)) == [0, 0, 0]

    def test_split_pair(self, genus_two):
        """A level inside the gap turns each member into a generator"""
        fc, bc = genus_two
        below, above = WindowSpec(a=46.0, b=50.0), WindowSpec(a=50.0, b=55.0)

        lower_side = relative_basis(bc, below)
        upper_side = relative_basis(bc, above)

        assert [(gen.point_id, gen.reason) for gen in lower_side.generators] == [
            (8, BasisReason.LOWER_WITH_PARTNER_ABOVE_B)
        ]
        assert [(gen.point_id, gen.reason) for gen in upper_side.generators] == [
            (9, BasisReason.UPPER_WITH_PARTNER_BELOW_A)
        ]
        assert bc.pairing[9] == 8
        assert lower_side.counts(2) == relative_betti(restrict_window(fc, below)) == [0, 1, 0]
        assert upper_side.counts(2) == relative_betti(restrict_window(fc, above)) == [0, 0, 1]
