"""
Test data factories for morse-witten-lab tests.

This module provides factory classes for generating critical points,
experiment configurations and Morse lower-star grids in a consistent way.
"""

from typing import Any, List

import factory
import numpy as np

from morsewitten.models.experiment import ExperimentConfig
from morsewitten.models.landscape import CriticalPoint, DomainKind
from morsewitten.models.spectral import Scheme
from morsewitten.models.topology import FilteredComplex
from morsewitten.services.filtration import build_cubical, with_vertex_values
from morsewitten.services.landscape import critical_points_from_complex
from morsewitten.utils.exceptions import DegenerateCriticalError


# Base factory class
class BaseFactory(factory.Factory):
    """Base factory with common functionality"""

    @classmethod
    def create_batch(cls, size: int, **kwargs) -> List[Any]:
        """Create a batch of instances"""
        return [cls.create(**kwargs) for _ in range(size)]

    @classmethod
    def build_batch(cls, size: int, **kwargs) -> List[Any]:
        """Build a batch of instances without saving"""
        return [cls.build(**kwargs) for _ in range(size)]


# Landscape factories
class CriticalPointFactory(BaseFactory):
    """Factory for one-dimensional critical points; index 1 gets a negative curvature"""

    class Meta:
        model = CriticalPoint

    id = factory.Sequence(lambda n: n)
    position = factory.LazyAttribute(lambda o: (0.1 * o.id,))
    value = factory.LazyAttribute(lambda o: float(o.id))
    morse_index = 0
    hessian_eigs = factory.LazyAttribute(lambda o: (-1.0,) if o.morse_index == 1 else (4.0,))


class ExperimentConfigFactory(BaseFactory):
    """Factory for small circle experiments"""

    class Meta:
        model = ExperimentConfig

    name = factory.Sequence(lambda n: f"experiment_{n}")
    function = "cosine"
    domain = DomainKind.CIRCLE
    resolution = 256
    h_list = factory.LazyFunction(lambda: [0.3, 0.2, 0.1])
    degrees = factory.LazyFunction(lambda: [0])
    scheme = Scheme.CONJUGATED_DEC


class DoubleWellConfigFactory(ExperimentConfigFactory):
    """Factory for the asymmetric double well"""

    function = "double_well"
    h_list = factory.LazyFunction(lambda: [0.3, 0.25, 0.2, 0.15])
    degrees = factory.LazyFunction(lambda: [0, 1])


# Complex factories
class MorseGridFactory(BaseFactory):
    """
    Factory for lower-star grids whose critical vertices are all simple.

    Vertex values are redrawn until every lower star carries at most one
    homology class.
    """

    class Meta:
        model = FilteredComplex

    nx = 6
    ny = 6
    periodic = (True, True)

    seed = factory.Sequence(lambda n: n)
    max_redraws = 50

    @classmethod
    def _create(cls, model_class, nx, ny, periodic, seed, max_redraws, **kwargs):
        rng = np.random.default_rng(seed)
        fc = build_cubical(nx, ny, periodic, rng.random(nx * ny))
        for _ in range(max_redraws):
            try:
                critical_points_from_complex(fc)
                return fc
            except DegenerateCriticalError:
                fc = with_vertex_values(fc, rng.random(fc.n_vertices))
        raise DegenerateCriticalError("no Morse vertex values drawn", min_abs_eig=0.0)

    @classmethod
    def _build(cls, model_class, *args, **kwargs):
        return cls._create(model_class, *args, **kwargs)
