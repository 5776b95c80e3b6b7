"""Shared configurations for the test suite."""

from __future__ import annotations

import math

import pytest

from geom import Point2
from graph import Configuration
from synth import hexagon_minimizer

# 3 x 2 rectangle traced by ten unit bonds
RECTANGLE_RING = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (2, 2), (1, 2), (0, 2), (0, 1)]
PENDANT_TIP = (1 + math.sin(math.pi / 12), math.cos(math.pi / 12))


def make(points, epsilon: float = 1.0) -> Configuration:
    return Configuration(tuple(Point2(*p) for p in points), epsilon)


@pytest.fixture
def hexagon7() -> Configuration:
    return hexagon_minimizer(1, 1.0)


@pytest.fixture
def unit_square() -> Configuration:
    return make([(0, 0), (1, 0), (1, 1), (0, 1)])


@pytest.fixture
def two_triangles() -> Configuration:
    h = math.sqrt(3) / 2
    return make([(0, 0), (1, 0), (0.5, h), (1.5, h)])


@pytest.fixture
def disjoint_triangles() -> Configuration:
    h = math.sqrt(3) / 2
    return make([(0, 0), (1, 0), (0.5, h), (5, 0), (6, 0), (5.5, h)])


@pytest.fixture
def collinear() -> Configuration:
    return make([(0, 0), (1, 0), (2, 0)])


@pytest.fixture
def pendant_ring() -> Configuration:
    """Rectangle ring with one bond dangling into the enclosed face."""
    return make(RECTANGLE_RING + [PENDANT_TIP])


@pytest.fixture
def annulus() -> Configuration:
    """Rectangle ring around an isolated particle: the enclosed cycle is not a face."""
    return make(RECTANGLE_RING + [(1.5, 1.0)])
