"""
This module provides pytest fixtures for building the curves and scheme
parameters used across the test modules: small hand-checked polygons,
sampled semicircles and semi-ellipses, and a temporary output directory.
"""
# pylint: disable=missing-function-docstring

import math

import numpy as np
import pytest

from dewet_pfem import PolygonalCurve, SchemeParams, ShapeSpec, from_shape


TRIANGLE_NODES = [(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
SQUARE_NODES = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]
FLAT_NODES = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]

THETA_DEWET = 5.0 * math.pi / 6.0


def semicircle(N, radius=1.0):  # pylint: disable=invalid-name
    return from_shape(ShapeSpec.semi_ellipse(radius, radius), N)


def perturbed_semicircle(rng, N, amplitude=0.05):  # pylint: disable=invalid-name
    """Semicircle with random radial perturbations of the interior nodes."""
    phi = math.pi * (1.0 - np.arange(N + 1) / N)
    radius = 1.0 + amplitude * rng.uniform(-1.0, 1.0, N + 1)
    radius[0] = radius[-1] = 1.0
    nodes = np.column_stack((radius * np.cos(phi), radius * np.sin(phi)))
    nodes[0, 1] = nodes[-1, 1] = 0.0
    return PolygonalCurve(nodes)


@pytest.fixture
def triangle():
    return PolygonalCurve(TRIANGLE_NODES)


@pytest.fixture
def square():
    return PolygonalCurve(SQUARE_NODES)


@pytest.fixture
def flat_chord():
    return PolygonalCurve(FLAT_NODES)


@pytest.fixture
def semicircle_64():
    return semicircle(64)


@pytest.fixture
def semi_ellipse_32():
    return from_shape(ShapeSpec.semi_ellipse(2.0, 1.0), 32)


@pytest.fixture
def dewet_params():
    return SchemeParams(tau=0.01, theta_young=THETA_DEWET)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / 'out'
    yield path
