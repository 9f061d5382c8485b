# pylint: disable=missing-function-docstring,missing-module-docstring

import json
import math

import numpy as np
import pytest
import shapely

from conftest import perturbed_semicircle

import dewet_pfem
from dewet_pfem import PolygonalCurve
from dewet_pfem.curve import contact_angles, enclosed_area, from_shape, ShapeSpec
from dewet_pfem.harness import Level
from dewet_pfem.metrics import (
    ConvergenceReport,
    convergence_orders,
    manifold_distance,
    region_of,
    wulff_shape,
)


def monte_carlo_distance(c1, c2, rng, samples):
    """Symmetric-difference area estimate and its standard error."""
    r1, r2 = region_of(c1).polygon, region_of(c2).polygon
    xmin, ymin, xmax, ymax = shapely.union(r1, r2).bounds
    box = (xmax - xmin) * (ymax - ymin)
    x = rng.uniform(xmin, xmax, samples)
    y = rng.uniform(ymin, ymax, samples)
    hits = shapely.contains_xy(r1, x, y) != shapely.contains_xy(r2, x, y)
    p = float(np.mean(hits))
    return box * p, box * math.sqrt(p * (1.0 - p) / samples)


def test_region_of_triangle(triangle):
    region = region_of(triangle)
    assert region.area == pytest.approx(1.0)
    assert region.polygon.exterior.is_ccw
    assert len(region.boundary) == 4


def test_region_of_square(square):
    region = region_of(square)
    assert region.area == pytest.approx(1.0)
    assert len(region.boundary) == 5


def test_region_of_flower_matches_shoelace():
    curve = from_shape(ShapeSpec.flower(), 500)
    assert region_of(curve).area == pytest.approx(enclosed_area(curve), abs=1e-12)


def test_region_of_self_intersecting_curve():
    bowtie = PolygonalCurve([(0.0, 0.0), (2.0, 2.0), (0.0, 2.0), (2.0, 0.0)])
    with pytest.raises(dewet_pfem.NonSimpleRegionError):
        region_of(bowtie)
    with pytest.raises(dewet_pfem.NonSimpleRegionError):
        manifold_distance(bowtie, bowtie)


def test_region_of_flat_chord(flat_chord):
    with pytest.raises(dewet_pfem.NonSimpleRegionError):
        region_of(flat_chord)


def test_manifold_distance_examples(square):
    assert manifold_distance(square, square) <= 1e-12
    assert manifold_distance(square, square.translated(2.0)) == pytest.approx(2.0)
    assert manifold_distance(square, square.translated(0.5)) == pytest.approx(1.0)


def test_manifold_distance_ignores_resolution():
    coarse = wulff_shape(math.pi / 2, math.pi / 2, 64)
    fine = wulff_shape(math.pi / 2, math.pi / 2, 128)
    distance = manifold_distance(coarse, fine)
    assert 0.0 < distance == pytest.approx(enclosed_area(fine) - enclosed_area(coarse))


def test_metric_axioms(rng):
    for _ in range(20):
        c1, c2, c3 = (perturbed_semicircle(rng, 40) for _ in range(3))
        d12 = manifold_distance(c1, c2)
        assert d12 >= 0.0
        assert d12 == pytest.approx(manifold_distance(c2, c1), abs=1e-12)
        assert manifold_distance(c1, c3) <= d12 + manifold_distance(c2, c3) + 1e-10


def test_manifold_distance_against_monte_carlo(rng):
    for _ in range(5):
        c1, c2 = perturbed_semicircle(rng, 30), perturbed_semicircle(rng, 50)
        estimate, error = monte_carlo_distance(c1, c2, rng, 200_000)
        assert abs(manifold_distance(c1, c2) - estimate) <= 4.0 * error


def test_wulff_shape_nodes():
    curve = wulff_shape(math.pi / 2, math.pi / 2, 2)
    assert np.allclose(curve.nodes, [(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)])


@pytest.mark.parametrize('theta', [math.pi / 3, math.pi / 2, 5.0 * math.pi / 6.0])
def test_wulff_shape_area_and_angle(theta):
    curve = wulff_shape(math.pi, theta, 4096)
    assert curve.y[0] == 0.0 and curve.y[-1] == 0.0
    assert enclosed_area(curve) == pytest.approx(math.pi, rel=1e-4)

    errors = [abs(contact_angles(wulff_shape(math.pi, theta, n))[0] - theta) for n in (64, 128)]
    assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.05)


def test_wulff_shape_domain():
    with pytest.raises(dewet_pfem.ParameterError):
        wulff_shape(0.0, 1.0, 8)
    with pytest.raises(dewet_pfem.ParameterError):
        wulff_shape(1.0, 0.0, 8)


def test_convergence_orders():
    assert convergence_orders([1e-2, 2.5e-3], [0.1, 0.05]) == pytest.approx([2.0])
    assert convergence_orders([8e-3, 1e-3], [0.2, 0.1]) == pytest.approx([3.0])
    orders = convergence_orders([1.04e-2, 1.83e-3], [1.0 / 360.0, 1.0 / 640.0])
    assert orders[0] == pytest.approx(3.0209, abs=2e-3)


def test_convergence_orders_errors():
    with pytest.raises(dewet_pfem.ParameterError):
        convergence_orders([1e-2, 0.0], [0.1, 0.05])
    with pytest.raises(dewet_pfem.ParameterError):
        convergence_orders([1e-2, 1e-3], [0.1, 0.1])
    with pytest.raises(dewet_pfem.ParameterError):
        convergence_orders([1e-2, 1e-3], [0.05, 0.1])
    with pytest.raises(dewet_pfem.ParameterError):
        convergence_orders([1e-2], [0.1])


def test_report_with_two_levels_has_no_order():
    levels = [Level(0.01, 0.1, 10), Level(0.005, 0.05, 20)]
    report = ConvergenceReport.from_levels('cauchy', 'pc', 0.5, levels, [3e-3])
    assert len(report.rows) == 1
    assert report.rows[0].order is None
    assert report.orders == []
    with pytest.raises(dewet_pfem.ParameterError):
        report.mean_order()


def test_report_files(tmp_path):
    levels = [Level(0.04 / 2 ** i, 0.8 / 2 ** i, 10 * 2 ** i) for i in range(3)]
    report = ConvergenceReport.from_levels('wulff', 'bdf2', 'equilibrium', levels,
                                           [4e-2, 1e-2, 2.5e-3])
    assert report.orders == pytest.approx([2.0, 2.0])
    assert report.mean_order() == pytest.approx(2.0)

    report.to_csv(tmp_path / 'report.csv')
    lines = (tmp_path / 'report.csv').read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'tau,h,error,order'
    assert len(lines) == 4
    assert lines[1].endswith(',')

    report.to_json(tmp_path / 'report.json')
    data = json.loads((tmp_path / 'report.json').read_text(encoding='utf-8'))
    assert data['kind'] == 'wulff'
    assert data['time'] == 'equilibrium'
    assert [row['N'] for row in data['rows']] == [10, 20, 40]

    table = report.format_table()
    assert 'bdf2' in table and '2.0000' in table
