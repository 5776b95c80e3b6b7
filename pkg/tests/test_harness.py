import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import box

from conftest import make
from energy import quadratic_confinement
from exceptions import InvalidInputError
from finsler import WULFF_PERIMETER, min_single_crystal, partition_perimeter
from geom import Polygon
from harness import (
    SweepSpec,
    build_shape,
    integrate_over,
    isoperimetric_check,
    oracle_face_check,
    per0_upper_bound,
    run_confinement_sweep,
    run_overlap_experiment,
    run_polycrystal_bounds,
    run_single_crystal_sweep,
    run_tessellation_sweep,
)
from synth import TileFamily, hexagon_minimizer

SQUARE_SHAPE = {"type": "rectangle", "bounds": [0, 0, 1, 1]}
SQUARE_TARGET = 2 + 4 / math.sqrt(3)
TWO_SQUARES = (
    {"shape": SQUARE_SHAPE, "theta": math.pi / 2},
    {"shape": {"type": "rectangle", "bounds": [1, 0, 2, 1]}, "theta": 7 * math.pi / 12},
)
# unit-area Wulff perimeter of the honeycomb limit norm (2/√3)·φ
HONEYCOMB_WULFF = 2 / math.sqrt(3) * WULFF_PERIMETER
SITES = [(a, b) for a in range(-2, 3) for b in range(-2, 3) if abs(a + b) <= 2]


def lattice_points(ab):
    h = math.sqrt(3) / 2
    return [(a + b / 2, b * h) for a, b in ab]


def test_hexagon_minimizer_sweep():
    spec = SweepSpec(shape={"type": "hexagon", "side": 1.0}, epsilons=(1 / 2, 1 / 4, 1 / 8, 1 / 16), theta=math.pi / 2)
    report = run_single_crystal_sweep(spec)
    assert len(report.rows) == 4
    for row in report.rows:
        assert row.target == pytest.approx(6.0)
        assert row.surplus == pytest.approx(6 + 3 * row.epsilon)
        assert row.relative_error == pytest.approx(row.epsilon / 2)
        assert row.grain_count == 1
    assert report.trend_ok


@pytest.mark.parametrize(
    "shape, target",
    [(SQUARE_SHAPE, SQUARE_TARGET), ({"type": "wulff", "theta": math.pi / 2}, WULFF_PERIMETER)],
)
def test_single_crystal_sweep_converges(shape, target):
    spec = SweepSpec(shape=shape, epsilons=(1 / 8, 1 / 16, 1 / 32), theta=math.pi / 2)
    report = run_single_crystal_sweep(spec)
    assert report.rows[0].target == pytest.approx(target)
    assert report.trend_ok
    assert report.rows[-1].relative_error < 0.1
    assert report.mass_constant <= 5
    assert len(report.metadata["spec_hash"]) == 64


@pytest.mark.slow
@pytest.mark.parametrize("shape", [SQUARE_SHAPE, {"type": "wulff", "theta": math.pi / 2}])
def test_single_crystal_sweep_at_fine_scales(shape):
    spec = SweepSpec(shape=shape, epsilons=(1 / 8, 1 / 16, 1 / 32, 1 / 64), theta=math.pi / 2)
    report = run_single_crystal_sweep(spec)
    assert report.mass_constant <= 5
    errors = [err for _, err in report.errors_by_epsilon()]
    assert errors[-1] < errors[0]
    assert errors[-1] < 0.05


def test_single_crystal_sweep_needs_theta():
    with pytest.raises(InvalidInputError):
        run_single_crystal_sweep(SweepSpec(shape=SQUARE_SHAPE, epsilons=(0.5,)))


def test_random_offsets_are_reproducible():
    spec = SweepSpec(shape=SQUARE_SHAPE, epsilons=(1 / 8,), theta=1.2, offsets={"random": 3}, seed=5)
    first = spec.offset_list(1.2, 1 / 8)
    assert len(first) == 3
    assert first == spec.offset_list(1.2, 1 / 8)
    assert all(math.hypot(*xy) < 2 / 8 for xy in first)
    report = run_single_crystal_sweep(spec)
    assert [row.offset for row in report.rows] == first


@pytest.mark.parametrize(
    "document",
    [
        {"shape": SQUARE_SHAPE, "epsilons": []},
        {"shape": SQUARE_SHAPE, "epsilons": [0.1, 0.2]},
        {"shape": SQUARE_SHAPE, "epsilons": [0.1, -0.05]},
        {"shape": SQUARE_SHAPE, "epsilons": [0.1], "offsets": {"random": 0}},
        {"shape": SQUARE_SHAPE, "epsilons": [0.1], "offsets": []},
        {"shape": SQUARE_SHAPE, "epsilons": [0.1], "colour": "red"},
    ],
)
def test_sweep_spec_validation(document):
    with pytest.raises(InvalidInputError):
        SweepSpec.from_dict(document)


def test_sweep_spec_round_trips_through_dict():
    spec = SweepSpec(shape=SQUARE_SHAPE, epsilons=(0.5, 0.25), theta=1.3, offsets=((0.1, 0.2),))
    assert SweepSpec.from_dict(spec.to_dict()) == spec


def test_build_shape():
    assert build_shape({"type": "hexagon", "side": 1.0}).shape.area == pytest.approx(3 * math.sqrt(3) / 2)
    assert build_shape({"type": "wulff", "theta": 1.2, "area": 2.0}).shape.area == pytest.approx(2.0)
    assert build_shape({"type": "polygon", "vertices": [[0, 0], [0, 1], [1, 0]]}).shape.area == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        build_shape({"type": "circle"})
    with pytest.raises(InvalidInputError):
        build_shape({"type": "wulff"})


def test_sweep_csv_columns():
    spec = SweepSpec(shape=SQUARE_SHAPE, epsilons=(1 / 4, 1 / 8), theta=math.pi / 2)
    csv = run_single_crystal_sweep(spec).to_csv()
    lines = csv.splitlines()
    assert lines[0].split(",")[:6] == ["epsilon", "offset_x", "offset_y", "N", "E", "surplus"]
    assert "offset" not in lines[0].split(",")
    assert len(lines) == 3


def test_integrate_over_square():
    assert integrate_over(Polygon.rectangle(0, 0, 1, 1), quadratic_confinement) == pytest.approx(2 / 3, rel=1e-4)


def test_confinement_sweep():
    spec = SweepSpec(shape=SQUARE_SHAPE, epsilons=(1 / 8, 1 / 16, 1 / 32), theta=math.pi / 2)
    report = run_confinement_sweep(spec)
    assert report.rows[0].target == pytest.approx(SQUARE_TARGET + 2 / 3, rel=1e-4)
    for row in report.rows:
        assert row.confined > row.surplus
    assert report.rows[-1].relative_error < 0.1
    assert report.trend_ok


def test_polycrystal_bounds_for_two_squares():
    spec = SweepSpec(shape=SQUARE_SHAPE, epsilons=(1 / 8, 1 / 16), grains=TWO_SQUARES)
    report = run_polycrystal_bounds(spec)
    assert report.metadata["lower"] == pytest.approx(6.5)
    assert report.metadata["interior"] == pytest.approx(1.0)
    assert report.metadata["upper"] > report.metadata["lower"]
    for row in report.rows:
        assert row.grain_count == 2
        assert row.lower - row.slack <= row.surplus <= row.upper + row.slack


@pytest.mark.slow
def test_polycrystal_bounds_at_fine_scale():
    report = run_polycrystal_bounds(SweepSpec(shape=SQUARE_SHAPE, epsilons=(1 / 64,), grains=TWO_SQUARES))
    row = report.rows[0]
    assert row.grain_count == 2
    assert row.lower == pytest.approx(6.5)
    assert row.lower <= row.surplus <= row.upper
    assert row.slack == pytest.approx(10 / 64 * 6)


def test_polycrystal_sweep_needs_grains():
    with pytest.raises(InvalidInputError):
        run_polycrystal_bounds(SweepSpec(shape=SQUARE_SHAPE, epsilons=(0.5,)))


def test_overlap_experiment_finds_a_winning_polycrystal():
    taus = [(0.3, 0.0), (1.0, 0.0), (1.1, 0.0), (2.0, 0.0)]
    report = run_overlap_experiment(math.pi / 2, 2 * math.pi / 3, taus)
    assert len(report.rows) == 4
    assert any(row.overlap < 0.05 and row.margin >= 0.01 for row in report.rows)
    far = report.rows[-1]
    assert far.overlap == 0.0
    assert far.upper == pytest.approx(2 * WULFF_PERIMETER)
    assert far.polycrystal_wins
    assert report.crossover is not None
    assert report.to_dict()["metadata"]["crossover"] == report.crossover


@pytest.mark.slow
def test_overlap_experiment_with_discrete_surplus():
    report = run_overlap_experiment(math.pi / 2, 2 * math.pi / 3, [(1.0, 0.0)], epsilon=1 / 16)
    row = report.rows[0]
    assert row.surplus is not None
    assert row.surplus <= row.upper * 1.5


def test_square_tessellation_of_aligned_square():
    region = Polygon.rectangle(0, 0, 1, 1)
    report = run_tessellation_sweep(region, TileFamily.SQUARE, [math.pi / 2, 1.0], [1 / 8, 1 / 16, 1 / 32])
    aligned = [row for row in report.rows if row.theta == math.pi / 2]
    assert all(row.relative_error == pytest.approx(0.0, abs=1e-12) for row in aligned)
    tilted = [row.relative_error for row in report.rows if row.theta == 1.0]
    assert tilted[-1] < tilted[0]
    assert report.min_value == pytest.approx(4.0, abs=1e-9)
    assert report.per0_consistent


@pytest.mark.parametrize("theta", [math.pi / 2, 1.3])
def test_hexagon_tessellation_of_the_wulff_hexagon(theta):
    region = build_shape({"type": "wulff", "theta": theta})
    report = run_tessellation_sweep(region, TileFamily.HEXAGON, [theta], [1 / 8, 1 / 16, 1 / 32, 1 / 64])
    # the sides of W_θ run along cell edges, so the limit density is 4/3 of their length
    assert report.rows[0].target == pytest.approx(4 / 3 * WULFF_PERIMETER)
    errors = [row.relative_error for row in report.rows]
    assert errors[-1] < errors[0]
    assert errors[-1] <= 0.05


def _halves(region):
    x0, y0, x1, y1 = region.bounds
    middle = (x0 + x1) / 2
    left = Polygon.from_shapely(region.shape.intersection(box(x0 - 1, y0 - 1, middle, y1 + 1)))
    right = Polygon.from_shapely(region.shape.intersection(box(middle, y0 - 1, x1 + 1, y1 + 1)))
    return left, right


SOP_REGIONS = [
    Polygon.rectangle(0, 0, 1, 1),
    Polygon.rectangle(0, 0, 2, 1),
    Polygon.rectangle(0, 0, 3, 0.5),
    Polygon.regular(3, 1.0),
    Polygon.regular(5, 1.0, phase=0.2),
    Polygon.regular(6, 1.0),
    Polygon.regular(7, 1.0),
    Polygon.regular(9, 0.7, center=(0.3, -0.1)),
    build_shape({"type": "wulff", "theta": 1.2}),
    build_shape({"type": "hexagon", "side": 1.0}),
]


@pytest.mark.parametrize("family", [TileFamily.SQUARE, TileFamily.HEXAGON])
@pytest.mark.parametrize("region", SOP_REGIONS)
def test_per0_bound_never_exceeds_the_best_single_crystal(region, family):
    lo, hi = family.interval
    left, right = _halves(region)
    partition = [(left, lo + 0.3 * (hi - lo)), (right, lo + 0.8 * (hi - lo))]
    grid = lo + (hi - lo) * np.arange(1, 61) / 60
    _, single = min_single_crystal(region, grid, family.norm, family.interval)
    bound = per0_upper_bound(region, family, [partition])
    assert bound <= single + 1e-9
    assert bound <= partition_perimeter(partition, family.norm) + 1e-9
    assert bound / math.sqrt(region.shape.area) >= isoperimetric_check([region], family).wulff_perimeter * (1 - 1e-9)


def test_per0_with_candidate_partition():
    region = Polygon.rectangle(0, 0, 2, 1)
    halves = [(Polygon.rectangle(0, 0, 1, 1), math.pi / 2), (Polygon.rectangle(1, 0, 2, 1), 1.0)]
    bound = per0_upper_bound(region, TileFamily.SQUARE, [halves])
    assert bound == pytest.approx(6.0, abs=1e-9)
    with pytest.raises(InvalidInputError):
        per0_upper_bound(region, TileFamily.SQUARE, [halves[:1]])


def test_wulff_shape_is_isoperimetric_for_tilings():
    regions = [
        Polygon.rectangle(0, 0, 1, 1),
        Polygon.rectangle(0, 0, 3, 1),
        Polygon.regular(7, 1.0),
        build_shape({"type": "wulff", "theta": math.pi / 2}),
    ]
    result = isoperimetric_check(regions, TileFamily.HEXAGON)
    assert result.wulff_perimeter == pytest.approx(HONEYCOMB_WULFF)
    assert result.minimum == pytest.approx(HONEYCOMB_WULFF, rel=1e-6)
    square = isoperimetric_check(regions[:2], TileFamily.SQUARE)
    assert square.minimum == pytest.approx(4.0, rel=1e-6)


@pytest.mark.parametrize("fixture", ["hexagon7", "unit_square", "two_triangles", "pendant_ring", "annulus", "collinear"])
def test_oracle_agrees_on_known_configurations(fixture, request):
    assert oracle_face_check(request.getfixturevalue(fixture), resolution=256)


def test_oracle_refuses_large_configurations():
    with pytest.raises(InvalidInputError):
        oracle_face_check(hexagon_minimizer(2, 1.0))


@pytest.mark.slow
@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(SITES), min_size=1, max_size=12, unique=True))
def test_oracle_agrees_on_random_lattice_subsets(ab):
    assert oracle_face_check(make(lattice_points(ab)), resolution=256)


def test_oracle_on_a_few_rings():
    ring = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    assert oracle_face_check(make(lattice_points(ring)), resolution=256)
    outer = [(2, 0), (1, 1), (0, 2), (-1, 2), (-2, 2), (-2, 1), (-2, 0), (-1, -1), (0, -2), (1, -2), (2, -2), (2, -1)]
    assert oracle_face_check(make(lattice_points(outer)), resolution=256)
