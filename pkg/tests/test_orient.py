import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make
from exceptions import ConsistencyError, InvalidInputError
from geom import Point2, Polygon, normalize_angle
from graph import Configuration, build_bond_graph, enumerate_faces
from orient import (
    OrientationField,
    angular_gap,
    face_orientation,
    orientation_field,
    project_P,
    segment_grains,
)
from synth import GrainSpec, hexagon_minimizer, lattice_fill, polycrystal_fill, two_hexagon_config


def grains_of(c, tol_theta=1e-6):
    faces = enumerate_faces(build_bond_graph(c))
    field = orientation_field(faces)
    return field, segment_grains(field, faces.graph, tol_theta)


@pytest.mark.parametrize("alpha, k", [(0.0, 0), (math.pi / 6, 0), (0.6, 1), (-math.pi / 6, -1), (math.pi / 2, 1)])
def test_project_P(alpha, k):
    assert project_P(alpha) == k


def test_project_P_rejects_nan():
    with pytest.raises(InvalidInputError):
        project_P(float("nan"))


def triangle(rotation):
    pts = np.array([(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)])
    c, s = math.cos(rotation), math.sin(rotation)
    return make(pts @ np.array([[c, s], [-s, c]]))


@pytest.mark.parametrize("rotation, theta", [(0.0, math.pi / 2), (math.pi / 6, 2 * math.pi / 3), (-0.2, math.pi / 2 - 0.2)])
def test_face_orientation_of_free_triangles(rotation, theta):
    faces = enumerate_faces(build_bond_graph(triangle(rotation)))
    assert face_orientation(faces.faces[0], faces.graph) == pytest.approx(theta, abs=1e-9)


def test_orientation_needs_a_triangle(unit_square):
    faces = enumerate_faces(build_bond_graph(unit_square))
    with pytest.raises(InvalidInputError):
        face_orientation(faces.faces[0], faces.graph)


def test_hexagon_orientation_is_constant(hexagon7):
    field, grains = grains_of(hexagon7)
    assert len(field) == 6
    assert set(field.values.values()) == {math.pi / 2}
    assert len(grains) == 1
    assert grains.interior_length == 0
    assert grains.exterior_length == pytest.approx(6.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=math.pi / 3 + 1e-6, max_value=2 * math.pi / 3))
def test_lattice_fill_recovers_orientation(theta):
    c = lattice_fill(Polygon.rectangle(0, 0, 1, 1), theta, 1 / 8)
    field, grains = grains_of(c)
    assert set(field.values.values()) == {theta}
    components = {f.component for f in field.faces.faces}
    assert len(grains) == len(components)


def test_noise_below_threshold_keeps_one_grain():
    c = lattice_fill(Polygon.rectangle(0, 0, 1, 1), math.pi / 2, 1 / 8)
    faces = enumerate_faces(build_bond_graph(c))
    exact = orientation_field(faces)
    rng = np.random.default_rng(7)
    noisy = OrientationField(faces, {i: v + rng.uniform(-4e-7, 4e-7) for i, v in exact.values.items()})
    assert len(segment_grains(noisy, faces.graph, 1e-6)) == 1
    assert len(noisy.distinct(1e-6)) == 1


def test_field_outside_range_is_rejected(hexagon7):
    faces = enumerate_faces(build_bond_graph(hexagon7))
    with pytest.raises(ConsistencyError):
        OrientationField(faces, {0: 0.1})


def test_two_grains_from_polycrystal():
    left = GrainSpec(Polygon.rectangle(0, 0, 1, 1), math.pi / 2)
    right = GrainSpec(Polygon.rectangle(1, 0, 2, 1), 7 * math.pi / 12)
    field, grains = grains_of(polycrystal_fill([left, right], 1 / 16))
    assert len(field.distinct()) == 2
    assert len(grains) == 2
    assert sorted(g.theta for g in grains) == pytest.approx([math.pi / 2, 7 * math.pi / 12])
    assert grains.interior_length == 0


def test_two_hexagon_grains():
    c, m = two_hexagon_config(math.pi / 2, 2 * math.pi / 3, (1.5, 0.0), 1 / 16)
    field, grains = grains_of(c)
    assert m == 0.0
    assert len(grains) == 2
    report = [g.to_dict() for g in grains]
    assert all(set(r) == {"theta", "area", "faces"} for r in report)


def test_angular_gap_is_periodic():
    assert angular_gap(math.pi / 3 + 1e-3, 2 * math.pi / 3) == pytest.approx(1e-3)
    assert angular_gap(0.5, 0.5 + math.pi / 3) == pytest.approx(0.0, abs=1e-12)


def test_grain_regions_cover_faces(hexagon7):
    _, grains = grains_of(hexagon7)
    (region,) = grains.regions
    assert region.area == pytest.approx(6 * math.sqrt(3) / 4)


def test_grains_do_not_depend_on_field_order():
    c = lattice_fill(Polygon.rectangle(0, 0, 2, 1), math.pi / 2, 1 / 8)
    faces = enumerate_faces(build_bond_graph(c))
    coords = c.coords
    values = {}
    for f in faces.triangular:
        values[f.index] = math.pi / 2 if coords[list(f.vertices), 0].mean() < 1 else math.pi / 2 + 0.1
    items = list(values.items())
    shuffled = items[:]
    np.random.default_rng(3).shuffle(shuffled)
    reference = segment_grains(OrientationField(faces, values), faces.graph)
    assert len(reference) == 2
    for order in (items[::-1], shuffled):
        grains = segment_grains(OrientationField(faces, dict(order)), faces.graph)
        assert grains.grains == reference.grains
        assert grains.grain_of_face == reference.grain_of_face
        assert grains.boundaries() == reference.boundaries()


def test_rotating_a_polycrystal_rotates_its_orientations():
    delta = 0.3
    left = GrainSpec(Polygon.rectangle(0, 0, 1, 1), math.pi / 2)
    right = GrainSpec(Polygon.rectangle(1, 0, 2, 1), 1.9)
    c = polycrystal_fill([left, right], 1 / 8, gap=1.5 / 8)
    rotation = np.array([[math.cos(delta), -math.sin(delta)], [math.sin(delta), math.cos(delta)]])
    rotated = Configuration(tuple(Point2(*xy) for xy in (c.coords @ rotation.T).tolist()), c.epsilon)
    field, grains = grains_of(c)
    turned, turned_grains = grains_of(rotated)
    before = {frozenset(f.vertices): field[f.index] for f in field.faces.triangular}
    after = {frozenset(f.vertices): turned[f.index] for f in turned.faces.triangular}
    assert before.keys() == after.keys()
    for key, theta in before.items():
        assert after[key] == pytest.approx(normalize_angle(theta + delta, math.pi / 3, 2 * math.pi / 3), abs=1e-9)
    assert len(turned_grains) == len(grains) == 2
