import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make
from energy import (
    SQRT3_HALF,
    confined_energy,
    energy_identity_check,
    pairwise_energy,
    quadratic_confinement,
    surplus,
)
from exceptions import OverlapError
from geom import Frame, Point2
from graph import Configuration, build_bond_graph, enumerate_faces
from synth import hexagon_count, hexagon_minimizer

SITES = [(a, b) for a in range(-4, 5) for b in range(-4, 5) if abs(a + b) <= 4]


def test_pair_at_contact_distance():
    assert pairwise_energy(make([(0, 0), (1, 0)])) == -1


def test_single_point():
    c = make([(0, 0)], epsilon=0.3)
    assert pairwise_energy(c) == 0
    assert surplus(c) == pytest.approx(0.9)


def test_overlap_has_no_finite_energy():
    with pytest.raises(OverlapError):
        pairwise_energy(make([(0, 0), (0.99, 0)]))


def test_hexagon_s2_energy():
    assert pairwise_energy(hexagon_minimizer(2, 1.0)) == -42


@pytest.mark.parametrize("s", range(1, 13))
def test_hexagon_minimizers_exact(s):
    c = hexagon_minimizer(s, 1.0)
    report = energy_identity_check(c)
    faces = enumerate_faces(build_bond_graph(c))
    assert report.N == hexagon_count(s) == 3 * s * s + 3 * s + 1
    assert report.E == -(9 * s * s + 3 * s)
    assert report.E + 3 * report.N == 6 * s + 3
    assert report.chi == 1
    assert len(faces.triangular) == 6 * s * s
    assert report.wire == 0
    assert report.non_triangular_faces == 0
    assert report.union_perimeter == 6 * s


@pytest.mark.parametrize("s", [1, 2, 4, 8])
def test_hexagon_surplus_at_reciprocal_spacing(s):
    assert surplus(hexagon_minimizer(s, 1.0 / s)) == pytest.approx(6 + 3 / s)


def test_identity_unit_square(unit_square):
    report = energy_identity_check(unit_square)
    assert report.E + 3 * report.N == 8
    assert report.union_perimeter == 4
    assert report.face_excess == (1,)
    assert report.residuals == {"energy2": 0, "reconciled": 0}


def test_identity_two_triangles(two_triangles):
    report = energy_identity_check(two_triangles)
    assert report.E + 3 * report.N == 7
    assert report.union_perimeter == 4
    assert report.chi == 1


def test_identity_pendant(pendant_ring):
    report = energy_identity_check(pendant_ring)
    assert (report.N, report.E) == (11, -11)
    assert report.E + 3 * report.N == 22
    assert report.union_perimeter == 10
    assert report.face_excess == (7,)
    assert (report.wire, report.chi) == (1, 1)
    assert report.edge_counts["ext_nontri"] == 10
    # the literal category form is carried for reference only
    assert report.energy1_literal == 12


def test_identity_annulus(annulus):
    report = energy_identity_check(annulus)
    assert report.E + 3 * report.N == 23
    assert report.union_perimeter == 0
    assert report.wire == 10


def test_identity_collinear(collinear):
    report = energy_identity_check(collinear)
    assert report.E + 3 * report.N == 7
    assert report.wire == 2


def test_two_bonded_points_surplus():
    assert surplus(make([(0, 0), (1, 0)])) == pytest.approx(5.0)


def test_confined_energy_examples():
    assert confined_energy(make([(0, 0)]), quadratic_confinement) == pytest.approx(3.0)
    assert confined_energy(make([(0, 0), (1, 0)]), quadratic_confinement) == pytest.approx(5 + SQRT3_HALF)
    hexagon = hexagon_minimizer(2, 1.0)
    assert confined_energy(hexagon, lambda xy: np.zeros(len(xy))) == -42 + 3 * 19


def test_report_document(hexagon7):
    document = energy_identity_check(hexagon7).to_dict()
    assert set(document) == {"E", "N", "surplus", "terms"}
    assert document["E"] == -12
    assert document["terms"]["edges"]["ext_tri"] == 6
    assert document["terms"]["compactness_bound"] <= document["surplus"]


def lattice_configuration(sites, theta, epsilon, origin=(0.0, 0.0)):
    return Configuration.from_lattice(Frame(Point2(*origin), theta, epsilon), sites)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.sampled_from(SITES), min_size=1, max_size=len(SITES), unique=True),
    st.floats(min_value=0.0, max_value=2 * math.pi),
    st.sampled_from([1.0, 0.5, 1 / 3, 0.125]),
)
def test_identities_on_lattice_subsets(sites, theta, epsilon):
    report = energy_identity_check(lattice_configuration(sites, theta, epsilon, origin=(0.37, -1.1)))
    assert report.residuals == {"energy2": 0, "reconciled": 0}
    assert report.surplus >= report.compactness_bound


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.sampled_from(SITES), min_size=2, max_size=len(SITES), unique=True),
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=-5, max_value=5),
    st.floats(min_value=-5, max_value=5),
)
def test_energy_invariant_under_rigid_motion(sites, angle, dx, dy):
    base = lattice_configuration(sites, math.pi / 2, 1.0)
    moved = lattice_configuration(sites, math.pi / 2 + angle, 1.0, origin=(dx, dy))
    free = Configuration(moved.points, 1.0)
    assert pairwise_energy(base) == pairwise_energy(moved) == pairwise_energy(free)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.sampled_from(SITES), min_size=1, max_size=len(SITES), unique=True),
    st.floats(min_value=0.05, max_value=20),
)
def test_surplus_scales_with_epsilon(sites, factor):
    unit = lattice_configuration(sites, math.pi / 2, 1.0)
    scaled = lattice_configuration(sites, math.pi / 2, factor)
    assert pairwise_energy(scaled) == pairwise_energy(unit)
    assert surplus(scaled) == pytest.approx(factor * surplus(unit))


def hex_distance(site):
    a, b = site
    return (abs(a) + abs(b) + abs(a + b)) // 2


def test_slit_inside_ring_next_to_a_second_component():
    # ring of radius 2 with a two-bond spoke: (1, 0) closes two triangles, (0, 0) dangles
    ring = [s for s in SITES if hex_distance(s) == 2]
    frame = Frame(Point2(0.0, 0.0), math.pi / 2, 1.0)
    far = Frame(Point2(20.0, 0.0), 1.9, 1.0)
    c = Configuration.merge(
        [
            Configuration.from_lattice(frame, ring + [(1, 0), (0, 0)]),
            Configuration.from_lattice(far, [s for s in SITES if hex_distance(s) <= 1]),
        ]
    )
    report = energy_identity_check(c)
    assert report.residuals == {"energy2": 0, "reconciled": 0}
    assert (report.N, report.E) == (21, -28)
    assert report.wire == 1
    assert report.non_triangular_faces == 1
    assert report.chi == 2
