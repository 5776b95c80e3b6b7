import math

import pytest

from conftest import make
from exceptions import InvalidInputError
from geom import Polygon
from particle_io import dump_json, format_particles, parse_particles, read_json, read_particles, write_particles
from synth import GrainSpec, hexagon_minimizer, polycrystal_fill


def test_exact_configuration_keeps_its_lattice(tmp_path):
    c = hexagon_minimizer(2, 0.5, theta=1.3, origin=(0.1, -0.2))
    path = tmp_path / "hexagon.csv"
    write_particles(path, c)
    back = read_particles(path, 0.5)
    assert back.is_exact
    assert back.points == c.points
    assert back.frames == c.frames


def test_polycrystal_keeps_frames():
    grains = [
        GrainSpec(Polygon.rectangle(0, 0, 1, 1), math.pi / 2),
        GrainSpec(Polygon.rectangle(1, 0, 2, 1), 1.9),
    ]
    c = polycrystal_fill(grains, 0.25)
    back = parse_particles(format_particles(c), 0.25)
    assert len(back.frames) == 2
    assert [lp.frame for lp in back.lattice] == [lp.frame for lp in c.lattice]


def test_plain_coordinates():
    c = parse_particles("x,y\n0,0\n1,0\n0.5,0.8660254037844386\n", 1.0)
    assert len(c) == 3
    assert c.lattice is None
    assert "# lattice" not in format_particles(c)


def test_extra_columns_are_ignored():
    c = parse_particles("x,y,label\n0,0,a\n1,0,b\n", 1.0)
    assert len(c) == 2


@pytest.mark.parametrize(
    "text",
    [
        "a,b\n0,0\n",
        "x,y\n0,zero\n",
        "x,y,a,b\n0,0,0,0\n",
        "# lattice: 0 0 1.5707963267948966 1\nx,y,a,b,frame\n0,0,0,0,3\n",
        "",
    ],
)
def test_bad_particle_files(text):
    with pytest.raises(InvalidInputError):
        parse_particles(text, 1.0)


def test_missing_file(tmp_path):
    with pytest.raises(InvalidInputError):
        read_particles(tmp_path / "missing.csv", 1.0)


def test_json_documents(tmp_path):
    text = dump_json({"b": 1, "a": [1.5, "ε"]})
    assert text.index('"a"') < text.index('"b"')
    path = tmp_path / "doc.json"
    path.write_text(text, encoding="utf-8")
    assert read_json(path) == {"a": [1.5, "ε"], "b": 1}
    path.write_text("{", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        read_json(path)


def test_float_coordinates_survive_formatting():
    c = make([(0.1, 0.2), (1.1, 0.2)])
    assert parse_particles(format_particles(c), 1.0).points == c.points
