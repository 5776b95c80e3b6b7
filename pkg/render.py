"""SVG rendering of analyzed configurations through Jinja2 templates."""

from __future__ import annotations

import math
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from exceptions import InvalidInputError
from graph import EdgeClass
from orient import THETA_MIN
from pipeline import AnalysisResult

TEMPLATE_DIR = Path(__file__).parent / "templates"
TEMPLATE_NAME = "configuration.svg.j2"
COLOR_MODES = ("orientation", "edge-class", "grain")
GOLDEN_ANGLE_DEGREES = 137.508
PIXELS_PER_UNIT = 40.0
NEUTRAL_FILL = "#dddddd"

EDGE_STYLES = {
    EdgeClass.INTERIOR_TRI_TRI: {"stroke": "#9a9a9a", "width": 0.06, "dash": ""},
    EdgeClass.EXT_TRI: {"stroke": "#000000", "width": 0.12, "dash": ""},
    EdgeClass.EXT_NONTRI: {"stroke": "#1f4e9c", "width": 0.12, "dash": ""},
    EdgeClass.INT1: {"stroke": "#c0392b", "width": 0.1, "dash": ""},
    EdgeClass.INT2: {"stroke": "#c0392b", "width": 0.1, "dash": "0.2 0.1"},
    EdgeClass.WIRE: {"stroke": "#27803b", "width": 0.1, "dash": "0.05 0.1"},
}
# fills used when coloring faces by their boundary classes
CLASS_FILLS = {True: "#f3e2b3", False: "#cfe0f5"}

_environment: Environment | None = None


def _env() -> Environment:
    global _environment
    if _environment is None:
        _environment = Environment(
            loader=FileSystemLoader(str(TEMPLATE_DIR)),
            undefined=StrictUndefined,
            autoescape=True,
            keep_trailing_newline=True,
        )
    return _environment


def _num(value: float) -> str:
    """Fixed six-decimal formatting; negative zero is printed as zero."""
    text = f"{value:.6f}"
    return "0.000000" if text == "-0.000000" else text


def orientation_hue(theta: float) -> float:
    return 360.0 * (theta - THETA_MIN) / (math.pi / 3)


def grain_hue(j: int) -> float:
    return (j * GOLDEN_ANGLE_DEGREES) % 360.0


def _hsl(hue: float) -> str:
    return f"hsl({hue:.3f}, 70%, 60%)"


def render_svg(result: AnalysisResult, color_by: str = "orientation", title: str = "configuration") -> str:
    """Deterministic SVG of the particles, bonds and faces of one analysis."""
    if color_by not in COLOR_MODES:
        raise InvalidInputError(f"color_by must be one of {COLOR_MODES}, got {color_by!r}")
    c = result.configuration
    coords = c.coords
    eps = c.epsilon
    if len(c):
        x0, y0 = coords.min(axis=0) - eps
        x1, y1 = coords.max(axis=0) + eps
    else:
        x0, y0, x1, y1 = -eps, -eps, eps, eps

    def pt(i: int) -> tuple[str, str]:
        return _point(coords[i])

    faces = []
    for face in result.faces.faces:
        theta = result.field.values.get(face.index)
        if color_by == "orientation":
            fill = _hsl(orientation_hue(theta)) if theta is not None else NEUTRAL_FILL
        elif color_by == "grain":
            j = result.grains.grain_of_face.get(face.index)
            fill = _hsl(grain_hue(j)) if j is not None else NEUTRAL_FILL
        else:
            fill = CLASS_FILLS[face.is_triangular]
        faces.append(
            {
                "index": face.index,
                "path": _area_path(result.faces.region(face)),
                "fill": fill,
                "theta": _num(theta) if theta is not None else None,
            }
        )

    bonds = []
    for e, label in enumerate(result.classification.labels):
        (ax, ay), (bx, by) = pt(int(result.graph.edges[e, 0])), pt(int(result.graph.edges[e, 1]))
        style = EDGE_STYLES[label]
        bonds.append(
            {
                "x1": ax,
                "y1": ay,
                "x2": bx,
                "y2": by,
                "label": label.value,
                "style": {"stroke": style["stroke"], "width": _num(style["width"] * eps), "dash": _scale_dash(style["dash"], eps)},
            }
        )

    grains = []
    if color_by == "grain":
        grains = [{"index": j, "path": _area_path(region)} for j, region in enumerate(result.grains.regions)]

    width, height = x1 - x0, y1 - y0
    return _env().get_template(TEMPLATE_NAME).render(
        title=title,
        width=_num(width * PIXELS_PER_UNIT / eps),
        height=_num(height * PIXELS_PER_UNIT / eps),
        view_box=" ".join(_num(v) for v in (x0, -y1, width, height)),
        faces=faces,
        bonds=bonds,
        grains=grains,
        outline_width=_num(0.16 * eps),
        particles=[{"x": x, "y": y} for x, y in (pt(i) for i in range(len(c)))],
        radius=_num(eps / 2),
        particle_stroke=_num(0.04 * eps),
    )


def _point(xy) -> tuple[str, str]:
    # SVG's y axis points down
    return _num(xy[0]), _num(-xy[1])


def _ring_path(ring) -> str:
    coords = list(ring.coords)[:-1]
    return "M " + " L ".join(" ".join(_point(xy)) for xy in coords) + " Z"


def _area_path(geometry) -> str:
    """One path for the polygons of a shapely area, holes as extra subpaths."""
    rings = []
    for part in getattr(geometry, "geoms", [geometry]):
        if part.geom_type != "Polygon" or part.is_empty:
            continue
        rings.append(part.exterior)
        rings.extend(part.interiors)
    return " ".join(_ring_path(ring) for ring in rings)


def _scale_dash(dash: str, eps: float) -> str:
    return " ".join(_num(float(v) * eps) for v in dash.split())


def write_svg(path: str | Path, result: AnalysisResult, color_by: str = "orientation") -> None:
    Path(path).write_text(render_svg(result, color_by, title=Path(path).stem), encoding="utf-8")
