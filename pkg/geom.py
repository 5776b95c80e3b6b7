"""Planar geometry primitives shared by every module.

Points are plain named tuples, polygons are immutable counterclockwise vertex
rings. Lattice points keep their integer coordinates together with the frame
that embeds them, so that bond detection on synthesized inputs never depends
on floating point comparisons.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from shapely.geometry import LinearRing
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.geometry.polygon import orient

from exceptions import InvalidInputError

SIXTH_TURN = math.pi / 3
DEFAULT_RELATIVE_TOLERANCE = 1e-9
DEGENERATE_AREA_FACTOR = 1e-12


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Frame:
    """Embedding of the triangular lattice: origin, orientation θ̄ and spacing ε.

    The lattice is generated by ε·e^{i(θ̄−π/2)} and ε·e^{i(θ̄−π/6)}; the six
    neighbours of (a, b) are (±1, 0), (0, ±1), (1, −1) and (−1, 1).
    """

    origin: Point2
    theta: float
    spacing: float

    def __post_init__(self) -> None:
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise InvalidInputError(f"lattice spacing must be positive, got {self.spacing!r}")
        if not math.isfinite(self.theta):
            raise InvalidInputError("lattice orientation must be finite")
        object.__setattr__(self, "origin", Point2(float(self.origin[0]), float(self.origin[1])))

    @cached_property
    def basis(self) -> np.ndarray:
        """Columns are the two generators scaled by the spacing."""
        u = self.theta - math.pi / 2
        w = self.theta - math.pi / 6
        return self.spacing * np.array([[math.cos(u), math.cos(w)], [math.sin(u), math.sin(w)]])

    def embed(self, a: int, b: int) -> Point2:
        m = self.basis
        return Point2(
            self.origin.x + m[0, 0] * a + m[0, 1] * b,
            self.origin.y + m[1, 0] * a + m[1, 1] * b,
        )

    def embed_many(self, ab: np.ndarray) -> np.ndarray:
        ab = np.asarray(ab, dtype=float).reshape(-1, 2)
        return ab @ self.basis.T + np.array(self.origin)

    def to_lattice(self, xy: np.ndarray) -> np.ndarray:
        """Real lattice coordinates of physical points (inverse of `embed_many`)."""
        xy = np.asarray(xy, dtype=float).reshape(-1, 2) - np.array(self.origin)
        return np.linalg.solve(self.basis, xy.T).T


@dataclass(frozen=True)
class LatticePoint:
    a: int
    b: int
    frame: Frame

    @property
    def point(self) -> Point2:
        return self.frame.embed(self.a, self.b)


class Location(str, enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def signed_area(coords: np.ndarray) -> float:
    """Shoelace value of a closed ring given without its repeated first vertex."""
    x = coords[:, 0]
    y = coords[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, vertices in counterclockwise order, no closing vertex."""

    vertices: tuple[Point2, ...]

    def __post_init__(self) -> None:
        verts = tuple(Point2(float(v[0]), float(v[1])) for v in self.vertices)
        if len(verts) < 3:
            raise InvalidInputError(f"polygon needs at least 3 vertices, got {len(verts)}")
        if not all(math.isfinite(c) for v in verts for c in v):
            raise InvalidInputError("polygon vertices must be finite")
        for i, v in enumerate(verts):
            if v == verts[i - 1]:
                raise InvalidInputError(f"polygon repeats vertex {v} consecutively")
        object.__setattr__(self, "vertices", verts)
        if signed_area(self.coords) <= 0:
            raise InvalidInputError("polygon must be counterclockwise with positive area")
        if not LinearRing(self.coords).is_simple:
            raise InvalidInputError("polygon must be simple")

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "Polygon":
        """Build a polygon from vertices in either orientation."""
        pts = [Point2(float(p[0]), float(p[1])) for p in points]
        if len(pts) >= 2 and pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) >= 3 and signed_area(np.array(pts)) < 0:
            pts.reverse()
        return cls(tuple(pts))

    @classmethod
    def from_shapely(cls, geometry) -> "Polygon":
        if geometry.geom_type != "Polygon" or geometry.is_empty:
            raise InvalidInputError(f"expected a single polygon, got {geometry.geom_type}")
        if len(geometry.interiors):
            raise InvalidInputError("polygons with holes are not supported")
        ring = orient(geometry, sign=1.0).exterior.coords[:-1]
        return cls.from_points(ring)

    @classmethod
    def regular(cls, n: int, circumradius: float, center: Sequence[float] = (0.0, 0.0), phase: float = 0.0) -> "Polygon":
        angles = phase + 2 * math.pi * np.arange(n) / n
        return cls.from_points(
            zip(center[0] + circumradius * np.cos(angles), center[1] + circumradius * np.sin(angles))
        )

    @classmethod
    def rectangle(cls, x0: float, y0: float, x1: float, y1: float) -> "Polygon":
        return cls.from_points([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @cached_property
    def shape(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.coords)

    @property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.coords, -1, axis=0) - self.coords

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        c = self.coords
        return float(c[:, 0].min()), float(c[:, 1].min()), float(c[:, 0].max()), float(c[:, 1].max())

    @cached_property
    def diameter(self) -> float:
        c = self.coords
        d = c[:, None, :] - c[None, :, :]
        return float(np.sqrt((d ** 2).sum(axis=-1)).max())

    @property
    def centroid(self) -> Point2:
        c = self.shape.centroid
        return Point2(c.x, c.y)

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon(tuple(Point2(v.x + dx, v.y + dy) for v in self.vertices))

    def rotated(self, angle: float, about: Sequence[float] = (0.0, 0.0)) -> "Polygon":
        c, s = math.cos(angle), math.sin(angle)
        ox, oy = about
        return Polygon(
            tuple(
                Point2(ox + c * (v.x - ox) - s * (v.y - oy), oy + s * (v.x - ox) + c * (v.y - oy))
                for v in self.vertices
            )
        )

    def scaled(self, factor: float, about: Sequence[float] = (0.0, 0.0)) -> "Polygon":
        if factor <= 0:
            raise InvalidInputError("scale factor must be positive")
        ox, oy = about
        return Polygon(tuple(Point2(ox + factor * (v.x - ox), oy + factor * (v.y - oy)) for v in self.vertices))


def polygon_metrics(p: Polygon) -> tuple[float, float]:
    """Return (area, perimeter) of a polygon."""
    area = signed_area(p.coords)
    if area <= DEGENERATE_AREA_FACTOR * p.diameter ** 2:
        raise InvalidInputError(f"degenerate polygon (area {area!r})")
    perimeter = float(np.hypot(*p.edge_vectors.T).sum())
    return area, perimeter


def normalize_angle(alpha: float, lower: float = -math.pi / 6, upper: float = math.pi / 6) -> float:
    """Reduce `alpha` into the half-open interval (lower, upper] modulo its length."""
    period = upper - lower
    if period <= 0:
        raise InvalidInputError("empty angle interval")
    value = alpha - period * math.floor((alpha - lower) / period)
    if value <= lower:
        value += period
    if value > upper:
        value -= period
    return value


def segment_distances(px: np.ndarray, py: np.ndarray, a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    """Distances from points to the closed segment [a, b]."""
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    length2 = dx * dx + dy * dy
    if length2 == 0:
        return np.hypot(px - ax, py - ay)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / length2, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def classify_points(xs, ys, p: Polygon, tol: float = 0.0) -> np.ndarray:
    """Ray-casting classification of many points: 1 inside, 0 boundary, -1 outside."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    inside = np.zeros(xs.shape, dtype=bool)
    near = np.zeros(xs.shape, dtype=bool)
    c = p.coords
    for i in range(len(c)):
        x1, y1 = c[i]
        x2, y2 = c[(i + 1) % len(c)]
        crosses = (y1 > ys) != (y2 > ys)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = x1 + (ys - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (xs < x_cross)
        near |= segment_distances(xs, ys, (x1, y1), (x2, y2)) <= tol
    return np.where(near, 0, np.where(inside, 1, -1))


def point_in_polygon(q: Sequence[float], p: Polygon, tol: float = 0.0) -> Location:
    code = int(classify_points(np.array([q[0]]), np.array([q[1]]), p, tol)[0])
    return {1: Location.INSIDE, 0: Location.BOUNDARY, -1: Location.OUTSIDE}[code]


def cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def segments_cross(p1, p2, q1, q2, tol: float = 0.0) -> bool:
    """True when the open segments (p1, p2) and (q1, q2) cross at an interior point."""
    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    scale_p = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
    scale_q = math.hypot(q2[0] - q1[0], q2[1] - q1[1])
    eps_p = tol * scale_q
    eps_q = tol * scale_p
    return ((d1 > eps_p and d2 < -eps_p) or (d1 < -eps_p and d2 > eps_p)) and (
        (d3 > eps_q and d4 < -eps_q) or (d3 < -eps_q and d4 > eps_q)
    )


def winding_number(q: Sequence[float], ring: np.ndarray) -> int:
    """Winding number of a closed walk (vertices in order, not repeated) around q."""
    qx, qy = q
    wn = 0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if y1 <= qy:
            if y2 > qy and (x2 - x1) * (qy - y1) - (qx - x1) * (y2 - y1) > 0:
                wn += 1
        elif y2 <= qy and (x2 - x1) * (qy - y1) - (qx - x1) * (y2 - y1) < 0:
            wn -= 1
    return wn


def unit(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])
