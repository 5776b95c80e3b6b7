"""Configuration generators: hexagons, lattice fills, polycrystals and tile packings."""

from __future__ import annotations

import enum
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np
import shapely
from scipy.spatial import cKDTree
from shapely.geometry import LineString
from shapely.geometry import Polygon as ShapelyPolygon

from exceptions import InvalidInputError
from finsler import CrystallineNorm, finsler_hex, wulff
from geom import Frame, Point2, Polygon, classify_points
from graph import Configuration

logger = logging.getLogger(__name__)

CONTAINMENT_TOLERANCE = 1e-12
SLIVER_FRACTION = 1e-9
HEX_DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
THETA_RANGE = (math.pi / 3, 2 * math.pi / 3)
HONEYCOMB_SCALE = math.sqrt(3) / 2


def _check_theta(theta: float, interval: tuple[float, float] = THETA_RANGE) -> None:
    lo, hi = interval
    if not lo < theta <= hi:
        raise InvalidInputError(f"orientation {theta!r} is outside ({lo!r}, {hi!r}]")


@dataclass(frozen=True)
class GrainSpec:
    region: Polygon
    theta: float
    offset: Point2 = Point2(0.0, 0.0)

    def __post_init__(self) -> None:
        _check_theta(self.theta)
        object.__setattr__(self, "offset", Point2(float(self.offset[0]), float(self.offset[1])))


def hexagon_count(s: int) -> int:
    """N_s = 1 + 6 + ... + 6s."""
    return 3 * s * s + 3 * s + 1


def hexagon_minimizer(s: int, epsilon: float, theta: float = math.pi / 2, origin: Sequence[float] = (0.0, 0.0)) -> Configuration:
    """Lattice points within hexagonal distance s of the origin."""
    if s < 1:
        raise InvalidInputError(f"hexagon side must be at least 1, got {s}")
    frame = Frame(Point2(*origin), theta, epsilon)
    ab = [(a, b) for a in range(-s, s + 1) for b in range(-s, s + 1) if abs(a + b) <= s]
    return Configuration.from_lattice(frame, ab)


def nestled_hexagon(n: int, epsilon: float, theta: float = math.pi / 2) -> Configuration:
    """Hexagon of the largest side s with N_s ≤ n, the remaining discs walked along the next shell."""
    if n < 1:
        raise InvalidInputError(f"need at least one particle, got {n}")
    s = 0
    while hexagon_count(s + 1) <= n:
        s += 1
    frame = Frame(Point2(0.0, 0.0), theta, epsilon)
    ab = [(a, b) for a in range(-s, s + 1) for b in range(-s, s + 1) if abs(a + b) <= s]
    r = s + 1
    da, db = HEX_DIRECTIONS[4]
    corner = (r * da, r * db)
    shell = []
    a, b = corner
    for direction in HEX_DIRECTIONS:
        for _ in range(r):
            a, b = a + direction[0], b + direction[1]
            shell.append((a, b))
    # the walk starts next to a corner; the corner itself comes last
    extra = n - len(ab)
    ab.extend(shell[:extra])
    logger.debug("nestled hexagon: side %d plus %d shell discs", s, extra)
    return Configuration.from_lattice(frame, ab)


def _grid(mn: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer (m, n) ranges covering points given in real lattice coordinates."""
    lo = np.floor(mn.min(axis=0)).astype(int) - 2
    hi = np.ceil(mn.max(axis=0)).astype(int) + 2
    return np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1)


def _triangle_cells(a: np.ndarray, b: np.ndarray, mask_up: np.ndarray, mask_down: np.ndarray) -> np.ndarray:
    ia, ib = np.nonzero(mask_up)
    ja, jb = np.nonzero(mask_down)
    pa, pb = a[ia], b[ib]
    qa, qb = a[ja], b[jb]
    up = np.stack([np.column_stack([pa, pb]), np.column_stack([pa + 1, pb]), np.column_stack([pa, pb + 1])], axis=1)
    down = np.stack([np.column_stack([qa + 1, qb]), np.column_stack([qa + 1, qb + 1]), np.column_stack([qa, qb + 1])], axis=1)
    return np.concatenate([up, down]).reshape(-1, 3, 2)


def lattice_triangles(region: Polygon, frame: Frame) -> np.ndarray:
    """Integer vertex triples (T, 3, 2) of the lattice triangles strictly inside the region."""
    a, b = _grid(frame.to_lattice(region.coords))
    grid_a, grid_b = np.meshgrid(a, b, indexing="ij")
    xy = frame.embed_many(np.column_stack([grid_a.ravel(), grid_b.ravel()]))
    tol = CONTAINMENT_TOLERANCE * region.diameter
    inside = (classify_points(xy[:, 0], xy[:, 1], region, tol) == 1).reshape(grid_a.shape)
    up = inside[:-1, :-1] & inside[1:, :-1] & inside[:-1, 1:]
    down = inside[1:, :-1] & inside[1:, 1:] & inside[:-1, 1:]
    cells = _triangle_cells(a, b, up, down)
    if not len(cells):
        return cells
    shapes = shapely.polygons(frame.embed_many(cells.reshape(-1, 2)).reshape(-1, 3, 2))
    # vertices inside do not exclude a reflex corner of the region poking through an edge
    return cells[shapely.contains_properly(region.shape, shapes)]


def _configuration(frame: Frame, cells: np.ndarray) -> Configuration:
    if not len(cells):
        return Configuration.from_lattice(frame, [])
    ab = np.unique(cells.reshape(-1, 2), axis=0)
    return Configuration.from_lattice(frame, ab)


def lattice_fill(region: Polygon, theta: float, epsilon: float, offset: Sequence[float] = (0.0, 0.0)) -> Configuration:
    """Vertices of every lattice triangle contained in the region."""
    _check_theta(theta)
    frame = Frame(Point2(*offset), theta, epsilon)
    cells = lattice_triangles(region, frame)
    if not len(cells):
        logger.warning("lattice fill is empty: epsilon %r is too large for the region", epsilon)
    logger.debug("lattice fill: %d triangles at theta=%.6f, epsilon=%r", len(cells), theta, epsilon)
    return _configuration(frame, cells)


def _check_disjoint(grains: Sequence[GrainSpec]) -> None:
    for i, gi in enumerate(grains):
        for j in range(i + 1, len(grains)):
            if gi.region.shape.relate_pattern(grains[j].region.shape, "T********"):
                raise InvalidInputError(f"grain regions {i} and {j} overlap")


def polycrystal_fill(grains: Sequence[GrainSpec], epsilon: float, gap: float | None = None) -> Configuration:
    """Union of per-grain lattice fills; triangles within `gap` of another grain are dropped."""
    if not grains:
        raise InvalidInputError("a polycrystal needs at least one grain")
    gap = epsilon if gap is None else gap
    if gap < 0:
        raise InvalidInputError(f"gap must be non-negative, got {gap!r}")
    _check_disjoint(grains)
    parts = []
    for index, grain in enumerate(grains):
        frame = Frame(grain.offset, grain.theta, epsilon)
        cells = lattice_triangles(grain.region, frame)
        others = [g.region.shape for j, g in enumerate(grains) if j != index]
        if len(cells) and others and gap > 0:
            shapes = shapely.polygons(frame.embed_many(cells.reshape(-1, 2)).reshape(-1, 3, 2))
            distance = shapely.distance(shapely.union_all(others), shapes)
            cells = cells[distance > gap]
        if not len(cells):
            logger.warning("grain %d is empty after filling at epsilon %r", index, epsilon)
        parts.append(_configuration(frame, cells))
    merged = Configuration.merge(parts)
    if gap < epsilon:
        logger.warning("gap %r < epsilon %r: grains may bond (experimental)", gap, epsilon)
        merged = _resolve_overlaps(merged, [len(p) for p in parts])
    return merged


def _resolve_overlaps(c: Configuration, sizes: Sequence[int]) -> Configuration:
    """Greedily drop particles of later grains that sit closer than ε to an earlier particle."""
    if len(c) < 2:
        return c
    grain_of = np.repeat(np.arange(len(sizes)), sizes)
    pairs = cKDTree(c.coords).query_pairs(c.epsilon - c.tolerance, output_type="ndarray")
    removed: set[int] = set()
    for i, j in sorted(map(tuple, pairs)):
        if grain_of[i] != grain_of[j] and i not in removed and j not in removed:
            removed.add(int(max(i, j)))
    if not removed:
        return c
    logger.warning("removed %d overlapping particles between grains", len(removed))
    keep = [k for k in range(len(c)) if k not in removed]
    return Configuration(
        tuple(c.points[k] for k in keep),
        c.epsilon,
        c.tolerance,
        tuple(c.lattice[k] for k in keep) if c.lattice is not None else None,
    )


@dataclass(frozen=True, eq=False)
class TwoHexagonSplit:
    omega1: Polygon
    omega2: Polygon
    overlap: float
    chord: LineString | None

    @property
    def region(self):
        return shapely.union_all([self.omega1.shape, self.omega2.shape])


def _half_plane(point: np.ndarray, normal: np.ndarray, reach: float) -> ShapelyPolygon:
    """Large square standing for {x : (x − point)·normal ≤ 0}."""
    t = np.array([-normal[1], normal[0]])
    corners = [point + reach * t, point + reach * t - 2 * reach * normal, point - reach * t - 2 * reach * normal, point - reach * t]
    return ShapelyPolygon(corners)


def _single_polygons(*geometries) -> list[Polygon] | None:
    """One simple polygon per geometry, ignoring clipping slivers; None if any is split or holed."""
    parts = []
    for geometry in geometries:
        pieces = [g for g in getattr(geometry, "geoms", [geometry]) if g.geom_type == "Polygon" and not g.is_empty]
        total = sum(g.area for g in pieces)
        pieces = [g for g in pieces if g.area > SLIVER_FRACTION * total]
        if len(pieces) != 1 or len(pieces[0].interiors):
            return None
        parts.append(Polygon.from_shapely(pieces[0].simplify(0)))
    return parts


def split_two_hexagons(theta1: float, theta2: float, tau: Sequence[float]) -> TwoHexagonSplit:
    """Grains of W_{θ₁} ∪ (W_{θ₂} + τ) separated along a chord through the overlap centroid, normal to τ.

    The chord is cut from the overlap itself, so its length vanishes with the overlap. When that
    leaves a grain in several pieces (large overlaps) the whole union is split by the line instead.
    """
    w1 = wulff(theta1).polygon
    w2 = wulff(theta2).polygon.translated(float(tau[0]), float(tau[1]))
    overlap_shape = w1.shape.intersection(w2.shape)
    m = float(overlap_shape.area)
    if m <= CONTAINMENT_TOLERANCE:
        return TwoHexagonSplit(w1, w2, 0.0, None)
    norm = math.hypot(tau[0], tau[1])
    direction = np.array([1.0, 0.0]) if norm == 0 else np.array(tau, dtype=float) / norm
    center = np.array(overlap_shape.centroid.coords[0])
    union = w1.shape.union(w2.shape)
    reach = 10.0 * (1.0 + norm)
    left = _half_plane(center, direction, reach)
    right = _half_plane(center, -direction, reach)
    parts = _single_polygons(
        w1.shape.difference(overlap_shape.intersection(right)),
        w2.shape.difference(overlap_shape.intersection(left)),
    )
    if parts is None:
        logger.debug("overlap chord at tau=%r leaves a grain in pieces; splitting the union", tuple(tau))
        parts = _single_polygons(union.intersection(left), union.intersection(right))
    if parts is None:
        raise InvalidInputError(f"two-hexagon split at tau={tuple(tau)!r} does not give two simple grains")
    chord = overlap_shape.intersection(left.exterior)
    return TwoHexagonSplit(parts[0], parts[1], m, chord if isinstance(chord, LineString) else None)


def two_hexagon_config(
    theta1: float,
    theta2: float,
    tau: Sequence[float],
    epsilon: float,
    gap: float | None = None,
    offsets: Sequence[Sequence[float]] = ((0.0, 0.0), (0.0, 0.0)),
) -> tuple[Configuration, float]:
    """Polycrystal fill of the two-hexagon region and the overlap area m(τ)."""
    if theta1 == theta2:
        raise InvalidInputError("the two grains need different orientations")
    split = split_two_hexagons(theta1, theta2, tau)
    grains = [
        GrainSpec(split.omega1, theta1, Point2(*offsets[0])),
        GrainSpec(split.omega2, theta2, Point2(*offsets[1])),
    ]
    return polycrystal_fill(grains, epsilon, gap), split.overlap


class TileFamily(str, enum.Enum):
    TRIANGLE = "triangle"
    SQUARE = "square"
    HEXAGON = "hexagon"

    @property
    def interval(self) -> tuple[float, float]:
        if self is TileFamily.SQUARE:
            return math.pi / 4, 3 * math.pi / 4
        return THETA_RANGE

    def basis(self, theta: float) -> np.ndarray:
        """Columns generate the integer vertex coordinates of the unit tiling."""
        if self is TileFamily.SQUARE:
            u, w = theta - math.pi / 2, theta
        else:
            u, w = theta - math.pi / 2, theta - math.pi / 6
        return np.array([[math.cos(u), math.cos(w)], [math.sin(u), math.sin(w)]])

    def edge_directions(self, theta: float) -> tuple[float, ...]:
        if self is TileFamily.SQUARE:
            return theta - math.pi / 2, theta
        return theta - math.pi / 2, theta - math.pi / 6, theta + math.pi / 6

    def norm(self, theta: float) -> CrystallineNorm:
        """Limit perimeter density of unions of this family's tiles."""
        if self is TileFamily.SQUARE:
            return CrystallineNorm.from_edge_directions(self.edge_directions(theta))
        if self is TileFamily.HEXAGON:
            # honeycomb boundaries zigzag along the centre lattice: (2/√3)·φ_{θ+π/6}
            return CrystallineNorm(HONEYCOMB_SCALE * finsler_hex(theta + math.pi / 6).generators)
        return finsler_hex(theta)

    def cells(self, m: np.ndarray, n: np.ndarray) -> np.ndarray:
        """Integer vertex rings (T, k, 2) of every tile anchored in the (m, n) ranges."""
        grid_m, grid_n = np.meshgrid(m, n, indexing="ij")
        anchors = np.column_stack([grid_m.ravel(), grid_n.ravel()])
        if self is TileFamily.SQUARE:
            ring = np.array([(0, 0), (1, 0), (1, 1), (0, 1)])
            return anchors[:, None, :] + ring[None, :, :]
        if self is TileFamily.TRIANGLE:
            up = np.array([(0, 0), (1, 0), (0, 1)])
            down = np.array([(1, 0), (1, 1), (0, 1)])
            return np.concatenate([anchors[:, None, :] + up, anchors[:, None, :] + down])
        centers = anchors[:, :1] * np.array([1, 1]) + anchors[:, 1:] * np.array([-1, 2])
        return centers[:, None, :] + np.array(HEX_DIRECTIONS)[None, :, :]


@dataclass(frozen=True, eq=False)
class TilePacking:
    """Tiles ε·p_θ + τ of a periodic tiling, kept as integer vertex rings."""

    family: TileFamily
    theta: float
    epsilon: float
    origin: Point2
    cells: np.ndarray  # (T, k, 2) integer vertex rings, counterclockwise

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[Polygon]:
        for ring in self.coordinates:
            yield Polygon.from_points(ring)

    @cached_property
    def coordinates(self) -> np.ndarray:
        flat = self.cells.reshape(-1, 2) @ (self.epsilon * self.family.basis(self.theta)).T + np.array(self.origin)
        return flat.reshape(self.cells.shape[0], -1, 2)

    @cached_property
    def boundary_edges(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """Tile edges not shared by two tiles, matched exactly on integer endpoints."""
        counts: Counter = Counter()
        for ring in self.cells:
            for k in range(len(ring)):
                p = tuple(int(v) for v in ring[k])
                q = tuple(int(v) for v in ring[(k + 1) % len(ring)])
                counts[(min(p, q), max(p, q))] += 1
        return [edge for edge, count in counts.items() if count == 1]

    def perimeter(self) -> float:
        return self.epsilon * len(self.boundary_edges)

    def area(self) -> float:
        if not len(self):
            return 0.0
        return float(shapely.area(shapely.polygons(self.coordinates)).sum())

    def union(self):
        return shapely.union_all(shapely.polygons(self.coordinates))


def tile_fill(
    region: Polygon,
    family: TileFamily,
    theta: float,
    epsilon: float,
    offset: Sequence[float] = (0.0, 0.0),
) -> TilePacking:
    """Tiles of the ε-scaled periodic tiling at angle θ that lie inside the region."""
    _check_theta(theta, family.interval)
    if epsilon <= 0:
        raise InvalidInputError(f"epsilon must be positive, got {epsilon!r}")
    origin = Point2(float(offset[0]), float(offset[1]))
    basis = epsilon * family.basis(theta)
    m, n = _grid((region.coords - np.array(origin)) @ np.linalg.inv(basis).T)
    if family is TileFamily.HEXAGON:
        # centre (a, b) = i(1, 1) + j(−1, 2), so i = (2a + b)/3 and j = (b − a)/3
        a0, a1, b0, b1 = m[0], m[-1], n[0], n[-1]
        m = np.arange((2 * a0 + b0) // 3 - 1, (2 * a1 + b1) // 3 + 2)
        n = np.arange((b0 - a1) // 3 - 1, (b1 - a0) // 3 + 2)
    cells = family.cells(m, n)
    coords = (cells.reshape(-1, 2) @ basis.T + np.array(origin)).reshape(cells.shape[0], -1, 2)
    tol = CONTAINMENT_TOLERANCE * region.diameter
    inside = shapely.covers(region.shape.buffer(tol), shapely.polygons(coords))
    logger.debug("tile fill: %d of %d %s tiles inside", int(inside.sum()), len(cells), family.value)
    return TilePacking(family, theta, epsilon, origin, cells[inside])
