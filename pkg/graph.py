"""Bond graph, faces and edge classes of a sticky-disc configuration.

Half-edge `2e` runs from the smaller to the larger endpoint of bond `e`, and
`2e + 1` is its twin. Faces are traced with the face on the left of every
half-edge: the successor of `u -> v` is the outgoing half-edge of `v` that
precedes `v -> u` in the counterclockwise rotation of `v`.
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree
from shapely.geometry import Polygon as ShapelyPolygon

from exceptions import ConsistencyError, InvalidInputError, OverlapError
from geom import DEFAULT_RELATIVE_TOLERANCE, Frame, LatticePoint, Point2, segments_cross, winding_number

# (a, b) offsets covering each lattice bond once; the other three are their negatives.
FORWARD_NEIGHBOURS = ((1, 0), (0, 1), (-1, 1))
# A bounded face has area at least that of a lattice triangle, (√3/4)·ε².
BOUNDED_AREA_FACTOR = 0.25


@dataclass(frozen=True, eq=False)
class Configuration:
    """Finite particle set with contact distance `epsilon`.

    `lattice`, when given, carries the integer provenance of every particle
    (or None for free particles) and activates exact bond detection.
    """

    points: tuple[Point2, ...]
    epsilon: float
    tolerance: float | None = None
    lattice: tuple[LatticePoint | None, ...] | None = None

    def __post_init__(self) -> None:
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon!r}")
        pts = tuple(Point2(float(p[0]), float(p[1])) for p in self.points)
        if not all(math.isfinite(c) for p in pts for c in p):
            raise InvalidInputError("particle coordinates must be finite")
        object.__setattr__(self, "points", pts)
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", DEFAULT_RELATIVE_TOLERANCE * self.epsilon)
        elif self.tolerance < 0:
            raise InvalidInputError("tolerance must be non-negative")
        if self.lattice is not None:
            lattice = tuple(self.lattice)
            if len(lattice) != len(pts):
                raise InvalidInputError("lattice provenance must list one entry per particle")
            object.__setattr__(self, "lattice", lattice)
            self._check_provenance()

    def _check_provenance(self) -> None:
        for frame, indices in self.frame_groups.items():
            if not math.isclose(frame.spacing, self.epsilon, rel_tol=1e-12):
                raise InvalidInputError(f"lattice spacing {frame.spacing!r} differs from epsilon {self.epsilon!r}")
            ab = np.array([(self.lattice[i].a, self.lattice[i].b) for i in indices])
            drift = np.abs(frame.embed_many(ab) - self.coords[indices]).max()
            if drift > self.tolerance:
                raise InvalidInputError(f"particle coordinates disagree with lattice provenance by {drift!r}")

    @classmethod
    def from_lattice(cls, frame: Frame, ab: Iterable[Sequence[int]], tolerance: float | None = None) -> "Configuration":
        ab = [(int(a), int(b)) for a, b in ab]
        coords = frame.embed_many(np.array(ab, dtype=float)) if ab else np.zeros((0, 2))
        return cls(
            points=tuple(Point2(*xy) for xy in coords),
            epsilon=frame.spacing,
            tolerance=tolerance,
            lattice=tuple(LatticePoint(a, b, frame) for a, b in ab),
        )

    @classmethod
    def merge(cls, parts: Sequence["Configuration"]) -> "Configuration":
        if not parts:
            raise InvalidInputError("nothing to merge")
        epsilon = parts[0].epsilon
        if any(not math.isclose(p.epsilon, epsilon, rel_tol=1e-12) for p in parts):
            raise InvalidInputError("cannot merge configurations with different epsilon")
        points = tuple(pt for p in parts for pt in p.points)
        lattice = None
        if any(p.lattice is not None for p in parts):
            lattice = tuple(lp for p in parts for lp in (p.lattice or (None,) * len(p)))
        return cls(points, epsilon, parts[0].tolerance, lattice)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array(self.points, dtype=float).reshape(-1, 2)

    @cached_property
    def frame_groups(self) -> dict[Frame, list[int]]:
        groups: dict[Frame, list[int]] = defaultdict(list)
        for i, lp in enumerate(self.lattice or ()):
            if lp is not None:
                groups[lp.frame].append(i)
        return dict(groups)

    @property
    def frames(self) -> tuple[Frame, ...]:
        return tuple(self.frame_groups)

    @property
    def is_exact(self) -> bool:
        return self.lattice is not None and all(lp is not None for lp in self.lattice)

    def shared_frame(self, indices: Iterable[int]) -> Frame | None:
        """The common lattice frame of the given particles, if there is one."""
        if self.lattice is None:
            return None
        frames = {self.lattice[i].frame if self.lattice[i] is not None else None for i in indices}
        if len(frames) != 1:
            return None
        return frames.pop()


@dataclass(frozen=True, eq=False)
class BondGraph:
    configuration: Configuration
    edges: np.ndarray  # (E, 2), i < j, sorted
    rotation: tuple[tuple[int, ...], ...]  # outgoing half-edges of each vertex, counterclockwise
    components: np.ndarray  # component label per vertex, labels ordered by smallest vertex

    @property
    def vertex_count(self) -> int:
        return len(self.configuration)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def component_count(self) -> int:
        return int(self.components.max()) + 1 if len(self.components) else 0

    def origin(self, h: int) -> int:
        return int(self.edges[h >> 1, h & 1])

    def dest(self, h: int) -> int:
        return int(self.edges[h >> 1, 1 - (h & 1)])

    @cached_property
    def half_edge_origins(self) -> np.ndarray:
        return self.edges.reshape(-1)

    @cached_property
    def half_edge_dests(self) -> np.ndarray:
        return self.edges[:, ::-1].reshape(-1)

    @cached_property
    def rotation_position(self) -> np.ndarray:
        pos = np.zeros(2 * self.edge_count, dtype=np.int64)
        for rot in self.rotation:
            for k, h in enumerate(rot):
                pos[h] = k
        return pos

    @cached_property
    def successors(self) -> np.ndarray:
        """Face-tracing successor of every half-edge."""
        nxt = np.zeros(2 * self.edge_count, dtype=np.int64)
        pos = self.rotation_position
        dests = self.half_edge_dests
        for h in range(2 * self.edge_count):
            rot = self.rotation[dests[h]]
            nxt[h] = rot[(pos[h ^ 1] - 1) % len(rot)]
        return nxt

    def neighbours(self, i: int) -> list[int]:
        return [self.dest(h) for h in self.rotation[i]]


def _exact_bonds(c: Configuration, pairs: set[tuple[int, int]]) -> None:
    for frame, indices in c.frame_groups.items():
        index: dict[tuple[int, int], int] = {}
        for i in indices:
            key = (c.lattice[i].a, c.lattice[i].b)
            if key in index:
                raise OverlapError(index[key], i, 0.0, c.epsilon)
            index[key] = i
        for (a, b), i in index.items():
            for da, db in FORWARD_NEIGHBOURS:
                j = index.get((a + da, b + db))
                if j is not None:
                    pairs.add((min(i, j), max(i, j)))


def _float_bonds(c: Configuration, pairs: set[tuple[int, int]]) -> None:
    frame_of = [lp.frame if lp is not None else None for lp in (c.lattice or (None,) * len(c))]
    tree = cKDTree(c.coords)
    candidates = tree.query_pairs(c.epsilon + c.tolerance, output_type="ndarray")
    for i, j in candidates:
        i, j = int(i), int(j)
        if frame_of[i] is not None and frame_of[i] == frame_of[j]:
            continue
        d = float(np.hypot(*(c.coords[i] - c.coords[j])))
        if d < c.epsilon - c.tolerance:
            raise OverlapError(i, j, d, c.epsilon)
        if abs(d - c.epsilon) <= c.tolerance:
            pairs.add((min(i, j), max(i, j)))


def build_bond_graph(c: Configuration) -> BondGraph:
    """Bond graph of `c`: all pairs at distance ε within the tolerance band."""
    pairs: set[tuple[int, int]] = set()
    _exact_bonds(c, pairs)
    if not c.is_exact or len(c.frame_groups) > 1:
        _float_bonds(c, pairs)
    edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)

    origins = edges.reshape(-1)
    dests = edges[:, ::-1].reshape(-1)
    vec = c.coords[dests] - c.coords[origins]
    order = np.lexsort((np.arctan2(vec[:, 1], vec[:, 0]), origins))
    rotation_lists: list[list[int]] = [[] for _ in range(len(c))]
    for h in order:
        rotation_lists[origins[h]].append(int(h))
    rotation = [tuple(hs) for hs in rotation_lists]

    g = nx.Graph()
    g.add_nodes_from(range(len(c)))
    g.add_edges_from(map(tuple, edges))
    components = np.zeros(len(c), dtype=np.int64)
    for label, comp in enumerate(sorted(nx.connected_components(g), key=min)):
        components[list(comp)] = label
    return BondGraph(c, edges, tuple(rotation), components)


def find_crossing(g: BondGraph) -> tuple[int, int] | None:
    """First pair of bonds whose segments cross, found through an ε-grid hash."""
    coords = g.configuration.coords
    eps = g.configuration.epsilon
    cells: dict[tuple[int, int], list[int]] = defaultdict(list)
    for e, (i, j) in enumerate(g.edges):
        lo = np.floor(np.minimum(coords[i], coords[j]) / eps).astype(int)
        hi = np.floor(np.maximum(coords[i], coords[j]) / eps).astype(int)
        for cx in range(lo[0], hi[0] + 1):
            for cy in range(lo[1], hi[1] + 1):
                cells[(cx, cy)].append(e)
    seen: set[tuple[int, int]] = set()
    for members in cells.values():
        for k, e in enumerate(members):
            for f in members[k + 1:]:
                key = (min(e, f), max(e, f))
                if key in seen:
                    continue
                seen.add(key)
                a, b = g.edges[e]
                p, q = g.edges[f]
                if len({a, b, p, q}) < 4:
                    continue
                if segments_cross(coords[a], coords[b], coords[p], coords[q], tol=1e-12):
                    return key
    return None


@dataclass(frozen=True)
class FaceRecord:
    index: int
    half_edges: tuple[int, ...]
    vertices: tuple[int, ...]
    component: int
    area: float
    boundary_half_edges: tuple[int, ...]
    inner_wire_edges: tuple[int, ...]
    loops: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.half_edges)

    @property
    def is_triangular(self) -> bool:
        return self.k == 3

    @property
    def perimeter_count(self) -> int:
        """Per(f)/ε: slits are null sets and do not count."""
        return len(self.boundary_half_edges)


@dataclass(frozen=True, eq=False)
class FaceSet:
    graph: BondGraph
    faces: tuple[FaceRecord, ...]
    face_of_half_edge: np.ndarray  # face index or -1
    outer_cycles: tuple[tuple[int, ...], ...]
    excluded: tuple[tuple[int, ...], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.faces)

    @property
    def triangular(self) -> tuple[FaceRecord, ...]:
        return tuple(f for f in self.faces if f.is_triangular)

    @property
    def non_triangular(self) -> tuple[FaceRecord, ...]:
        return tuple(f for f in self.faces if not f.is_triangular)

    def region(self, face: FaceRecord) -> ShapelyPolygon:
        """Open region of a face as a shapely polygon (holes included, slits dropped)."""
        coords = self.graph.configuration.coords
        shells, holes = [], []
        for loop in face.loops:
            ring = coords[list(loop)]
            (shells if _ring_area(ring) > 0 else holes).append(ring)
        if len(shells) != 1:
            raise ConsistencyError(f"face {face.index} has {len(shells)} outer boundaries")
        return ShapelyPolygon(shells[0], holes)

    def interior_point(self, face: FaceRecord) -> np.ndarray:
        """A point inside the face at distance ε/4 from the midpoint of a boundary bond."""
        return inner_sample(self.graph, face.boundary_half_edges[0])


def _ring_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def inner_sample(g: BondGraph, h: int) -> np.ndarray:
    coords = g.configuration.coords
    a = coords[g.origin(h)]
    b = coords[g.dest(h)]
    d = (b - a) / np.hypot(*(b - a))
    left = np.array([-d[1], d[0]])
    return 0.5 * (a + b) + 0.25 * g.configuration.epsilon * left


def _trace_cycles(g: BondGraph) -> tuple[list[list[int]], np.ndarray]:
    nxt = g.successors
    cycle_of = np.full(2 * g.edge_count, -1, dtype=np.int64)
    cycles: list[list[int]] = []
    for start in range(2 * g.edge_count):
        if cycle_of[start] >= 0:
            continue
        cycle = []
        h = start
        while cycle_of[h] < 0:
            cycle_of[h] = len(cycles)
            cycle.append(h)
            h = int(nxt[h])
        if h != start:
            raise InvalidInputError("rotation system does not close into cycles")
        cycles.append(cycle)
    return cycles, cycle_of


def _loops(g: BondGraph, half_edges: Sequence[int], slits: set[int]) -> tuple[tuple[int, ...], ...]:
    pos = g.rotation_position
    remaining = [h for h in half_edges if (h >> 1) not in slits]
    todo = set(remaining)
    loops = []
    for start in remaining:
        if start not in todo:
            continue
        loop = []
        h = start
        while h in todo:
            todo.discard(h)
            loop.append(g.origin(h))
            v = g.dest(h)
            rot = g.rotation[v]
            p = pos[h ^ 1]
            step = 1
            while (rot[(p - step) % len(rot)] >> 1) in slits:
                step += 1
            h = rot[(p - step) % len(rot)]
        loops.append(tuple(loop))
    return tuple(loops)


def enumerate_faces(g: BondGraph) -> FaceSet:
    """Faces of `g` per connected component; annuli and point-enclosing cycles are not faces."""
    c = g.configuration
    if not c.is_exact or len(c.frame_groups) > 1:
        crossing = find_crossing(g)
        if crossing is not None:
            raise InvalidInputError(f"bond graph is not planar: bonds {crossing[0]} and {crossing[1]} cross")

    cycles, cycle_of = _trace_cycles(g)
    coords = c.coords
    o = coords[g.half_edge_origins]
    d = coords[g.half_edge_dests]
    terms = o[:, 0] * d[:, 1] - d[:, 0] * o[:, 1]
    areas = 0.5 * np.bincount(cycle_of, weights=terms, minlength=len(cycles)) if cycles else np.zeros(0)
    cycle_component = [int(g.components[g.origin(cyc[0])]) for cyc in cycles]

    edge_components = g.components[g.edges[:, 0]] if g.edge_count else np.zeros(0, dtype=np.int64)
    vertex_counts = np.bincount(g.components, minlength=g.component_count)
    edge_counts = np.bincount(edge_components, minlength=g.component_count)
    cycle_counts = np.bincount(np.array(cycle_component, dtype=np.int64), minlength=g.component_count)
    bounded_threshold = BOUNDED_AREA_FACTOR * c.epsilon ** 2
    for comp in range(g.component_count):
        if edge_counts[comp] == 0:
            continue
        if vertex_counts[comp] - edge_counts[comp] + cycle_counts[comp] != 2:
            raise InvalidInputError(f"component {comp} is not embedded in the plane")
    unbounded_per_component = np.bincount(
        np.array([cycle_component[k] for k in range(len(cycles)) if areas[k] <= bounded_threshold], dtype=np.int64),
        minlength=g.component_count,
    )
    for comp in range(g.component_count):
        if edge_counts[comp] and unbounded_per_component[comp] != 1:
            raise InvalidInputError(f"component {comp} has {unbounded_per_component[comp]} unbounded cycles")

    _, representatives = np.unique(g.components, return_index=True)

    faces: list[FaceRecord] = []
    outer: list[tuple[int, ...]] = []
    excluded: list[tuple[int, ...]] = []
    face_of = np.full(2 * g.edge_count, -1, dtype=np.int64)
    for k, cyc in enumerate(cycles):
        if areas[k] <= bounded_threshold:
            outer.append(tuple(cyc))
            continue
        ring_vertices = [g.origin(h) for h in cyc]
        if len(cyc) > 3 and _encloses_other_component(g, ring_vertices, cycle_component[k], representatives):
            excluded.append(tuple(cyc))
            continue
        slits = {h >> 1 for h in cyc if cycle_of[h ^ 1] == k}
        index = len(faces)
        faces.append(
            FaceRecord(
                index=index,
                half_edges=tuple(cyc),
                vertices=tuple(ring_vertices),
                component=cycle_component[k],
                area=float(areas[k]),
                boundary_half_edges=tuple(h for h in cyc if (h >> 1) not in slits),
                inner_wire_edges=tuple(sorted(slits)),
                loops=_loops(g, cyc, slits),
            )
        )
        face_of[list(cyc)] = index
    return FaceSet(g, tuple(faces), face_of, tuple(outer), tuple(excluded))


def _encloses_other_component(g: BondGraph, ring_vertices: list[int], own: int, representatives: np.ndarray) -> bool:
    coords = g.configuration.coords
    ring = coords[ring_vertices]
    reps = coords[representatives]
    inside_box = np.all((reps >= ring.min(axis=0)) & (reps <= ring.max(axis=0)), axis=1)
    inside_box[own] = False
    return any(winding_number(coords[representatives[comp]], ring) != 0 for comp in np.flatnonzero(inside_box))


class EdgeClass(str, enum.Enum):
    INTERIOR_TRI_TRI = "interior_tri_tri"
    EXT_TRI = "ext_tri"
    EXT_NONTRI = "ext_nontri"
    INT1 = "int1"
    INT2 = "int2"
    WIRE = "wire"


@dataclass(frozen=True)
class EdgeClassification:
    labels: tuple[EdgeClass, ...]

    @cached_property
    def counts(self) -> dict[str, int]:
        counts = {cls.value: 0 for cls in EdgeClass}
        for label in self.labels:
            counts[label.value] += 1
        return counts

    def count(self, cls: EdgeClass) -> int:
        return self.counts[cls.value]


def classify_edges(g: BondGraph, f: FaceSet) -> EdgeClassification:
    """Label every bond by the regions on its two sides."""
    labels = []
    for e in range(g.edge_count):
        left = int(f.face_of_half_edge[2 * e])
        right = int(f.face_of_half_edge[2 * e + 1])
        if left < 0 and right < 0:
            labels.append(EdgeClass.WIRE)
        elif left == right:
            labels.append(EdgeClass.WIRE)
        elif left < 0 or right < 0:
            face = f.faces[max(left, right)]
            labels.append(EdgeClass.EXT_TRI if face.is_triangular else EdgeClass.EXT_NONTRI)
        else:
            triangles = f.faces[left].is_triangular + f.faces[right].is_triangular
            labels.append((EdgeClass.INT2, EdgeClass.INT1, EdgeClass.INTERIOR_TRI_TRI)[triangles])
    return EdgeClassification(tuple(labels))


@dataclass(frozen=True)
class EulerData:
    v0: int
    v1: int
    v2: int

    @property
    def chi(self) -> int:
        return self.v0 - self.v1 + self.v2


def euler_characteristic(g: BondGraph, f: FaceSet) -> EulerData:
    return EulerData(g.vertex_count, g.edge_count, len(f.faces))
