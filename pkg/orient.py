"""Lattice orientation of triangular faces and grain segmentation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import networkx as nx
import numpy as np
import shapely

from exceptions import ConsistencyError, InvalidInputError
from geom import SIXTH_TURN
from graph import BondGraph, FaceRecord, FaceSet

DEFAULT_TOL_THETA = 1e-6
TIE_TOLERANCE = 1e-12
THETA_MIN = math.pi / 3
THETA_MAX = 2 * math.pi / 3


def project_P(alpha: float) -> int:
    """Smallest integer k minimizing |α − kπ/3|."""
    if not math.isfinite(alpha):
        raise InvalidInputError(f"angle must be finite, got {alpha!r}")
    lo = math.floor(alpha / SIXTH_TURN)
    d_lo = abs(alpha - lo * SIXTH_TURN)
    d_hi = abs(alpha - (lo + 1) * SIXTH_TURN)
    return lo if d_lo <= d_hi + TIE_TOLERANCE else lo + 1


def orientation_from_direction(alpha: float) -> float:
    """θ = α − P(α)π/3 + π/2 for the direction α of any edge of a lattice triangle."""
    return alpha - project_P(alpha) * SIXTH_TURN + math.pi / 2


def face_orientation(face: FaceRecord, graph: BondGraph) -> float:
    """θ(f) ∈ (π/3, 2π/3], the angle between e₁ and a median of the triangle."""
    if not face.is_triangular:
        raise InvalidInputError(f"face {face.index} has {face.k} sides; orientation needs a triangle")
    frame = graph.configuration.shared_frame(face.vertices)
    if frame is not None:
        return frame.theta - project_P(frame.theta - math.pi / 2) * SIXTH_TURN
    coords = graph.configuration.coords
    d = coords[face.vertices[1]] - coords[face.vertices[0]]
    return orientation_from_direction(math.atan2(d[1], d[0]))


def angular_gap(theta1: float, theta2: float) -> float:
    """Distance between two orientations modulo the π/3 symmetry period."""
    d = abs(theta1 - theta2) % SIXTH_TURN
    return min(d, SIXTH_TURN - d)


@dataclass(frozen=True, eq=False)
class OrientationField:
    faces: FaceSet
    values: dict[int, float]

    def __post_init__(self) -> None:
        slack = 1e-9
        for index, theta in self.values.items():
            if not THETA_MIN - slack < theta <= THETA_MAX + slack:
                raise ConsistencyError(f"orientation {theta!r} of face {index} is outside (π/3, 2π/3]")

    def __getitem__(self, face_index: int) -> float:
        return self.values[face_index]

    def __contains__(self, face_index: int) -> bool:
        return face_index in self.values

    def __len__(self) -> int:
        return len(self.values)

    def distinct(self, tol: float = DEFAULT_TOL_THETA) -> list[float]:
        """Distinct values, merged within `tol` modulo π/3, in increasing order."""
        result: list[float] = []
        for theta in sorted(self.values.values()):
            if not any(angular_gap(theta, seen) <= tol for seen in result):
                result.append(theta)
        return result


def orientation_field(fs: FaceSet) -> OrientationField:
    return OrientationField(fs, {f.index: face_orientation(f, fs.graph) for f in fs.triangular})


@dataclass(frozen=True)
class Grain:
    faces: tuple[int, ...]
    theta: float
    area: float
    component: int
    perimeter: float

    def to_dict(self) -> dict:
        return {"theta": self.theta, "area": self.area, "faces": len(self.faces)}


@dataclass(frozen=True, eq=False)
class GrainPartition:
    field: OrientationField
    grains: tuple[Grain, ...]
    grain_of_face: dict[int, int]
    exterior_length: float
    interior_length: float

    def __iter__(self) -> Iterator[Grain]:
        return iter(self.grains)

    def __len__(self) -> int:
        return len(self.grains)

    @cached_property
    def regions(self) -> tuple:
        """Shapely region of each grain (union of its closed triangles)."""
        fs = self.field.faces
        coords = fs.graph.configuration.coords
        result = []
        for grain in self.grains:
            triangles = shapely.polygons(np.stack([coords[list(fs.faces[i].vertices)] for i in grain.faces]))
            result.append(shapely.union_all(triangles))
        return tuple(result)

    def boundaries(self) -> dict:
        return {"exterior": self.exterior_length, "interior": self.interior_length}


def segment_grains(field: OrientationField, g: BondGraph, tol_theta: float = DEFAULT_TOL_THETA) -> GrainPartition:
    """Grains are the components of edge-adjacent triangles with orientations within `tol_theta`."""
    if tol_theta < 0:
        raise InvalidInputError("tol_theta must be non-negative")
    fs = field.faces
    owner = fs.face_of_half_edge
    adjacency = nx.Graph()
    adjacency.add_nodes_from(field.values)
    for e in range(g.edge_count):
        left, right = int(owner[2 * e]), int(owner[2 * e + 1])
        if left in field and right in field and left != right:
            if angular_gap(field[left], field[right]) <= tol_theta:
                adjacency.add_edge(left, right)

    components = sorted((sorted(comp) for comp in nx.connected_components(adjacency)), key=lambda comp: comp[0])
    grain_of_face = {i: j for j, comp in enumerate(components) for i in comp}

    eps = g.configuration.epsilon
    exterior = 0
    interior = 0
    boundary_counts = [0] * len(components)
    for h in range(2 * g.edge_count):
        face = int(owner[h])
        if face not in grain_of_face:
            continue
        twin_face = int(owner[h ^ 1])
        mine = grain_of_face[face]
        other = grain_of_face.get(twin_face)
        if other == mine:
            continue
        boundary_counts[mine] += 1
        if other is None:
            exterior += 1
        elif mine < other:
            interior += 1

    grains = tuple(
        Grain(
            faces=tuple(comp),
            theta=field[comp[0]],
            area=float(sum(fs.faces[i].area for i in comp)),
            component=fs.faces[comp[0]].component,
            perimeter=eps * boundary_counts[j],
        )
        for j, comp in enumerate(components)
    )
    return GrainPartition(field, grains, grain_of_face, eps * exterior, eps * interior)
