"""Sticky-disc bond energy, surplus and the energy identities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from exceptions import ConsistencyError, IdentityResidualError
from graph import (
    BondGraph,
    Configuration,
    EdgeClass,
    EdgeClassification,
    FaceSet,
    build_bond_graph,
    classify_edges,
    enumerate_faces,
    euler_characteristic,
)

SQRT3_HALF = math.sqrt(3) / 2
# Every non-triangular face of a finite-energy configuration has at least four sides.
MIN_NON_TRIANGULAR_PERIMETER = 4

ScalarField = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EnergyReport:
    E: int
    N: int
    epsilon: float
    edge_counts: dict[str, int]
    non_triangular_faces: int
    wire: int
    chi: int
    union_perimeter: int
    triangle_union_perimeter: int
    face_excess: tuple[int, ...]
    energy1_literal: int
    residuals: dict[str, int] = field(default_factory=dict)

    @property
    def surplus(self) -> float:
        return self.epsilon * (self.E + 3 * self.N)

    @property
    def compactness_bound(self) -> float:
        """Lower bound ε·Per(∪F^Δ)/(4ε) on the surplus."""
        return self.epsilon * self.triangle_union_perimeter / 4

    def terms(self) -> dict:
        return {
            "edges": dict(self.edge_counts),
            "non_triangular_faces": self.non_triangular_faces,
            "wire": self.wire,
            "chi": self.chi,
            "union_perimeter": self.union_perimeter,
            "face_excess": list(self.face_excess),
            "energy1_literal": self.energy1_literal,
            "compactness_bound": self.compactness_bound,
            "residuals": dict(self.residuals),
        }

    def to_dict(self) -> dict:
        return {"E": self.E, "N": self.N, "surplus": self.surplus, "terms": self.terms()}


def pairwise_energy(c: Configuration, graph: BondGraph | None = None) -> int:
    """E_ε(X) = −(number of bonds); overlaps raise before anything is counted."""
    graph = build_bond_graph(c) if graph is None else graph
    return -graph.edge_count


def surplus(c: Configuration, graph: BondGraph | None = None) -> float:
    return c.epsilon * (pairwise_energy(c, graph) + 3 * len(c))


def confined_energy(c: Configuration, g: ScalarField, graph: BondGraph | None = None) -> float:
    """E + 3N + (√3/(2ε))·Σ g(x_i)."""
    values = np.asarray(g(c.coords), dtype=float).reshape(-1) if len(c) else np.zeros(0)
    if values.shape != (len(c),):
        raise ConsistencyError(f"confining field returned {values.shape} values for {len(c)} particles")
    return pairwise_energy(c, graph) + 3 * len(c) + SQRT3_HALF / c.epsilon * float(values.sum())


def quadratic_confinement(xy: np.ndarray) -> np.ndarray:
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    return (xy ** 2).sum(axis=1)


def _union_perimeter(faces: FaceSet, keep: Callable[[int], bool]) -> int:
    """Half-edges on a kept face whose twin is not on a kept face."""
    owner = faces.face_of_half_edge
    kept = np.array([keep(int(i)) if i >= 0 else False for i in owner], dtype=bool)
    if not len(kept):
        return 0
    twins = np.arange(len(kept)) ^ 1
    return int(np.count_nonzero(kept & ~kept[twins]))


def energy_identity_check(
    c: Configuration,
    *,
    graph: BondGraph | None = None,
    faces: FaceSet | None = None,
    classification: EdgeClassification | None = None,
) -> EnergyReport:
    """Evaluate both energy identities and raise if either leaves a residual."""
    graph = build_bond_graph(c) if graph is None else graph
    faces = enumerate_faces(graph) if faces is None else faces
    classification = classify_edges(graph, faces) if classification is None else classification
    euler = euler_characteristic(graph, faces)

    E = -graph.edge_count
    N = len(c)
    counts = classification.counts
    non_tri = faces.non_triangular
    excess = tuple(f.perimeter_count - 3 for f in non_tri)
    wire = classification.count(EdgeClass.WIRE)
    union = _union_perimeter(faces, lambda i: True)
    tri_union = _union_perimeter(faces, lambda i: faces.faces[i].is_triangular)

    lhs = E + 3 * N
    energy2 = union + sum(excess) + 2 * wire + 3 * euler.chi
    common = (
        classification.count(EdgeClass.INT1)
        + 2 * classification.count(EdgeClass.INT2)
        - 3 * len(non_tri)
        + 2 * wire
        + 3 * euler.chi
    )
    reconciled = classification.count(EdgeClass.EXT_TRI) + 2 * classification.count(EdgeClass.EXT_NONTRI) + common
    literal = classification.count(EdgeClass.EXT_TRI) + classification.count(EdgeClass.EXT_NONTRI) + common

    report = EnergyReport(
        E=E,
        N=N,
        epsilon=c.epsilon,
        edge_counts=dict(counts),
        non_triangular_faces=len(non_tri),
        wire=wire,
        chi=euler.chi,
        union_perimeter=union,
        triangle_union_perimeter=tri_union,
        face_excess=excess,
        energy1_literal=literal,
        residuals={"energy2": lhs - energy2, "reconciled": lhs - reconciled},
    )
    if lhs - energy2:
        raise IdentityResidualError(f"perimeter identity residual {lhs - energy2} (E+3N = {lhs}, rhs = {energy2})")
    if lhs - reconciled:
        raise IdentityResidualError(f"edge-class identity residual {lhs - reconciled} (E+3N = {lhs}, rhs = {reconciled})")
    if lhs < 0:
        raise ConsistencyError(f"E + 3N = {lhs} is negative")
    if 4 * lhs < tri_union:
        raise ConsistencyError(f"compactness bound violated: E+3N = {lhs} < Per/4 = {tri_union / 4}")
    short = [f.index for f in non_tri if f.perimeter_count < MIN_NON_TRIANGULAR_PERIMETER]
    if short:
        raise ConsistencyError(f"non-triangular faces {short} have fewer than four boundary bonds")
    return report
