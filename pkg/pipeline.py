"""Analysis pipeline: configuration → bond graph → faces → energy → grains."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

from energy import EnergyReport, ScalarField, confined_energy, energy_identity_check
from exceptions import ConsistencyError, InvalidInputError
from graph import (
    BondGraph,
    Configuration,
    EdgeClass,
    EdgeClassification,
    EulerData,
    FaceSet,
    build_bond_graph,
    classify_edges,
    enumerate_faces,
    euler_characteristic,
)
from orient import DEFAULT_TOL_THETA, GrainPartition, OrientationField, orientation_field, segment_grains

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    configuration: Configuration
    graph: BondGraph
    faces: FaceSet
    classification: EdgeClassification
    euler: EulerData
    energy: EnergyReport
    field: OrientationField
    grains: GrainPartition
    confined: float | None = None

    def to_report(self, config: dict[str, Any]) -> dict[str, Any]:
        """JSON document with stable keys."""
        energy = self.energy.to_dict()
        if self.confined is not None:
            energy["confined"] = self.confined
        return {
            "config": config,
            "energy": energy,
            "faces": {
                "triangular": len(self.faces.triangular),
                "other": len(self.faces.non_triangular),
                "wire": self.classification.count(EdgeClass.WIRE),
            },
            "chi": self.euler.chi,
            "grains": [grain.to_dict() for grain in self.grains],
            "boundaries": self.grains.boundaries(),
        }


class AnalysisPipeline:
    """Full analysis of one configuration; every stage is checked on the way."""

    def __init__(self, tol_theta: float = DEFAULT_TOL_THETA, confinement: ScalarField | None = None):
        if tol_theta < 0:
            raise InvalidInputError("tol_theta must be non-negative")
        self.tol_theta = tol_theta
        self.confinement = confinement

    def _graph_stage(self, c: Configuration) -> tuple[BondGraph, FaceSet, EdgeClassification]:
        graph = build_bond_graph(c)
        faces = enumerate_faces(graph)
        classification = classify_edges(graph, faces)
        if sum(classification.counts.values()) != graph.edge_count:
            raise ConsistencyError("edge classes do not partition the bonds")
        return graph, faces, classification

    def analyze(self, c: Configuration) -> AnalysisResult:
        graph, faces, classification = self._graph_stage(c)
        energy = energy_identity_check(c, graph=graph, faces=faces, classification=classification)
        field = orientation_field(faces)
        grains = segment_grains(field, graph, self.tol_theta)
        confined = confined_energy(c, self.confinement, graph) if self.confinement is not None else None
        logger.debug(
            "analyzed %d particles: E=%d, %d faces, %d excluded cycles, %d grains",
            len(c),
            energy.E,
            len(faces),
            len(faces.excluded),
            len(grains),
        )
        return AnalysisResult(
            configuration=c,
            graph=graph,
            faces=faces,
            classification=classification,
            euler=euler_characteristic(graph, faces),
            energy=energy,
            field=field,
            grains=grains,
            confined=confined,
        )
