"""Public API of the sticky-disc toolkit.

Re-exports the classes and functions of the individual modules so callers
can import everything from one place.
"""

from energy import EnergyReport, confined_energy, energy_identity_check, pairwise_energy, quadratic_confinement, surplus
from exceptions import (
    BoundViolationError,
    ConsistencyError,
    IdentityResidualError,
    InvalidInputError,
    OracleMismatchError,
    OverlapError,
    StickyDiscsError,
)
from finsler import CrystallineNorm, FinslerHex, WulffHexagon, aniso_perimeter, finsler_hex, min_single_crystal, phi, wulff
from geom import Frame, LatticePoint, Point2, Polygon, point_in_polygon, polygon_metrics
from graph import (
    BondGraph,
    Configuration,
    EdgeClass,
    FaceSet,
    build_bond_graph,
    classify_edges,
    enumerate_faces,
    euler_characteristic,
)
from harness import (
    SweepReport,
    SweepSpec,
    isoperimetric_check,
    oracle_face_check,
    per0_upper_bound,
    run_confinement_sweep,
    run_overlap_experiment,
    run_polycrystal_bounds,
    run_single_crystal_sweep,
    run_tessellation_sweep,
)
from orient import GrainPartition, OrientationField, orientation_field, project_P, segment_grains
from particle_io import read_particles, write_particles
from pipeline import AnalysisPipeline, AnalysisResult
from render import render_svg
from synth import (
    GrainSpec,
    TileFamily,
    hexagon_minimizer,
    lattice_fill,
    nestled_hexagon,
    polycrystal_fill,
    split_two_hexagons,
    tile_fill,
    two_hexagon_config,
)

__all__ = [
    "StickyDiscsError",
    "InvalidInputError",
    "OverlapError",
    "ConsistencyError",
    "IdentityResidualError",
    "OracleMismatchError",
    "BoundViolationError",
    "Point2",
    "Frame",
    "LatticePoint",
    "Polygon",
    "point_in_polygon",
    "polygon_metrics",
    "Configuration",
    "BondGraph",
    "FaceSet",
    "EdgeClass",
    "build_bond_graph",
    "enumerate_faces",
    "classify_edges",
    "euler_characteristic",
    "EnergyReport",
    "pairwise_energy",
    "surplus",
    "confined_energy",
    "quadratic_confinement",
    "energy_identity_check",
    "project_P",
    "OrientationField",
    "orientation_field",
    "GrainPartition",
    "segment_grains",
    "CrystallineNorm",
    "FinslerHex",
    "finsler_hex",
    "phi",
    "aniso_perimeter",
    "WulffHexagon",
    "wulff",
    "min_single_crystal",
    "GrainSpec",
    "TileFamily",
    "hexagon_minimizer",
    "nestled_hexagon",
    "lattice_fill",
    "polycrystal_fill",
    "split_two_hexagons",
    "two_hexagon_config",
    "tile_fill",
    "SweepSpec",
    "SweepReport",
    "run_single_crystal_sweep",
    "run_polycrystal_bounds",
    "run_confinement_sweep",
    "run_overlap_experiment",
    "run_tessellation_sweep",
    "per0_upper_bound",
    "isoperimetric_check",
    "oracle_face_check",
    "AnalysisPipeline",
    "AnalysisResult",
    "read_particles",
    "write_particles",
    "render_svg",
]
