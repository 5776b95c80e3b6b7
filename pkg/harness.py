"""ε-sweeps and experiments around the discrete-to-continuum limits.

Every run is deterministic given its spec and seed. Reports carry the hash of
the canonical spec document and the library versions; wall time is logged,
never stored, so reruns serialize byte-identically.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Sequence

import numpy as np
import pandas as pd
import shapely
from scipy import ndimage

from energy import SQRT3_HALF, quadratic_confinement
from exceptions import BoundViolationError, ConsistencyError, InvalidInputError, OracleMismatchError
from finsler import CrystallineNorm, finsler_hex, min_single_crystal, partition_perimeter, theta_grid, wulff
from geom import Frame, Point2, Polygon, classify_points
from graph import Configuration, build_bond_graph, enumerate_faces, inner_sample
from pipeline import AnalysisPipeline, AnalysisResult
from synth import (
    GrainSpec,
    TileFamily,
    hexagon_minimizer,
    lattice_fill,
    polycrystal_fill,
    split_two_hexagons,
    tile_fill,
)
from utils import config_hash, library_versions, parallel_map

logger = logging.getLogger(__name__)

DEFAULT_SLACK_FACTOR = 10.0
ORACLE_RESOLUTION = 128
ORACLE_MAX_POINTS = 12
ORACLE_AREA_TOLERANCE = 0.01
QUADRATURE_CELLS = 400


def build_shape(desc: dict[str, Any]) -> Polygon:
    """Polygon from a shape description: polygon, rectangle, wulff or hexagon."""
    kind = desc.get("type")
    try:
        if kind == "polygon":
            return Polygon.from_points(desc["vertices"])
        if kind == "rectangle":
            return Polygon.rectangle(*desc.get("bounds", (0.0, 0.0, 1.0, 1.0)))
        if kind == "wulff":
            return wulff(float(desc["theta"])).scaled_to(float(desc.get("area", 1.0)), desc.get("center", (0.0, 0.0)))
        if kind == "hexagon":
            theta = float(desc.get("theta", math.pi / 2))
            return Polygon.regular(6, float(desc.get("side", 1.0)), desc.get("center", (0.0, 0.0)), theta - math.pi / 2)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad {kind} shape description: {exc}") from exc
    raise InvalidInputError(f"unknown shape type {kind!r}")


@dataclass(frozen=True)
class SweepSpec:
    shape: dict[str, Any]
    epsilons: tuple[float, ...]
    theta: float | None = None
    grains: tuple[dict[str, Any], ...] = ()
    offsets: Any = ((0.0, 0.0),)
    seed: int = 0
    gap: float | None = None
    tol_theta: float = 1e-6
    slack_factor: float = DEFAULT_SLACK_FACTOR

    def __post_init__(self) -> None:
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(not (e > 0 and math.isfinite(e)) for e in eps):
            raise InvalidInputError("epsilon schedule must be non-empty and positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise InvalidInputError("epsilon schedule must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "grains", tuple(self.grains))
        if isinstance(self.offsets, dict):
            if set(self.offsets) != {"random"} or int(self.offsets["random"]) < 1:
                raise InvalidInputError("random offsets are given as {\"random\": k} with k >= 1")
        else:
            offsets = tuple((float(x), float(y)) for x, y in self.offsets)
            if not offsets:
                raise InvalidInputError("at least one offset is needed")
            object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> "SweepSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(document) - known
        if unknown:
            raise InvalidInputError(f"unknown sweep spec keys: {sorted(unknown)}")
        try:
            return cls(**document)
        except TypeError as exc:
            raise InvalidInputError(f"bad sweep spec: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        document = asdict(self)
        document["epsilons"] = list(self.epsilons)
        document["grains"] = list(self.grains)
        if not isinstance(self.offsets, dict):
            document["offsets"] = [list(o) for o in self.offsets]
        return document

    def region(self) -> Polygon:
        return build_shape(self.shape)

    def grain_specs(self) -> list[GrainSpec]:
        """Grains from the explicit list, or the split of a two-hexagon shape."""
        if self.shape.get("type") == "two-hexagons":
            split = split_two_hexagons(self.shape["theta1"], self.shape["theta2"], self.shape.get("tau", (0.0, 0.0)))
            return [GrainSpec(split.omega1, self.shape["theta1"]), GrainSpec(split.omega2, self.shape["theta2"])]
        return [
            GrainSpec(build_shape(g["shape"]), float(g["theta"]), Point2(*g.get("offset", (0.0, 0.0))))
            for g in self.grains
        ]

    def offset_list(self, theta: float, epsilon: float) -> list[tuple[float, float]]:
        """Lattice phases; random ones are drawn in lattice-cell units and scale with ε."""
        if not isinstance(self.offsets, dict):
            return list(self.offsets)
        rng = np.random.default_rng(self.seed)
        phases = rng.uniform(0.0, 1.0, size=(int(self.offsets["random"]), 2))
        return [tuple(map(float, xy)) for xy in Frame(Point2(0.0, 0.0), theta, epsilon).embed_many(phases)]


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    offset: tuple[float, float]
    N: int
    E: int
    surplus: float
    target: float
    relative_error: float
    mass: float
    grain_count: int
    interior_length: float
    lower: float | None = None
    upper: float | None = None
    slack: float | None = None
    confined: float | None = None

    def to_dict(self) -> dict[str, Any]:
        document = asdict(self)
        document["offset"] = list(self.offset)
        return document


@dataclass(frozen=True)
class SweepReport:
    kind: str
    area: float
    rows: tuple[SweepRow, ...]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def mass_constant(self) -> float:
        """Smallest C with |ε²(√3/2)N − |Ω|| ≤ C·ε on every row."""
        return max((abs(r.mass - self.area) / r.epsilon for r in self.rows), default=0.0)

    def errors_by_epsilon(self) -> list[tuple[float, float]]:
        by_eps: dict[float, list[float]] = {}
        for row in self.rows:
            by_eps.setdefault(row.epsilon, []).append(row.relative_error)
        return [(eps, float(np.mean(errs))) for eps, errs in by_eps.items()]

    @property
    def trend_ok(self) -> bool:
        """Error at the smallest ε does not exceed the largest-ε error; one inversion allowed."""
        errors = [err for _, err in self.errors_by_epsilon()]
        if not errors:
            return True
        inversions = sum(1 for a, b in zip(errors, errors[1:]) if b > a)
        return inversions <= 1 and errors[-1] <= errors[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "area": self.area,
            "rows": [row.to_dict() for row in self.rows],
            "metadata": {**self.metadata, "mass_constant": self.mass_constant, "trend_ok": self.trend_ok},
        }

    def to_frame(self) -> pd.DataFrame:
        table = pd.DataFrame([asdict(row) for row in self.rows], columns=[f.name for f in fields(SweepRow)])
        offsets = [row.offset for row in self.rows]
        table.insert(1, "offset_x", [o[0] for o in offsets])
        table.insert(2, "offset_y", [o[1] for o in offsets])
        return table.drop(columns="offset")

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")


def _metadata(spec: SweepSpec, **extra: Any) -> dict[str, Any]:
    return {"spec_hash": config_hash(spec.to_dict()), "versions": library_versions(), "slack_factor": spec.slack_factor, **extra}


def _jobs(spec: SweepSpec, theta: float) -> list[tuple[float, tuple[float, float]]]:
    return [(eps, offset) for eps in spec.epsilons for offset in spec.offset_list(theta, eps)]


def _row(eps: float, offset, result: AnalysisResult, target: float, value: float | None = None, **extra: Any) -> SweepRow:
    surplus = result.energy.surplus
    n = result.energy.N
    return SweepRow(
        epsilon=eps,
        offset=tuple(offset),
        N=n,
        E=result.energy.E,
        surplus=surplus,
        target=target,
        relative_error=abs((surplus if value is None else value) - target) / target,
        mass=eps ** 2 * SQRT3_HALF * n,
        grain_count=len(result.grains),
        interior_length=result.grains.interior_length,
        **extra,
    )


def run_single_crystal_sweep(spec: SweepSpec, pipeline: AnalysisPipeline | None = None) -> SweepReport:
    """Lattice fills at constant θ̄ against the target Per_{φ_θ̄}(Ω)."""
    if spec.theta is None:
        raise InvalidInputError("a single-crystal sweep needs theta")
    pipeline = pipeline or AnalysisPipeline(spec.tol_theta)
    region = spec.region()
    target = finsler_hex(spec.theta).perimeter(region)
    minimizer = spec.shape.get("type") == "hexagon"
    started = time.perf_counter()

    def job(item: tuple[float, tuple[float, float]]) -> SweepRow:
        eps, offset = item
        if minimizer:
            s = round(float(spec.shape.get("side", 1.0)) / eps)
            c = hexagon_minimizer(s, eps, spec.theta, spec.shape.get("center", (0.0, 0.0)))
        else:
            c = lattice_fill(region, spec.theta, eps, offset)
        result = pipeline.analyze(c)
        values = result.field.distinct(spec.tol_theta)
        if len(values) > 1:
            raise ConsistencyError(f"single-crystal fill at eps={eps!r} has orientations {values}")
        row = _row(eps, offset, result, target)
        logger.debug("single crystal eps=%r offset=%r: N=%d surplus=%.6f", eps, offset, row.N, row.surplus)
        return row

    rows = tuple(parallel_map(job, _jobs(spec, spec.theta)))
    logger.info("single-crystal sweep: %d rows in %.2fs", len(rows), time.perf_counter() - started)
    return SweepReport("single", float(region.shape.area), rows, _metadata(spec, target=target))


def run_polycrystal_bounds(spec: SweepSpec, pipeline: AnalysisPipeline | None = None) -> SweepReport:
    """Polycrystal fills against the lower bound Per(Ω) + ½·interior and the upper bound Σ Per_{φ_θj}(ω_j)."""
    grains = spec.grain_specs()
    if not grains:
        raise InvalidInputError("a polycrystal sweep needs grains")
    if len(grains) < 2:
        logger.warning("polycrystal sweep with one grain reduces to a single crystal")
    pipeline = pipeline or AnalysisPipeline(spec.tol_theta)
    omega = shapely.union_all([g.region.shape for g in grains])
    per_omega = float(omega.length)
    interior = (sum(float(g.region.shape.length) for g in grains) - per_omega) / 2
    lower = per_omega + interior / 2
    upper = partition_perimeter((g.region, g.theta) for g in grains)
    started = time.perf_counter()

    def job(item: tuple[float, tuple[float, float]]) -> SweepRow:
        eps, shift = item
        shifted = [GrainSpec(g.region, g.theta, Point2(g.offset.x + shift[0], g.offset.y + shift[1])) for g in grains]
        c = polycrystal_fill(shifted, eps, spec.gap)
        slack = spec.slack_factor * eps * per_omega
        row = _row(eps, shift, pipeline.analyze(c), upper, lower=lower, upper=upper, slack=slack)
        if lower > row.surplus + slack:
            raise BoundViolationError(f"eps={eps!r}: surplus {row.surplus!r} below lower bound {lower!r} - {slack!r}")
        if row.surplus > upper + slack:
            raise BoundViolationError(f"eps={eps!r}: surplus {row.surplus!r} above upper bound {upper!r} + {slack!r}")
        return row

    rows = tuple(parallel_map(job, _jobs(spec, grains[0].theta)))
    logger.info("polycrystal sweep: %d rows in %.2fs", len(rows), time.perf_counter() - started)
    return SweepReport(
        "polycrystal",
        float(omega.area),
        rows,
        _metadata(spec, lower=lower, upper=upper, interior=interior, perimeter=per_omega),
    )


def integrate_over(region: Polygon, g: Callable[[np.ndarray], np.ndarray], cells: int = QUADRATURE_CELLS) -> float:
    """∫_Ω g dx by midpoint quadrature on a cells × cells raster of the bounding box."""
    x0, y0, x1, y1 = region.bounds
    dx, dy = (x1 - x0) / cells, (y1 - y0) / cells
    xs = x0 + dx * (np.arange(cells) + 0.5)
    ys = y0 + dy * (np.arange(cells) + 0.5)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    inside = classify_points(gx.ravel(), gy.ravel(), region) >= 0
    points = np.column_stack([gx.ravel()[inside], gy.ravel()[inside]])
    return float(np.sum(g(points))) * dx * dy


def run_confinement_sweep(spec: SweepSpec, g: Callable[[np.ndarray], np.ndarray] = quadratic_confinement) -> SweepReport:
    """ε(E + 3N) + ε²(√3/2)·Σ g(x_i) of lattice fills against Per_{φ_θ̄}(Ω) + ∫_Ω g."""
    if spec.theta is None:
        raise InvalidInputError("a confinement sweep needs theta")
    pipeline = AnalysisPipeline(spec.tol_theta)
    region = spec.region()
    target = finsler_hex(spec.theta).perimeter(region) + integrate_over(region, g)

    def job(item: tuple[float, tuple[float, float]]) -> SweepRow:
        eps, offset = item
        c = lattice_fill(region, spec.theta, eps, offset)
        result = pipeline.analyze(c)
        field_term = eps ** 2 * SQRT3_HALF * float(np.sum(g(c.coords))) if len(c) else 0.0
        value = result.energy.surplus + field_term
        return _row(eps, offset, result, target, value=value, confined=value)

    rows = tuple(parallel_map(job, _jobs(spec, spec.theta)))
    return SweepReport("confinement", float(region.shape.area), rows, _metadata(spec, target=target))


@dataclass(frozen=True)
class OverlapRow:
    tau: tuple[float, float]
    overlap: float
    upper: float
    benchmark: float
    benchmark_theta: float
    margin: float
    polycrystal_wins: bool
    surplus: float | None = None

    def to_dict(self) -> dict[str, Any]:
        document = asdict(self)
        document["tau"] = list(self.tau)
        return document


@dataclass(frozen=True)
class OverlapReport:
    theta1: float
    theta2: float
    rows: tuple[OverlapRow, ...]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def crossover(self) -> float | None:
        """Largest overlap at which the polycrystal bound still beats every single crystal."""
        wins = [r.overlap for r in self.rows if r.polycrystal_wins]
        return max(wins) if wins else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "theta1": self.theta1,
            "theta2": self.theta2,
            "rows": [r.to_dict() for r in self.rows],
            "metadata": {**self.metadata, "crossover": self.crossover},
        }


def run_overlap_experiment(
    theta1: float,
    theta2: float,
    taus: Sequence[Sequence[float]],
    epsilon: float | None = None,
    gap: float | None = None,
    thetas: Sequence[float] | None = None,
) -> OverlapReport:
    """Two-hexagon regions: polycrystal upper bound against the best single crystal, per τ."""
    grid = theta_grid() if thetas is None else np.asarray(thetas, dtype=float)
    pipeline = AnalysisPipeline()

    def job(tau: Sequence[float]) -> OverlapRow:
        tau = (float(tau[0]), float(tau[1]))
        split = split_two_hexagons(theta1, theta2, tau)
        upper = partition_perimeter([(split.omega1, theta1), (split.omega2, theta2)])
        best_theta, benchmark = min_single_crystal(split.region, grid)
        surplus = None
        if epsilon is not None and theta1 != theta2:
            grains = [GrainSpec(split.omega1, theta1), GrainSpec(split.omega2, theta2)]
            surplus = pipeline.analyze(polycrystal_fill(grains, epsilon, gap)).energy.surplus
        logger.debug("tau=%r: m=%.6f upper=%.6f benchmark=%.6f", tau, split.overlap, upper, benchmark)
        return OverlapRow(
            tau=tau,
            overlap=split.overlap,
            upper=upper,
            benchmark=benchmark,
            benchmark_theta=best_theta,
            margin=(benchmark - upper) / benchmark,
            polycrystal_wins=upper < benchmark,
            surplus=surplus,
        )

    rows = tuple(parallel_map(job, taus))
    document = {"theta1": theta1, "theta2": theta2, "taus": [list(map(float, t)) for t in taus], "epsilon": epsilon, "gap": gap}
    return OverlapReport(theta1, theta2, rows, {"spec_hash": config_hash(document), "versions": library_versions()})


def per0_upper_bound(
    region: Polygon,
    family: TileFamily,
    candidates: Sequence[Sequence[tuple[Polygon, float]]] = (),
    thetas: Sequence[float] | None = None,
) -> float:
    """Per_0(Ω) bounded above by the best single crystal and the given candidate partitions."""
    lo, hi = family.interval
    grid = lo + (hi - lo) * np.arange(1, 61) / 60 if thetas is None else np.asarray(thetas, dtype=float)
    _, best = min_single_crystal(region, grid, family.norm, family.interval)
    area = float(region.shape.area)
    for index, partition in enumerate(candidates):
        covered = shapely.union_all([p.shape for p, _ in partition])
        if abs(covered.area - area) > 1e-9 * area or abs(sum(p.shape.area for p, _ in partition) - area) > 1e-9 * area:
            raise InvalidInputError(f"candidate partition {index} does not partition the region")
        for _, theta in partition:
            if not lo < theta <= hi:
                raise InvalidInputError(f"candidate orientation {theta!r} is outside the admissible interval")
        best = min(best, partition_perimeter(partition, family.norm))
    return best


@dataclass(frozen=True)
class IsoperimetricResult:
    ratios: tuple[float, ...]
    wulff_perimeter: float

    @property
    def minimum(self) -> float:
        return min(self.ratios)


def isoperimetric_check(regions: Sequence[Polygon], family: TileFamily) -> IsoperimetricResult:
    """Per_0 upper bounds of candidate shapes, per √area, never beat Per_φ(W_φ)."""
    lo, hi = family.interval
    norm: CrystallineNorm = family.norm((lo + hi) / 2)
    wulff_perimeter = norm.perimeter(norm.wulff_shape())
    ratios = []
    for region in regions:
        ratio = per0_upper_bound(region, family) / math.sqrt(region.shape.area)
        if ratio < wulff_perimeter * (1 - 1e-9):
            raise BoundViolationError(f"shape beats the Wulff bound: {ratio!r} < {wulff_perimeter!r}")
        ratios.append(ratio)
    return IsoperimetricResult(tuple(ratios), wulff_perimeter)


@dataclass(frozen=True)
class TessellationRow:
    theta: float
    epsilon: float
    tiles: int
    perimeter: float
    target: float
    relative_error: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class TessellationReport:
    family: TileFamily
    rows: tuple[TessellationRow, ...]
    min_theta: float
    min_value: float
    per0_upper: float
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def per0_consistent(self) -> bool:
        return self.per0_upper <= self.min_value + 1e-9

    def to_dict(self) -> dict[str, Any]:
        return {
            "family": self.family.value,
            "rows": [r.to_dict() for r in self.rows],
            "min_theta": self.min_theta,
            "min_value": self.min_value,
            "per0_upper": self.per0_upper,
            "per0_consistent": self.per0_consistent,
            "metadata": self.metadata,
        }


def run_tessellation_sweep(
    region: Polygon,
    family: TileFamily,
    thetas: Sequence[float],
    epsilons: Sequence[float],
    offset: Sequence[float] = (0.0, 0.0),
    candidates: Sequence[Sequence[tuple[Polygon, float]]] = (),
) -> TessellationReport:
    """Perimeters of tile packings of Ω against Per_{φ_θ}(Ω) and the Per_0 upper bound."""
    items = [(float(t), float(e)) for t in thetas for e in epsilons]

    def job(item: tuple[float, float]) -> TessellationRow:
        theta, eps = item
        packing = tile_fill(region, family, theta, eps, offset)
        target = family.norm(theta).perimeter(region)
        perimeter = packing.perimeter()
        return TessellationRow(theta, eps, len(packing), perimeter, target, abs(perimeter - target) / target)

    rows = tuple(parallel_map(job, items))
    lo, hi = family.interval
    grid = lo + (hi - lo) * np.arange(1, 61) / 60
    min_theta, min_value = min_single_crystal(region, grid, family.norm, family.interval)
    per0 = per0_upper_bound(region, family, candidates, grid)
    document = {
        "region": [list(v) for v in region.vertices],
        "family": family.value,
        "thetas": list(map(float, thetas)),
        "epsilons": list(map(float, epsilons)),
        "offset": list(map(float, offset)),
    }
    return TessellationReport(
        family, rows, min_theta, min_value, per0, {"spec_hash": config_hash(document), "versions": library_versions()}
    )


def oracle_face_check(c: Configuration, resolution: int = ORACLE_RESOLUTION) -> bool:
    """Match enumerated faces to the bounded regions of a rasterized drawing of the bonds."""
    if len(c) > ORACLE_MAX_POINTS:
        raise InvalidInputError(f"the raster oracle handles at most {ORACLE_MAX_POINTS} particles, got {len(c)}")
    if resolution < 8:
        raise InvalidInputError("oracle resolution must be at least 8")
    graph = build_bond_graph(c)
    faces = enumerate_faces(graph)
    eps = c.epsilon
    pixel = eps / resolution
    coords = c.coords
    lo = coords.min(axis=0) - 2 * eps
    size = np.ceil((coords.max(axis=0) + 2 * eps - lo) / pixel).astype(int) + 1
    wall = np.zeros(tuple(size), dtype=bool)
    for i, j in graph.edges:
        a, b = coords[i], coords[j]
        steps = int(np.ceil(2 * np.hypot(*(b - a)) / pixel)) + 1
        samples = a + np.linspace(0.0, 1.0, steps)[:, None] * (b - a)
        cells = np.floor((samples - lo) / pixel).astype(int)
        wall[cells[:, 0], cells[:, 1]] = True

    labels, count = ndimage.label(~wall)
    border = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))) - {0}
    bounded = set(range(1, count + 1)) - border

    area = np.bincount(labels.ravel(), minlength=count + 1).astype(float)
    padded = np.pad(labels, 1)
    for x, y in zip(*np.nonzero(wall)):
        around = {int(v) for v in padded[x:x + 3, y:y + 3].ravel()} - {0}
        for label in around:
            area[label] += 1.0 / len(around)
    area *= pixel * pixel

    def label_at(point: np.ndarray) -> int:
        x, y = np.floor((point - lo) / pixel).astype(int)
        return int(labels[x, y])

    face_labels = [label_at(faces.interior_point(f)) for f in faces.faces]
    excluded_labels = [label_at(inner_sample(graph, cycle[0])) for cycle in faces.excluded]
    matched = face_labels + excluded_labels
    if len(set(matched)) != len(matched) or set(matched) != bounded:
        raise OracleMismatchError(
            f"raster oracle found {len(bounded)} bounded regions, enumeration has {len(faces.faces)} faces "
            f"and {len(faces.excluded)} excluded cycles (face labels {face_labels}, excluded {excluded_labels})"
        )
    for face, label in zip(faces.faces, face_labels):
        if abs(area[label] - face.area) > ORACLE_AREA_TOLERANCE * face.area:
            raise OracleMismatchError(f"face {face.index}: raster area {area[label]!r} vs polygon area {face.area!r}")
    return True
