"""Crystalline norms, anisotropic perimeters and Wulff shapes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from shapely import affinity
from shapely.geometry import box
from shapely.geometry.polygon import orient

from exceptions import InvalidInputError
from geom import SIXTH_TURN, Polygon, normalize_angle, polygon_metrics, unit

GENERATOR_ANGLES = (math.pi / 6, math.pi / 2, 5 * math.pi / 6)
WULFF_APOTHEM = 2 ** -0.5 * 3 ** -0.25
WULFF_PERIMETER = 2 * math.sqrt(2) * 3 ** 0.25
PHI_MAX = 2 / math.sqrt(3)
THETA_GRID_STEP = math.pi / 180

# phi_oracle: points per zoom level and number of zoom levels.
ORACLE_POINTS = 21
ORACLE_LEVELS = 16


class CrystallineNorm:
    """φ(η) = min Σ|λ_k| over η = Σ λ_k g_k; the unit ball is the hull of ±g_k."""

    def __init__(self, generators: Iterable[Sequence[float]]):
        g = np.array([tuple(v) for v in generators], dtype=float)
        if g.ndim != 2 or g.shape[1] != 2 or len(g) < 2:
            raise InvalidInputError("a crystalline norm needs at least two planar generators")
        self.generators = g
        inverses = []
        for i, j in itertools.combinations(range(len(g)), 2):
            m = np.column_stack([g[i], g[j]])
            if abs(np.linalg.det(m)) < 1e-12 * np.linalg.norm(g[i]) * np.linalg.norm(g[j]):
                raise InvalidInputError(f"generators {i} and {j} are parallel")
            inverses.append(np.linalg.inv(m))
        self._inverses = np.stack(inverses)

    @classmethod
    def from_edge_directions(cls, angles: Iterable[float]) -> "CrystallineNorm":
        """Norm whose perimeter equals the length of staircases along the given edge directions."""
        return cls(unit(a - math.pi / 2) for a in angles)

    def __call__(self, eta) -> float | np.ndarray:
        eta = np.asarray(eta, dtype=float)
        lam = np.einsum("pij,...j->...pi", self._inverses, eta)
        value = np.abs(lam).sum(axis=-1).min(axis=-1)
        return float(value) if value.ndim == 0 else value

    def rotated(self, angle: float) -> "CrystallineNorm":
        c, s = math.cos(angle), math.sin(angle)
        return CrystallineNorm(self.generators @ np.array([[c, s], [-s, c]]))

    def perimeter(self, region) -> float:
        """∫ φ(ν) dH¹ over the boundary of a Polygon or any shapely areal geometry."""
        if isinstance(region, Polygon):
            polygon_metrics(region)
            rings = [region.coords]
        else:
            rings = []
            for part in getattr(region, "geoms", [region]):
                if part.is_empty or part.geom_type != "Polygon":
                    continue
                part = orient(part, sign=1.0)
                rings.append(np.asarray(part.exterior.coords)[:-1])
                rings.extend(np.asarray(hole.coords)[:-1] for hole in part.interiors)
        total = 0.0
        for ring in rings:
            d = np.roll(ring, -1, axis=0) - ring
            # outward normal of a left-bounded edge, scaled by the edge length
            total += float(np.sum(self(np.column_stack([d[:, 1], -d[:, 0]]))))
        return total

    def wulff_shape(self, area: float = 1.0) -> Polygon:
        """Polar body {x : |x·g_k| ≤ 1}, rescaled to the requested area."""
        reach = 10.0 / min(np.linalg.norm(self.generators, axis=1).min(), 1.0) * len(self.generators)
        region = box(-reach, -reach, reach, reach)
        for g in self.generators:
            half_width = 1.0 / float(np.linalg.norm(g))
            strip = box(-2 * reach, -half_width, 2 * reach, half_width)
            strip = affinity.rotate(strip, math.atan2(g[1], g[0]) - math.pi / 2, origin=(0, 0), use_radians=True)
            region = region.intersection(strip)
        shape = affinity.scale(region, *(2 * [math.sqrt(area / region.area)]), origin=(0, 0))
        return Polygon.from_shapely(shape)


class FinslerHex(CrystallineNorm):
    """φ_θ with generators e^{i(θ−π/2)}v_j."""

    def __init__(self, theta: float):
        if not math.isfinite(theta):
            raise InvalidInputError("theta must be finite")
        self.theta = theta
        super().__init__(unit(theta - math.pi / 2 + a) for a in GENERATOR_ANGLES)

    def __repr__(self) -> str:
        return f"FinslerHex(theta={self.theta!r})"


@lru_cache(maxsize=256)
def finsler_hex(theta: float) -> FinslerHex:
    return FinslerHex(theta)


def phi(theta: float, eta) -> float:
    return finsler_hex(theta)(eta)


def phi_oracle(theta: float, eta: Sequence[float]) -> float:
    """Brute-force min Σ|λ_j| by zooming a λ₃ grid and solving for λ₁, λ₂."""
    eta = np.asarray(eta, dtype=float)
    v = np.array([unit(theta - math.pi / 2 + a) for a in GENERATOR_ANGLES])
    inv12 = np.linalg.inv(np.column_stack([v[0], v[1]]))
    radius = 2.0 * float(np.hypot(*eta)) + 1e-300
    lo, hi = -radius, radius
    best = math.inf
    for _ in range(ORACLE_LEVELS):
        lam3 = np.linspace(lo, hi, ORACLE_POINTS)
        rest = eta[None, :] - lam3[:, None] * v[2][None, :]
        lam12 = rest @ inv12.T
        cost = np.abs(lam12).sum(axis=1) + np.abs(lam3)
        k = int(np.argmin(cost))
        best = min(best, float(cost[k]))
        step = (hi - lo) / (ORACLE_POINTS - 1)
        lo, hi = lam3[k] - step, lam3[k] + step
    return best


def aniso_perimeter(p: Polygon, theta: float) -> float:
    """Per_{φ_θ}(p)."""
    return finsler_hex(theta).perimeter(p)


@dataclass(frozen=True)
class WulffHexagon:
    theta: float

    @cached_property
    def polygon(self) -> Polygon:
        circumradius = 2 * WULFF_APOTHEM / math.sqrt(3)
        return Polygon.regular(6, circumradius, phase=self.theta - math.pi / 2)

    @property
    def apothem(self) -> float:
        return WULFF_APOTHEM

    def scaled_to(self, area: float, center: Sequence[float] = (0.0, 0.0)) -> Polygon:
        return self.polygon.scaled(math.sqrt(area)).translated(*center)


def wulff(theta: float) -> WulffHexagon:
    return WulffHexagon(theta)


def partition_perimeter(parts: Iterable[tuple[object, float]], norm_factory: Callable[[float], CrystallineNorm] = finsler_hex) -> float:
    """Σ_j Per_{φ_{θ_j}}(ω_j); a shared boundary is paid by both sides."""
    return sum(norm_factory(theta).perimeter(region) for region, theta in parts)


def theta_grid(step: float = THETA_GRID_STEP) -> np.ndarray:
    """Grid over (π/3, 2π/3], right endpoint included."""
    count = int(round(SIXTH_TURN / step))
    return math.pi / 3 + step * np.arange(1, count + 1)


def min_single_crystal(
    region,
    thetas: Sequence[float] | None = None,
    norm_factory: Callable[[float], CrystallineNorm] = finsler_hex,
    interval: tuple[float, float] = (math.pi / 3, 2 * math.pi / 3),
) -> tuple[float, float]:
    """min over θ̄ of Per_{φ_θ̄}(region): grid search, then bounded refinement around the best node.

    The returned angle is reduced into `interval`, one period of the norm family.
    """
    grid = theta_grid() if thetas is None else np.asarray(thetas, dtype=float)
    values = [norm_factory(float(t)).perimeter(region) for t in grid]
    k = int(np.argmin(values))
    best_theta, best_value = float(grid[k]), float(values[k])
    if len(grid) > 1:
        step = float(np.min(np.diff(np.sort(grid))))
        result = minimize_scalar(
            lambda t: norm_factory(float(t)).perimeter(region),
            bounds=(best_theta - step, best_theta + step),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if result.success and result.fun < best_value:
            best_theta, best_value = normalize_angle(float(result.x), *interval), float(result.fun)
    return best_theta, best_value
