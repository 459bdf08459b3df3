"""
Scenario module - seeded construction of antenna arrays, AOA clusters,
scatterer placements and multi-cell layouts.

All constructors are pure functions of (parameters, seed). Coordinates are 2D
meters; linear arrays live on the x-axis.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from src.errors import InvalidArgumentError
from src.parallel import Seed, derive_seed, make_rng

logger = logging.getLogger(__name__)

ArrayKind = Literal["ula", "random_linear", "disk", "multi_cell"]
ScattererLayout = Literal["ring", "segment"]


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _require_positive(**params: float) -> None:
    for name, value in params.items():
        if not (value > 0 and math.isfinite(value)):
            raise InvalidArgumentError(f"{name} must be positive and finite, got {value}")


def _require_count(**params: int) -> None:
    for name, value in params.items():
        if int(value) != value or value < 1:
            raise InvalidArgumentError(f"{name} must be a positive integer, got {value}")


# --- Arrays ---

@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Antenna positions (M x 2, meters) plus carrier wavelength."""

    positions: np.ndarray
    wavelength: float
    kind: ArrayKind
    spacing: float | None = None  # ULA spacing D, or mean spacing for random_linear

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise InvalidArgumentError(f"positions must be an (M, 2) array, got shape {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise InvalidArgumentError("antenna coordinates must be finite")
        _require_positive(wavelength=self.wavelength)
        object.__setattr__(self, "positions", _frozen(pos))

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    @property
    def is_linear(self) -> bool:
        """True when every antenna sits on the x-axis."""
        return bool(np.all(self.positions[:, 1] == 0.0))

    @property
    def aperture(self) -> float:
        """Largest distance between two antennas along x (linear) or the bounding diameter."""
        if self.is_linear:
            x = self.positions[:, 0]
            return float(x.max() - x.min())
        span = self.positions.max(axis=0) - self.positions.min(axis=0)
        return float(np.hypot(*span))


def make_ula(M: int, D: float, wavelength: float) -> ArrayGeometry:
    """Uniform linear array: antenna m at x = (m - 1) * D."""
    _require_count(M=M)
    _require_positive(D=D, wavelength=wavelength)
    x = np.arange(M, dtype=float) * D
    return ArrayGeometry(np.column_stack([x, np.zeros(M)]), wavelength, "ula", spacing=D)


def make_random_linear(M: int, mean_spacing: float, wavelength: float, seed: Seed) -> ArrayGeometry:
    """M positions drawn i.i.d. uniform on the aperture [0, M * mean_spacing]."""
    _require_count(M=M)
    _require_positive(mean_spacing=mean_spacing, wavelength=wavelength)
    rng = make_rng(seed)
    x = rng.uniform(0.0, M * mean_spacing, size=M)
    return ArrayGeometry(np.column_stack([x, np.zeros(M)]), wavelength, "random_linear", spacing=mean_spacing)


def sample_disk(rng: np.random.Generator, n: int, radius: float,
                center: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Area-uniform points in a disk via the inverse CDF of the radius."""
    rho = radius * np.sqrt(rng.uniform(0.0, 1.0, size=n))
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    return np.column_stack([center[0] + rho * np.cos(phi), center[1] + rho * np.sin(phi)])


def make_disk_network(M: int, L: float, wavelength: float, seed: Seed,
                      center: tuple[float, float] = (0.0, 0.0)) -> ArrayGeometry:
    """Distributed array: M antennas uniform over the disk of radius L."""
    _require_count(M=M)
    _require_positive(L=L, wavelength=wavelength)
    rng = make_rng(seed)
    return ArrayGeometry(sample_disk(rng, M, L, center), wavelength, "disk")


# --- AOA clusters ---

@dataclass(frozen=True)
class ClusterSet:
    """Disjoint AOA intervals in [0, pi] (radians), uniform density over the union."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        cleaned = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        if not cleaned:
            raise InvalidArgumentError("ClusterSet needs at least one interval")
        for lo, hi in cleaned:
            if not (0.0 <= lo <= hi <= math.pi):
                raise InvalidArgumentError(f"interval [{lo}, {hi}] must satisfy 0 <= min <= max <= pi")
        for (_, prev_hi), (lo, _) in zip(cleaned, cleaned[1:]):
            if lo <= prev_hi:
                raise InvalidArgumentError("cluster intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", cleaned)

    @classmethod
    def from_degrees(cls, *intervals: tuple[float, float]) -> "ClusterSet":
        return cls(tuple((math.radians(lo), math.radians(hi)) for lo, hi in intervals))

    @property
    def measure(self) -> float:
        """Total angular width of the union."""
        return float(sum(hi - lo for lo, hi in self.intervals))

    @property
    def cos_span(self) -> float:
        """Sum over clusters of cos(theta_min) - cos(theta_max)."""
        return float(sum(math.cos(lo) - math.cos(hi) for lo, hi in self.intervals))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n angles drawn uniformly over the union of intervals."""
        widths = np.array([hi - lo for lo, hi in self.intervals])
        lows = np.array([lo for lo, _ in self.intervals])
        if widths.sum() == 0.0:
            # point masses, equally weighted
            picks = rng.integers(0, len(self.intervals), size=n)
            return lows[picks]
        u = rng.uniform(0.0, widths.sum(), size=n)
        edges = np.concatenate([[0.0], np.cumsum(widths)])
        idx = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(widths) - 1)
        return lows[idx] + (u - edges[idx])


# --- Scatterers ---

@dataclass(frozen=True, eq=False)
class ScattererSet:
    """P scatterer positions around (ring) or next to (segment) a user."""

    center: tuple[float, float]
    ring_radius: float
    scatterers: np.ndarray
    layout: ScattererLayout = "ring"
    segment_length: float | None = None

    def __post_init__(self):
        pts = np.asarray(self.scatterers, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise InvalidArgumentError(f"scatterers must be a (P, 2) array, got shape {pts.shape}")
        object.__setattr__(self, "scatterers", _frozen(pts))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def count(self) -> int:
        return self.scatterers.shape[0]


def place_scatterers_ring(center: tuple[float, float], r: float, P: int, seed: Seed) -> ScattererSet:
    """P scatterers at i.i.d. uniform angles on the radius-r ring around center."""
    _require_positive(r=r)
    _require_count(P=P)
    rng = make_rng(seed)
    angles = rng.uniform(0.0, 2 * np.pi, size=P)
    pts = np.column_stack([center[0] + r * np.cos(angles), center[1] + r * np.sin(angles)])
    return ScattererSet(center=center, ring_radius=r, scatterers=pts, layout="ring")


def place_scatterers_segment(origin: tuple[float, float], length: float, P: int, seed: Seed,
                             direction: float = 0.0, r: float = 0.0) -> ScattererSet:
    """
    P scatterers at offsets drawn U(0, length) from origin along `direction`
    (radians). `r` is the extra user-to-scatterer path length added to every path.
    """
    _require_positive(length=length)
    _require_count(P=P)
    if r < 0:
        raise InvalidArgumentError(f"r must be non-negative, got {r}")
    rng = make_rng(seed)
    offsets = rng.uniform(0.0, length, size=P)
    unit = np.array([math.cos(direction), math.sin(direction)])
    pts = np.asarray(origin, dtype=float) + offsets[:, None] * unit
    return ScattererSet(center=origin, ring_radius=r, scatterers=pts, layout="segment", segment_length=length)


# --- Multi-cell layout ---

HEX_CELLS = 7


def hex_cell_centers(L: float) -> np.ndarray:
    """Center cell plus six neighbors of flat-topped hexagons with circumradius L."""
    _require_positive(L=L)
    spacing = math.sqrt(3) * L
    angles = np.radians(30.0 + 60.0 * np.arange(6))
    ring = np.column_stack([spacing * np.cos(angles), spacing * np.sin(angles)])
    return np.vstack([[0.0, 0.0], ring])


def point_in_hexagon(points: np.ndarray, center: np.ndarray, L: float) -> np.ndarray:
    """Mask of points inside the flat-topped hexagon of circumradius L at center."""
    rel = np.abs(np.asarray(points, dtype=float) - center)
    half_height = math.sqrt(3) / 2 * L
    return (rel[:, 1] <= half_height) & (math.sqrt(3) * rel[:, 0] + rel[:, 1] <= math.sqrt(3) * L)


def sample_hexagon(rng: np.random.Generator, n: int, center: np.ndarray, L: float) -> np.ndarray:
    """Uniform points in a hexagon by rejection from its circumscribed disk."""
    out = np.empty((0, 2))
    while out.shape[0] < n:
        batch = sample_disk(rng, 2 * (n - out.shape[0]) + 8, L, (center[0], center[1]))
        out = np.vstack([out, batch[point_in_hexagon(batch, center, L)]])
    return out[:n]


@dataclass(frozen=True, eq=False)
class Cell:
    center: tuple[float, float]
    array: ArrayGeometry
    user: tuple[float, float]
    scatterers: ScattererSet


@dataclass(frozen=True, eq=False)
class MultiCellScenario:
    """B cells, each with its own distributed array and one ring-scattered user."""

    cell_radius: float
    cells: tuple[Cell, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.cells) < 1:
            raise InvalidArgumentError("MultiCellScenario needs at least one cell")

    @property
    def count(self) -> int:
        return len(self.cells)


def make_hex_network(L: float, M_per_cell: int, wavelength: float, r: float, P: int, seed: Seed,
                     user_placement: Literal["uniform", "edge"] = "uniform") -> MultiCellScenario:
    """
    7-cell hexagonal network. Each cell gets M_per_cell antennas uniform in the
    hexagon and one user, uniform in the hexagon or at the apothem distance
    (user_placement="edge"), surrounded by a ring of P scatterers.
    """
    _require_positive(L=L, wavelength=wavelength, r=r)
    _require_count(M_per_cell=M_per_cell, P=P)
    if user_placement not in ("uniform", "edge"):
        raise InvalidArgumentError(f"user_placement must be 'uniform' or 'edge', got {user_placement!r}")

    cells = []
    for b, center in enumerate(hex_cell_centers(L)):
        rng = make_rng(derive_seed(seed, b))
        positions = sample_hexagon(rng, M_per_cell, center, L)
        if user_placement == "uniform":
            user = sample_hexagon(rng, 1, center, L)[0]
        else:
            angle = rng.uniform(0.0, 2 * np.pi)
            user = center + math.sqrt(3) / 2 * L * np.array([math.cos(angle), math.sin(angle)])
        user_xy = (float(user[0]), float(user[1]))
        scat = place_scatterers_ring(user_xy, r, P, derive_seed(seed, b, 1))
        cells.append(Cell(
            center=(float(center[0]), float(center[1])),
            array=ArrayGeometry(positions, wavelength, "multi_cell"),
            user=user_xy,
            scatterers=scat,
        ))

    logger.debug(f"Built hex network: {HEX_CELLS} cells, L={L}, M_per_cell={M_per_cell}, placement={user_placement}")
    return MultiCellScenario(
        cell_radius=L,
        cells=tuple(cells),
        metadata={
            "hex_orientation": "flat-topped",
            "cell_radius_meaning": "circumradius",
            "inter_site_distance": repr(math.sqrt(3) * L),
            "user_placement": user_placement,
        },
    )
