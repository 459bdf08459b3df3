"""
Channel module - steering vectors and random channel realizations for
uniform, random linear and distributed (one-ring) arrays.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from src.errors import DegenerateGeometryError, InvalidArgumentError
from src.parallel import Seed, make_rng
from src.scenario import ArrayGeometry, ClusterSet, ScattererSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One user's channel h (length M) and, for one-ring draws, its P path vectors."""

    h: np.ndarray
    per_path: np.ndarray | None = None
    user: int = 0
    seed: Seed | None = None

    @property
    def count(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class PathLossModel:
    """beta = alpha / (d + r)^gamma, or 1 everywhere when disabled."""

    alpha: float = 1.0
    gamma: float = 2.5
    enabled: bool = True

    def __post_init__(self):
        if not (self.alpha > 0 and self.gamma > 0):
            raise InvalidArgumentError(f"alpha and gamma must be positive, got {self.alpha}, {self.gamma}")


NO_PATH_LOSS = PathLossModel(enabled=False)


def alpha_for_cell_edge_snr(snr_db: float, L: float, r: float, gamma: float, noise_var: float = 1.0) -> float:
    """alpha giving per-antenna SNR `snr_db` for a path of length L + r (unit transmit power)."""
    if L <= 0 or r < 0 or noise_var <= 0:
        raise InvalidArgumentError("cell-edge calibration needs L > 0, r >= 0, noise_var > 0")
    return 10 ** (snr_db / 10) * noise_var * (L + r) ** gamma


# --- Steering vectors ---

def _linear_positions(geom: ArrayGeometry) -> np.ndarray:
    if not geom.is_linear:
        raise InvalidArgumentError(f"steering vectors need a linear array, got kind={geom.kind}")
    return geom.positions[:, 0]


def steering_vector_ula(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """a(theta)[m] = exp(-j 2 pi (m-1) D cos(theta) / lambda)."""
    if geom.kind != "ula" or geom.spacing is None:
        raise InvalidArgumentError(f"steering_vector_ula needs a ULA geometry, got kind={geom.kind}")
    m = np.arange(geom.count)
    return np.exp(-2j * np.pi * m * geom.spacing * math.cos(theta) / geom.wavelength)


def steering_vector_positions(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """a(theta)[m] = exp(-j 2 pi d_m cos(theta) / lambda) for antennas on a line."""
    d = _linear_positions(geom)
    return np.exp(-2j * np.pi * d * math.cos(theta) / geom.wavelength)


def steering_matrix(geom: ArrayGeometry, thetas: np.ndarray) -> np.ndarray:
    """Columns are steering vectors for each angle in `thetas` (M x n)."""
    d = _linear_positions(geom)
    return np.exp(-2j * np.pi * np.outer(d, np.cos(np.asarray(thetas, dtype=float))) / geom.wavelength)


# --- Random channels ---

def draw_multipath_channel(geom: ArrayGeometry, clusters: ClusterSet, P: int, beta: float, seed: Seed,
                           phases: np.ndarray | None = None) -> ChannelRealization:
    """
    h = sqrt(beta / P) * sum_p a(theta_p) exp(j phi_p), theta_p uniform on the
    clusters. `phases` pins phi_p (test hook); otherwise phi_p ~ U[0, 2 pi).
    """
    if P < 1:
        raise InvalidArgumentError(f"P must be at least 1, got {P}")
    if beta <= 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    rng = make_rng(seed)
    thetas = clusters.sample(rng, P)
    phi = rng.uniform(0.0, 2 * np.pi, size=P) if phases is None else np.broadcast_to(phases, (P,))
    A = steering_matrix(geom, thetas)
    h = math.sqrt(beta / P) * (A @ np.exp(1j * phi))
    return ChannelRealization(h=h, seed=seed)


def path_loss(d: float | np.ndarray, r: float, loss: PathLossModel) -> float | np.ndarray:
    """alpha / (d + r)^gamma, or 1 when path loss is disabled."""
    total = np.asarray(d, dtype=float) + r
    if np.any(total <= 0):
        raise InvalidArgumentError("path length d + r must be positive")
    if not loss.enabled:
        out = np.ones_like(total)
    else:
        out = loss.alpha / total ** loss.gamma
    return float(out) if out.ndim == 0 else out


def draw_one_ring_channel(geom: ArrayGeometry, scat: ScattererSet, loss: PathLossModel, seed: Seed,
                          phases: np.ndarray | None = None, user: int = 0) -> ChannelRealization:
    """
    Path vector p, entry m: sqrt(beta_pm) exp(-j 2 pi (d_pm + r) / lambda) exp(j phi_p);
    h = (1 / sqrt(P)) sum_p h_p. Distances are 2D Euclidean.
    """
    r = scat.ring_radius
    d = cdist(scat.scatterers, geom.positions)  # P x M
    if loss.enabled and np.any(d <= 1e-12 * geom.wavelength):
        p, m = np.argwhere(d <= 1e-12 * geom.wavelength)[0]
        raise DegenerateGeometryError(f"antenna {m} coincides with scatterer {p}")

    rng = make_rng(seed)
    P = scat.count
    phi = rng.uniform(0.0, 2 * np.pi, size=P) if phases is None else np.broadcast_to(phases, (P,))

    per_path = np.exp(-2j * np.pi * (d + r) / geom.wavelength) * np.exp(1j * phi)[:, None]
    if loss.enabled:
        per_path *= np.sqrt(path_loss(d, r, loss))
    h = per_path.sum(axis=0) / math.sqrt(P)
    return ChannelRealization(h=h, per_path=per_path, user=user, seed=seed)


def draw_single_path_channel(geom: ArrayGeometry, scatterer: tuple[float, float], r: float,
                             loss: PathLossModel, phase: float = 0.0) -> np.ndarray:
    """The scattering-path vector h_kp for one scatterer position."""
    scat = ScattererSet(center=scatterer, ring_radius=r, scatterers=np.asarray([scatterer]), layout="segment")
    return draw_one_ring_channel(geom, scat, loss, seed=0, phases=np.array([phase])).per_path[0]
