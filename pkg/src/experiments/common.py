"""
Helpers shared by experiment pipelines.
"""
import logging
from typing import Any

import numpy as np

from src.channel import NO_PATH_LOSS, PathLossModel, alpha_for_cell_edge_snr, draw_one_ring_channel
from src.errors import ConfigError
from src.experiments.router import RunContext
from src.parallel import Seed, derive_seed
from src.results import write_geometry_csv, write_realization_csv, write_spectrum_csv
from src.scenario import ArrayGeometry, ClusterSet, make_random_linear, make_ula, place_scatterers_ring

logger = logging.getLogger(__name__)


def clusters_from_degrees(values: list[float], key: str) -> ClusterSet:
    """'lo1,hi1,lo2,hi2,...' in degrees."""
    if len(values) % 2:
        raise ConfigError(f"'{key}' needs an even number of angles (min,max pairs)", key=key)
    pairs = [(values[i], values[i + 1]) for i in range(0, len(values), 2)]
    try:
        return ClusterSet.from_degrees(*pairs)
    except ValueError as e:
        raise ConfigError(f"invalid '{key}': {e}", key=key) from None


def linear_array(kind: str, M: int, spacing: float, wavelength: float, seed: Seed) -> ArrayGeometry:
    if kind == "ula":
        return make_ula(M, spacing, wavelength)
    if kind == "random":
        return make_random_linear(M, spacing, wavelength, seed)
    raise ConfigError(f"array must be 'ula' or 'random', got {kind!r}", key="array")


def calibrated_loss(params: dict[str, Any]) -> PathLossModel:
    """Path loss with alpha set from the cell-edge SNR (unit noise), or disabled."""
    if not params.get("path_loss", True):
        return NO_PATH_LOSS
    alpha = alpha_for_cell_edge_snr(params["snr_db"], params["L"], params["r"], params["gamma"])
    return PathLossModel(alpha=alpha, gamma=params["gamma"])


def draw_user_channel(geom: ArrayGeometry, user: tuple[float, float], r: float, P: int,
                      loss: PathLossModel, seed: Seed) -> np.ndarray:
    """Fresh scatterer ring and phases, seeded the same way as covariance_one_ring."""
    scat = place_scatterers_ring(user, r, P, derive_seed(seed, 0))
    return draw_one_ring_channel(geom, scat, loss, derive_seed(seed, 1)).h


def noise_var_for_snr(snr_db: float) -> float:
    return 10 ** (-snr_db / 10)


def draws_for(M: int, per_antenna: int) -> int:
    return max(1, per_antenna * M)



# --- Raw artifacts (run --dump) ---

def _text(metadata: dict[str, Any]) -> dict[str, str]:
    return {key: str(value) for key, value in metadata.items()}


def dump_geometry(ctx: RunContext, name: str, positions: np.ndarray, **metadata: Any) -> None:
    if (path := ctx.artifact_path(name)) is not None:
        write_geometry_csv(positions, path, _text(metadata))


def dump_spectrum(ctx: RunContext, name: str, eigenvalues: np.ndarray, **metadata: Any) -> None:
    if (path := ctx.artifact_path(name)) is not None:
        write_spectrum_csv(eigenvalues, path, _text(metadata))


def dump_realization(ctx: RunContext, name: str, h: np.ndarray, **metadata: Any) -> None:
    if (path := ctx.artifact_path(name)) is not None:
        write_realization_csv(h, path, _text(metadata))
