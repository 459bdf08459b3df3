"""
Covariance module - Monte Carlo and quadrature channel covariances,
effective rank and the closed-form rank bounds.
"""
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import linalg

from src.channel import ChannelRealization, PathLossModel, draw_one_ring_channel, steering_matrix
from src.errors import InvalidArgumentError
from src.parallel import Seed, chunk_ranges, derive_seed, map_ordered, pairwise_sum
from src.scenario import ArrayGeometry, ClusterSet, place_scatterers_ring, place_scatterers_segment

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e-5
HERMITIAN_RTOL = 1e-10
# Sample covariances from fewer than this many draws per antenna bias the rank.
DRAWS_PER_ANTENNA = 10
PANEL_ORDER = 8

Sampler = Callable[[Seed], ChannelRealization | np.ndarray]


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Hermitian PSD M x M matrix; draw_count = 0 marks an analytic result."""

    R: np.ndarray
    draw_count: int = 0

    def __post_init__(self):
        R = np.asarray(self.R, dtype=complex)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise InvalidArgumentError(f"covariance must be square, got shape {R.shape}")
        scale = max(float(np.max(np.abs(R))), np.finfo(float).tiny)
        if np.max(np.abs(R - R.conj().T)) > HERMITIAN_RTOL * scale:
            raise InvalidArgumentError("covariance is not Hermitian")
        R = 0.5 * (R + R.conj().T)
        R.setflags(write=False)
        object.__setattr__(self, "R", R)

    @property
    def size(self) -> int:
        return self.R.shape[0]

    def is_psd(self, rtol: float = 1e-10) -> bool:
        eigs = linalg.eigvalsh(self.R)
        return bool(eigs[0] >= -rtol * max(eigs[-1], 0.0))

    def __add__(self, other: "CovarianceMatrix") -> "CovarianceMatrix":
        _check_same_size(self, other)
        return CovarianceMatrix(self.R + other.R, draw_count=min(self.draw_count, other.draw_count))


def zero_covariance(M: int) -> CovarianceMatrix:
    return CovarianceMatrix(np.zeros((M, M), dtype=complex))


def _as_matrix(R: "CovarianceMatrix | np.ndarray") -> np.ndarray:
    return R.R if isinstance(R, CovarianceMatrix) else np.asarray(R)


def _check_same_size(a, b) -> None:
    if _as_matrix(a).shape != _as_matrix(b).shape:
        raise InvalidArgumentError(f"dimension mismatch: {_as_matrix(a).shape} vs {_as_matrix(b).shape}")


# --- Construction ---

def covariance_monte_carlo(sampler: Sampler, T: int, seed: Seed = 0, threads: int = 1,
                           chunk: int = 256) -> CovarianceMatrix:
    """
    R = (1/T) sum_t h_t h_t^H with draw t seeded by (seed, t). Chunk partial sums
    are reduced pairwise in chunk order, so the result is independent of threads.
    """
    if T < 1:
        raise InvalidArgumentError(f"T must be at least 1, got {T}")

    def partial(block: range) -> np.ndarray:
        rows = []
        for t in block:
            draw = sampler(derive_seed(seed, t))
            rows.append(draw.h if isinstance(draw, ChannelRealization) else np.asarray(draw))
        H = np.vstack(rows)
        return H.T @ H.conj()

    parts = map_ordered(partial, chunk_ranges(T, chunk), threads)
    R = pairwise_sum(parts) / T
    return CovarianceMatrix(0.5 * (R + R.conj().T), draw_count=T)


def default_quadrature_nodes(geom: ArrayGeometry, width: float) -> int:
    """8 nodes per resolved oscillation: 8 * ceil(M_eff * width / pi)."""
    m_eff = max(geom.count, 2.0 * geom.aperture / geom.wavelength)
    return PANEL_ORDER * max(1, math.ceil(m_eff * width / math.pi))


def _interval_rule(lo: float, hi: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    order = min(PANEL_ORDER, nodes)
    panels = math.ceil(nodes / order)
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    thetas = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return thetas, weights


def covariance_ula_analytic(geom: ArrayGeometry, clusters: ClusterSet, beta: float = 1.0,
                            nodes: int | None = None) -> CovarianceMatrix:
    """
    R = beta * integral of p(theta) a(theta) a(theta)^H over the clusters, with p
    uniform on their union. Works for any linear array (ULA or random).
    `nodes` is the per-interval node count; default resolves the array aperture.
    """
    if beta <= 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    if nodes is not None and nodes < 2:
        raise InvalidArgumentError(f"need at least 2 quadrature nodes per interval, got {nodes}")

    measure = clusters.measure
    thetas, weights = [], []
    for lo, hi in clusters.intervals:
        if hi == lo:
            if measure == 0.0:
                thetas.append(np.array([lo]))
                weights.append(np.array([1.0 / len(clusters.intervals)]))
            continue
        n = nodes if nodes is not None else default_quadrature_nodes(geom, hi - lo)
        t, w = _interval_rule(lo, hi, n)
        thetas.append(t)
        weights.append(w / measure)

    theta = np.concatenate(thetas)
    weight = np.concatenate(weights)
    A = steering_matrix(geom, theta)
    R = beta * (A * weight[None, :]) @ A.conj().T
    logger.debug(f"Analytic covariance: M={geom.count}, {theta.size} quadrature nodes")
    return CovarianceMatrix(0.5 * (R + R.conj().T))


def covariance_one_ring(geom: ArrayGeometry, user: tuple[float, float], r: float, P: int,
                        loss: PathLossModel, T: int, seed: Seed = 0, threads: int = 1,
                        layout: str = "ring", segment_length: float = 0.0) -> CovarianceMatrix:
    """
    Sample covariance of one user's channel; every draw places fresh scatterers
    (on the ring, or along a segment from `user`) and fresh path phases.
    """
    if layout not in ("ring", "segment"):
        raise InvalidArgumentError(f"layout must be 'ring' or 'segment', got {layout!r}")

    def sampler(s: Seed) -> ChannelRealization:
        if layout == "ring":
            scat = place_scatterers_ring(user, r, P, derive_seed(s, 0))
        else:
            scat = place_scatterers_segment(user, segment_length, P, derive_seed(s, 0), r=r)
        return draw_one_ring_channel(geom, scat, loss, derive_seed(s, 1))

    return covariance_monte_carlo(sampler, T, seed=seed, threads=threads)


# --- Rank ---

@dataclass(frozen=True, eq=False)
class RankReport:
    effective_rank: int
    eigenvalues: np.ndarray
    threshold: float
    bound: float | None = None
    warning: str | None = None


def _spectrum(R) -> np.ndarray:
    """Eigenvalues in descending order with tiny negatives clamped to 0."""
    eigs = linalg.eigvalsh(_as_matrix(R))[::-1]
    return np.clip(eigs, 0.0, None)


def effective_rank(R: "CovarianceMatrix | np.ndarray", threshold: float = DEFAULT_THRESHOLD,
                   bound: float | None = None) -> RankReport:
    """Count eigenvalues above threshold * lambda_max."""
    if not 0.0 < threshold < 1.0:
        raise InvalidArgumentError(f"threshold must lie in (0, 1), got {threshold}")
    eigs = _spectrum(R)
    rank = int(np.count_nonzero(eigs > threshold * eigs[0])) if eigs[0] > 0 else 0

    warning = None
    draws = R.draw_count if isinstance(R, CovarianceMatrix) else 0
    M = eigs.size
    if 0 < draws < DRAWS_PER_ANTENNA * M:
        warning = f"sample covariance from {draws} draws < {DRAWS_PER_ANTENNA}*M={DRAWS_PER_ANTENNA * M}; rank may be biased"
        logger.warning(warning)
    return RankReport(effective_rank=rank, eigenvalues=eigs, threshold=threshold, bound=bound, warning=warning)


def rank_additivity_gap(Rd: "CovarianceMatrix | np.ndarray", Ri: "CovarianceMatrix | np.ndarray",
                        threshold: float = DEFAULT_THRESHOLD) -> int:
    """
    rank(Rd + Ri) - rank(Rd) - rank(Ri), all counted against one cutoff:
    threshold times the largest eigenvalue among Rd and Ri. 0 means additive.
    """
    _check_same_size(Rd, Ri)
    sd, si = _spectrum(Rd), _spectrum(Ri)
    ssum = _spectrum(_as_matrix(Rd) + _as_matrix(Ri))
    cutoff = threshold * max(sd[0], si[0])
    if cutoff == 0.0:
        return 0

    def count(eigs: np.ndarray) -> int:
        return int(np.count_nonzero(eigs > cutoff))

    return count(ssum) - count(sd) - count(si)


def signal_subspace(R: "CovarianceMatrix | np.ndarray", threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Orthonormal basis (M x rank) of eigenvectors above the relative threshold."""
    eigs, vecs = linalg.eigh(_as_matrix(R))
    eigs, vecs = eigs[::-1], vecs[:, ::-1]
    if eigs[0] <= 0:
        return vecs[:, :0]
    return vecs[:, eigs > threshold * eigs[0]]


def projector_overlap(Rd, Ri, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Spectral norm of P_d P_i, the product of signal-subspace projectors."""
    _check_same_size(Rd, Ri)
    Ud, Ui = signal_subspace(Rd, threshold), signal_subspace(Ri, threshold)
    if Ud.shape[1] == 0 or Ui.shape[1] == 0:
        return 0.0
    return float(linalg.svdvals(Ud.conj().T @ Ui)[0])


# --- Closed-form bounds ---

def rank_bound_multicluster(clusters: ClusterSet, spacing: float, wavelength: float, M: int) -> float:
    """sum_q (cos theta_q_min - cos theta_q_max) * M * spacing / lambda."""
    if spacing <= 0 or wavelength <= 0 or M < 1:
        raise InvalidArgumentError("rank bounds need spacing > 0, wavelength > 0, M >= 1")
    return clusters.cos_span * M * spacing / wavelength


def rank_bound_ula(clusters: ClusterSet, D: float, wavelength: float, M: int) -> float:
    """Multi-cluster ULA bound: M * min(1, sum_q (cos min - cos max) * D / lambda)."""
    return M * min(1.0, rank_bound_multicluster(clusters, D, wavelength, 1))


def rank_bound_random(clusters: ClusterSet, mean_spacing: float, wavelength: float, M: int) -> float:
    """Random linear array bound without the o(M) slack (no cap at M)."""
    return rank_bound_multicluster(clusters, mean_spacing, wavelength, M)


def rank_bound_span(b1: float, b2: float, mean_spacing: float, wavelength: float, M: int) -> float:
    """Dimension bound (b2 - b1) * M * mean_spacing / lambda for span{alpha(x), x in [b1, b2]}."""
    if not -1.0 <= b1 < b2 <= 1.0:
        raise InvalidArgumentError(f"need -1 <= b1 < b2 <= 1, got b1={b1}, b2={b2}")
    if mean_spacing <= 0 or wavelength <= 0 or M < 1:
        raise InvalidArgumentError("rank bounds need spacing > 0, wavelength > 0, M >= 1")
    return (b2 - b1) * M * mean_spacing / wavelength


def rank_bound_distributed(r: float, wavelength: float) -> float:
    """One-ring distributed-array bound 4 pi r / lambda."""
    if r < 0 or wavelength <= 0:
        raise InvalidArgumentError(f"need r >= 0 and wavelength > 0, got r={r}, wavelength={wavelength}")
    return 4 * math.pi * r / wavelength


def rank_bound_segment(length: float, wavelength: float) -> float:
    """Line-of-scatterers bound 2 L / lambda."""
    if length < 0 or wavelength <= 0:
        raise InvalidArgumentError(f"need length >= 0 and wavelength > 0, got {length}, {wavelength}")
    return 2 * length / wavelength
