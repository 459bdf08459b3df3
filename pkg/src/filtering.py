"""
Filtering module - matched-filter SIR analysis for distributed arrays and the
subspace-projection receiver with SINR and rate evaluation.
"""
import logging
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, special, stats

from src.channel import ChannelRealization, PathLossModel, draw_single_path_channel
from src.covariance import DEFAULT_THRESHOLD, CovarianceMatrix
from src.errors import DomainError, EmptyFilterError, InvalidArgumentError, QuadratureError
from src.estimation import PilotConfig, solve_hermitian
from src.parallel import Seed, derive_seed, make_rng, map_ordered
from src.scenario import make_disk_network

logger = logging.getLogger(__name__)

SIR_SENTINEL = 1e30
SIGMA_SQ_RTOL = 1e-4
# Smallest x = 2 pi d / lambda for which the |J0| envelope is defined.
KRASIKOV_X_MIN = math.sqrt(3 + 3 ** (2 / 3)) / 2
KRASIKOV_DISTANCE = KRASIKOV_X_MIN / (2 * math.pi)  # in wavelengths, ~0.17937
SIGMA_SQ_MODES = ("first_principles", "printed")


@dataclass(frozen=True)
class NetworkParams:
    """Disk network radius L and path loss alpha / (d + r)^gamma used by sigma^2(D)."""

    L: float
    alpha: float = 1.0
    gamma: float = 2.5
    mode: str = "first_principles"

    def __post_init__(self):
        if self.L <= 0 or self.alpha <= 0 or self.gamma <= 0:
            raise InvalidArgumentError("network needs L, alpha and gamma > 0")
        if self.mode not in SIGMA_SQ_MODES:
            raise InvalidArgumentError(f"mode must be one of {SIGMA_SQ_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class SirBoundInput:
    D_u: float
    r: float
    wavelength: float
    M: int
    network: NetworkParams | None = None

    def __post_init__(self):
        if self.r < 0 or self.wavelength <= 0 or self.M < 1:
            raise InvalidArgumentError("need r >= 0, wavelength > 0, M >= 1")
        if self.D_u <= 2 * self.r:
            raise InvalidArgumentError(f"scattering rings overlap: D_u={self.D_u} <= 2r={2 * self.r}")

    @property
    def gap(self) -> float:
        """Closest scatterer separation D_u - 2r."""
        return self.D_u - 2 * self.r


@dataclass(frozen=True, eq=False)
class BeamformerWeights:
    """Row combiner w (length M) applied as w @ y."""

    w: np.ndarray
    method: str
    subspace_dim: int | None = None

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex).ravel()
        if not np.all(np.isfinite(w)):
            raise InvalidArgumentError(f"{self.method} weights are not finite")
        object.__setattr__(self, "w", w)


def _vec(x: ChannelRealization | np.ndarray) -> np.ndarray:
    return x.h if isinstance(x, ChannelRealization) else np.asarray(x)


# --- Matched filter ---

def matched_filter_sir(h1: np.ndarray, h2: np.ndarray) -> float:
    """|h1^H h1|^2 / |h2^H h1|^2, with SIR_SENTINEL when the users are orthogonal."""
    h1, h2 = _vec(h1), _vec(h2)
    if h1.shape != h2.shape:
        raise InvalidArgumentError(f"length mismatch: {h1.shape} vs {h2.shape}")
    signal = float(np.vdot(h1, h1).real) ** 2
    if signal == 0.0:
        raise InvalidArgumentError("h1 is zero")
    leak = abs(np.vdot(h2, h1)) ** 2
    if leak == 0.0:
        return SIR_SENTINEL
    return min(signal / leak, SIR_SENTINEL)


def path_correlation(h1p: np.ndarray, h2q: np.ndarray) -> float:
    """|h2q^H h1p| / (|h1p| |h2q|)."""
    h1p, h2q = np.asarray(h1p), np.asarray(h2q)
    n1, n2 = linalg.norm(h1p), linalg.norm(h2q)
    if n1 == 0.0 or n2 == 0.0:
        raise InvalidArgumentError("path vectors must be nonzero")
    return min(1.0, float(abs(np.vdot(h2q, h1p)) / (n1 * n2)))


def bessel_j0(x: float | np.ndarray) -> float | np.ndarray:
    """Zero-order Bessel function of the first kind (Cephes rational approximations)."""
    out = special.j0(x)
    return float(out) if np.ndim(out) == 0 else out


def krasikov_envelope(x: float | np.ndarray) -> float | np.ndarray:
    """Upper envelope of |J0(x)|: sqrt((16x^2 - 20) / (pi ((4x^2 - 3)^(3/2) - 3)))."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= KRASIKOV_X_MIN):
        raise DomainError(f"envelope needs x > {KRASIKOV_X_MIN:.6f}", threshold=KRASIKOV_X_MIN)
    out = np.sqrt((16 * x ** 2 - 20) / (np.pi * ((4 * x ** 2 - 3) ** 1.5 - 3)))
    return float(out) if out.ndim == 0 else out


def krasikov_sir_bound(inp: SirBoundInput) -> float:
    """Closely spaced users: pi ((4x^2 - 3)^(3/2) - 3) / (16x^2 - 20), x = 2 pi (D_u - 2r) / lambda."""
    threshold = KRASIKOV_DISTANCE * inp.wavelength + 2 * inp.r
    if inp.D_u <= threshold:
        raise DomainError(
            f"bound valid only for D_u > {threshold:.6g} m (0.17937 lambda + 2r)", threshold=threshold
        )
    x = 2 * math.pi * inp.gap / inp.wavelength
    return math.pi * ((4 * x ** 2 - 3) ** 1.5 - 3) / (16 * x ** 2 - 20)


# --- Path loss correlation ---

def _alpha_eff(alpha: float, mode: str) -> float:
    if mode not in SIGMA_SQ_MODES:
        raise InvalidArgumentError(f"mode must be one of {SIGMA_SQ_MODES}, got {mode!r}")
    return alpha ** 2 if mode == "first_principles" else alpha


def sigma_sq(D: float, L: float, r: float, alpha: float = 1.0, gamma: float = 2.5,
             mode: str = "first_principles", rtol: float = SIGMA_SQ_RTOL) -> float:
    """
    sigma^2(D) = E{beta_2 beta_1} for antennas uniform on a radius-L disk around
    scatterer 1 and scatterer 2 at distance D:

        2 a / (pi L^2) int_0^L int_0^pi rho / ((rho + r)^g (sqrt(D^2 + rho^2 - 2 rho D cos phi) + r)^g)

    with a = alpha^2 ("first_principles") or alpha ("printed").
    """
    if D < 0 or L <= 0 or r < 0 or gamma <= 0:
        raise InvalidArgumentError("sigma_sq needs D >= 0, L > 0, r >= 0, gamma > 0")
    if r == 0 and D == 0:
        raise InvalidArgumentError("sigma_sq diverges for r = 0 and D = 0")
    prefactor = 2 * _alpha_eff(alpha, mode) / (math.pi * L ** 2)
    inner_errors = []

    def inner(rho: float) -> float:
        def f(phi: float) -> float:
            d2 = math.sqrt(max(D * D + rho * rho - 2 * rho * D * math.cos(phi), 0.0))
            return 1.0 / (d2 + r) ** gamma
        val, err = integrate.quad(f, 0.0, math.pi, epsabs=0.0, epsrel=rtol / 10, limit=200)
        inner_errors.append(err / max(abs(val), np.finfo(float).tiny))
        return rho / (rho + r) ** gamma * val

    points = [D] if 0 < D < L else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, abserr = integrate.quad(inner, 0.0, L, points=points, epsabs=0.0, epsrel=rtol / 10, limit=200)

    achieved = abserr / abs(value) + max(inner_errors, default=0.0)
    if caught:
        logger.warning(f"sigma_sq(D={D}): {caught[0].message}")
    if achieved > rtol:
        raise QuadratureError(
            f"sigma_sq(D={D}) reached relative error {achieved:.2e} > {rtol:.0e}",
            value=prefactor * value, error=achieved,
        )
    return prefactor * value


def sigma_sq_monte_carlo(D: float, L: float, r: float, alpha: float = 1.0, gamma: float = 2.5,
                         samples: int = 1_000_000, seed: Seed = 0,
                         mode: str = "first_principles") -> tuple[float, float]:
    """
    E{beta_2 beta_1} by sampling the antenna position, one sample per
    equal-area annulus of the disk. Returns (mean, standard error).
    """
    if samples < 2:
        raise InvalidArgumentError("need at least 2 samples")
    rng = make_rng(seed)
    u = (np.arange(samples) + rng.uniform(size=samples)) / samples
    rho = L * np.sqrt(u)
    phi = rng.uniform(0.0, 2 * np.pi, size=samples)
    x, y = rho * np.cos(phi), rho * np.sin(phi)
    d2 = np.hypot(x - D, y)
    values = _alpha_eff(alpha, mode) / ((rho + r) ** gamma * (d2 + r) ** gamma)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples))


def estimate_c(sampler: Callable[[Seed], ChannelRealization | np.ndarray], draws: int = 100,
               seed: Seed = 0) -> tuple[float, float]:
    """C = mean of ||h_1||^2 / M over `draws` channels, with its standard error."""
    if draws < 2:
        raise InvalidArgumentError("need at least 2 draws to estimate C")
    values = np.array([np.vdot(h, h).real / h.size for h in (_vec(sampler(derive_seed(seed, t))) for t in range(draws))])
    C, se = float(values.mean()), float(values.std(ddof=1) / math.sqrt(draws))
    logger.info(f"Estimated C = {C:.6g} (standard error {se:.3g}, {draws} draws)")
    return C, se


def sir_bound_distant(inp: SirBoundInput, C: float, sigma2: float | None = None) -> float:
    """Distant users: M C^2 / sigma^2(D_u - 2r)."""
    if C <= 0:
        raise InvalidArgumentError(f"C must be positive, got {C}")
    if sigma2 is None:
        if inp.network is None:
            raise InvalidArgumentError("sir_bound_distant needs network parameters or sigma2")
        net = inp.network
        sigma2 = sigma_sq(inp.gap, net.L, inp.r, net.alpha, net.gamma, net.mode)
    if sigma2 <= 0:
        raise InvalidArgumentError(f"sigma^2 must be positive, got {sigma2}")
    return inp.M * C ** 2 / sigma2


def crosscorr_limit_samples(M: int, L: float, D_pq: float, r: float, wavelength: float,
                            loss: PathLossModel, trials: int, seed: Seed = 0,
                            threads: int = 1) -> np.ndarray:
    """
    Samples of |h2q^H h1p|^2 / (sigma^2(D_pq) M). Each trial redraws the antenna
    disk (centered on scatterer 1) and both path phases.
    """
    if not loss.enabled:
        raise InvalidArgumentError("cross-correlation limit needs path loss enabled")
    if trials < 1:
        raise InvalidArgumentError(f"trials must be at least 1, got {trials}")
    sigma2 = sigma_sq(D_pq, L, r, loss.alpha, loss.gamma)

    def one(t: int) -> float:
        geom = make_disk_network(M, L, wavelength, seed=derive_seed(seed, t, 0))
        phases = make_rng(derive_seed(seed, t, 1)).uniform(0.0, 2 * np.pi, size=2)
        h1p = draw_single_path_channel(geom, (0.0, 0.0), r, loss, phase=phases[0])
        h2q = draw_single_path_channel(geom, (D_pq, 0.0), r, loss, phase=phases[1])
        return abs(np.vdot(h2q, h1p)) ** 2 / (sigma2 * M)

    return np.array(map_ordered(one, range(trials), threads))


def exponential_ks(samples: np.ndarray) -> tuple[float, float]:
    """KS statistic against an exponential law with the sample mean. Returns (statistic, mean)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2 or np.any(samples < 0):
        raise InvalidArgumentError("need at least 2 nonnegative samples")
    mean = float(samples.mean())
    return float(stats.kstest(samples, "expon", args=(0.0, mean)).statistic), mean


# --- Subspace receiver ---

def subspace_filter(R_I: CovarianceMatrix | np.ndarray, threshold: float = DEFAULT_THRESHOLD,
                    max_rank: int | None = None) -> np.ndarray:
    """
    W1 ((M - m) x M): conjugate eigenvectors of R_I beyond its m non-negligible
    eigenvalues. `max_rank` caps m so the strongest interference modes are still
    avoided when R_I fills every dimension.
    """
    R = R_I.R if isinstance(R_I, CovarianceMatrix) else np.asarray(R_I)
    eigs, vecs = linalg.eigh(R)
    eigs, vecs = eigs[::-1], vecs[:, ::-1]
    M = eigs.size
    m = int(np.count_nonzero(eigs > threshold * eigs[0])) if eigs[0] > 0 else 0
    if max_rank is not None:
        m = min(m, max_rank)
    if m >= M:
        raise EmptyFilterError(f"interference occupies all {M} dimensions; set max_rank below {M}")
    logger.debug(f"Subspace filter: interference rank {m}, {M - m} free dimensions")
    return vecs[:, m:].conj().T


def subspace_mrc_receiver(W1: np.ndarray, Y: np.ndarray, pilot: PilotConfig) -> BeamformerWeights:
    """h1_low = W1 Y s* / (s^T s*); w = h1_low^H W1."""
    W1, Y = np.asarray(W1), np.asarray(Y)
    if Y.ndim != 2 or Y.shape != (W1.shape[1], pilot.tau):
        raise InvalidArgumentError(f"received block must be {W1.shape[1]} x {pilot.tau}, got {Y.shape}")
    h_low = W1 @ (Y @ pilot.s.conj()) / float(np.vdot(pilot.s, pilot.s).real)
    return BeamformerWeights(w=h_low.conj() @ W1, method="subspace_mrc", subspace_dim=W1.shape[0])


def mrc_weights(h_hat: np.ndarray, method: str = "mrc_ls") -> BeamformerWeights:
    return BeamformerWeights(w=np.asarray(h_hat).conj(), method=method)


def mmse_beamformer(h_hat: np.ndarray, R_int: CovarianceMatrix | np.ndarray, noise_var: float) -> BeamformerWeights:
    """w = h_hat^H (noise_var I + R_int)^-1, by a Hermitian solve."""
    h_hat = np.asarray(h_hat)
    R = R_int.R if isinstance(R_int, CovarianceMatrix) else np.asarray(R_int)
    if R.shape != (h_hat.size, h_hat.size):
        raise InvalidArgumentError(f"R_int must be {h_hat.size} x {h_hat.size}, got {R.shape}")
    if noise_var < 0:
        raise InvalidArgumentError(f"noise variance must be >= 0, got {noise_var}")
    x, _ = solve_hermitian(noise_var * np.eye(h_hat.size) + R, h_hat)
    return BeamformerWeights(w=x.conj(), method="mmse_bf")


class MmseCombiner:
    """mmse_beamformer with (noise_var I + R_int) factored once, for many estimates."""

    def __init__(self, R_int: CovarianceMatrix | np.ndarray, noise_var: float):
        R = R_int.R if isinstance(R_int, CovarianceMatrix) else np.asarray(R_int)
        if noise_var < 0:
            raise InvalidArgumentError(f"noise variance must be >= 0, got {noise_var}")
        M = R.shape[0]
        self.inverse, self.condition = solve_hermitian(noise_var * np.eye(M) + R, np.eye(M))

    def __call__(self, h_hat: np.ndarray) -> BeamformerWeights:
        return BeamformerWeights(w=(self.inverse @ np.asarray(h_hat)).conj(), method="mmse_bf")


# --- SINR and rates ---

def uplink_sinr(w: BeamformerWeights | np.ndarray, channels: list[ChannelRealization | np.ndarray],
                noise_var: float) -> float:
    """|w h1|^2 / (sum_{k>=2} |w h_k|^2 + noise_var ||w||^2) with unit transmit powers."""
    w = w.w if isinstance(w, BeamformerWeights) else np.asarray(w)
    if not np.any(w):
        raise InvalidArgumentError("combiner is zero")
    if not channels:
        raise InvalidArgumentError("need the target channel")
    gains = np.array([abs(w @ _vec(h)) ** 2 for h in channels])
    denom = gains[1:].sum() + noise_var * float(np.vdot(w, w).real)
    if denom == 0.0:
        return SIR_SENTINEL
    return min(float(gains[0] / denom), SIR_SENTINEL)


def sum_rate(sinrs: list[float] | np.ndarray) -> float:
    """sum_k log2(1 + SINR_k) in bits per channel use."""
    sinrs = np.asarray(sinrs, dtype=float)
    if np.any(sinrs < 0) or np.any(np.isnan(sinrs)):
        raise InvalidArgumentError("SINR values must be >= 0")
    return float(np.sum(np.log2(1 + sinrs)))


def per_cell_rate(sinrs: list[float] | np.ndarray, B: int) -> float:
    """Sum-rate divided by the number of cells."""
    if B < 1:
        raise InvalidArgumentError(f"B must be at least 1, got {B}")
    return sum_rate(sinrs) / B
