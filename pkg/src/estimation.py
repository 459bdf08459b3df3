"""
Estimation module - pilot phase simulation, LS and MMSE channel estimators,
the noiseless MMSE error covariance and the MSE metric.
"""
import logging
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from src.channel import ChannelRealization
from src.covariance import CovarianceMatrix
from src.errors import InvalidArgumentError
from src.parallel import Seed, make_rng

logger = logging.getLogger(__name__)

DEFAULT_TAU = 16
MSE_FLOOR_DB = -300.0
ILL_CONDITIONED = 1e10
# Above this the system is treated as singular and solved in the least-squares sense.
SINGULAR_CONDITION = 1e13
PINV_RTOL = 1e-10
ERROR_COV_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class PilotConfig:
    """Pilot s (length tau, s^H s = tau) and the noise variance per complex entry."""

    s: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.s, dtype=complex).ravel()
        if s.size < 1:
            raise InvalidArgumentError("pilot must have length tau >= 1")
        power = float(np.vdot(s, s).real)
        if power == 0.0:
            raise InvalidArgumentError("pilot sequence is all zeros")
        if abs(power - s.size) > 1e-9 * s.size:
            raise InvalidArgumentError(f"pilot power s^H s = {power:.6g} must equal tau = {s.size}")
        if self.noise_var < 0:
            raise InvalidArgumentError(f"noise variance must be >= 0, got {self.noise_var}")
        s.setflags(write=False)
        object.__setattr__(self, "s", s)

    @property
    def tau(self) -> int:
        return self.s.size


def make_pilot(tau: int = DEFAULT_TAU, noise_var: float = 0.0, seed: Seed = 0) -> PilotConfig:
    """Constant-modulus pilot with pseudo-random phases."""
    if tau < 1:
        raise InvalidArgumentError(f"tau must be at least 1, got {tau}")
    phases = make_rng(seed).uniform(0.0, 2 * np.pi, size=tau)
    return PilotConfig(s=np.exp(1j * phases), noise_var=noise_var)


@dataclass(frozen=True, eq=False)
class EstimationResult:
    h_hat: np.ndarray
    method: str
    mse_db: float | None = None
    condition: float | None = None

    def scored(self, h: np.ndarray) -> "EstimationResult":
        """Copy with mse_db measured against the true channel h."""
        return replace(self, mse_db=estimation_mse_db(self.h_hat, h))


def _channel_vector(ch: ChannelRealization | np.ndarray) -> np.ndarray:
    return ch.h if isinstance(ch, ChannelRealization) else np.asarray(ch)


# --- Pilot phase ---

def simulate_pilot_rx(channels: list[ChannelRealization | np.ndarray], pilot: PilotConfig,
                      seed: Seed) -> np.ndarray:
    """Y = sum_b h_b s^T + N with N circular complex Gaussian of variance noise_var."""
    if not channels:
        raise InvalidArgumentError("need at least one channel")
    hs = [_channel_vector(ch) for ch in channels]
    M = hs[0].shape[0]
    if any(h.shape != (M,) for h in hs):
        raise InvalidArgumentError(f"all channels must have length {M}")

    Y = np.outer(np.sum(hs, axis=0), pilot.s)
    if pilot.noise_var > 0:
        rng = make_rng(seed)
        scale = math.sqrt(pilot.noise_var / 2)
        Y = Y + scale * (rng.standard_normal((M, pilot.tau)) + 1j * rng.standard_normal((M, pilot.tau)))
    return Y


def _despread(Y: np.ndarray, pilot: PilotConfig) -> np.ndarray:
    Y = np.asarray(Y)
    if Y.ndim != 2 or Y.shape[1] != pilot.tau:
        raise InvalidArgumentError(f"received block must be M x {pilot.tau}, got shape {Y.shape}")
    return Y @ pilot.s.conj()


# --- Estimators ---

def ls_estimate(Y: np.ndarray, pilot: PilotConfig) -> EstimationResult:
    """h_hat = Y s* / tau."""
    return EstimationResult(h_hat=_despread(Y, pilot) / pilot.tau, method="ls")


def solve_hermitian(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Solve A x = b for Hermitian A with one step of iterative refinement.
    Falls back to the pseudo-inverse when A is numerically singular.
    """
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        logger.warning(f"Singular system (cond={cond:.3g}), using pseudo-inverse")
        return pseudo_inverse(A, tol=PINV_RTOL) @ b, cond
    if cond > ILL_CONDITIONED:
        logger.warning(f"Ill-conditioned system: cond={cond:.3g}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        x = linalg.solve(A, b, assume_a="her")
        x = x + linalg.solve(A, b - A @ x, assume_a="her")
    return x, cond


def mmse_estimate(Y: np.ndarray, pilot: PilotConfig,
                  R_all: list[CovarianceMatrix | np.ndarray]) -> EstimationResult:
    """
    h_hat = R_1 (noise_var I + tau sum_b R_b)^-1 (Y s*), R_1 = R_all[0] the target.
    """
    if not R_all:
        raise InvalidArgumentError("need at least the target covariance")
    mats = [R.R if isinstance(R, CovarianceMatrix) else np.asarray(R) for R in R_all]
    z = _despread(Y, pilot)
    M = z.shape[0]
    if any(R.shape != (M, M) for R in mats):
        raise InvalidArgumentError(f"all covariances must be {M} x {M}")

    A = pilot.noise_var * np.eye(M) + pilot.tau * np.sum(mats, axis=0)
    x, cond = solve_hermitian(A, z)
    return EstimationResult(h_hat=mats[0] @ x, method="mmse", condition=cond)


def mmse_gain(R_all: list[CovarianceMatrix | np.ndarray], tau: int, noise_var: float) -> tuple[np.ndarray, float]:
    """
    G = R_1 (noise_var I + tau sum_b R_b)^-1, so that mmse_estimate gives G @ (Y s*).
    For sweeps that reuse one set of covariances across many pilot blocks.
    """
    mats = [R.R if isinstance(R, CovarianceMatrix) else np.asarray(R) for R in R_all]
    if not mats:
        raise InvalidArgumentError("need at least the target covariance")
    M = mats[0].shape[0]
    A = noise_var * np.eye(M) + tau * np.sum(mats, axis=0)
    X, cond = solve_hermitian(A, mats[0])
    return X.conj().T, cond


# --- Linear algebra ---

def pseudo_inverse(A: np.ndarray, tol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD; singular values <= tol * s_max are dropped."""
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("pseudo_inverse needs a finite matrix")
    u, s, vh = linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(A.shape[::-1], dtype=A.dtype)
    keep = s > tol * s[0]
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (vh.conj().T * s_inv) @ u.conj().T


def error_covariance_noiseless(Rd: CovarianceMatrix | np.ndarray, Ri: CovarianceMatrix | np.ndarray) -> np.ndarray:
    """C_e = Rd - Rd (Rd + Ri)^+ Rd, the noiseless linear MMSE error covariance."""
    Rd = Rd.R if isinstance(Rd, CovarianceMatrix) else np.asarray(Rd)
    Ri = Ri.R if isinstance(Ri, CovarianceMatrix) else np.asarray(Ri)
    if Rd.shape != Ri.shape or Rd.ndim != 2:
        raise InvalidArgumentError(f"dimension mismatch: {Rd.shape} vs {Ri.shape}")
    Ce = Rd - Rd @ pseudo_inverse(Rd + Ri, tol=ERROR_COV_RTOL) @ Rd
    return 0.5 * (Ce + Ce.conj().T)


def estimation_mse_db(h_hat: np.ndarray, h: np.ndarray) -> float:
    """10 log10(||h_hat - h||^2 / ||h||^2), floored at -300 dB."""
    h_hat, h = np.asarray(h_hat), np.asarray(h)
    if h_hat.shape != h.shape:
        raise InvalidArgumentError(f"length mismatch: {h_hat.shape} vs {h.shape}")
    ref = float(np.vdot(h, h).real)
    if ref == 0.0:
        raise InvalidArgumentError("true channel is zero")
    err = float(np.vdot(h_hat - h, h_hat - h).real)
    if err == 0.0:
        return MSE_FLOOR_DB
    return max(MSE_FLOOR_DB, 10 * math.log10(err / ref))
