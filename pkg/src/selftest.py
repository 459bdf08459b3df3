"""
Property checks run by `python -m src.main selftest`.
"""
import logging
import math
from collections.abc import Callable

import numpy as np
from numpy.testing import assert_allclose

from src.channel import draw_multipath_channel, steering_vector_ula
from src.covariance import covariance_ula_analytic, rank_additivity_gap
from src.estimation import (
    error_covariance_noiseless,
    estimation_mse_db,
    ls_estimate,
    make_pilot,
    mmse_estimate,
    pseudo_inverse,
    simulate_pilot_rx,
)
from src.filtering import SirBoundInput, bessel_j0, krasikov_sir_bound, subspace_filter, sum_rate
from src.parallel import derive_seed, make_rng
from src.scenario import ClusterSet, make_ula

logger = logging.getLogger(__name__)

CHECKS: list[tuple[str, Callable[[], None]]] = []


def check(name: str):
    def register(fn: Callable[[], None]) -> Callable[[], None]:
        CHECKS.append((name, fn))
        return fn
    return register


def random_low_rank(rng: np.random.Generator, n: int, rank: int) -> np.ndarray:
    a = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    b = rng.standard_normal((rank, n)) + 1j * rng.standard_normal((rank, n))
    return a @ b


@check("penrose identities")
def penrose_identities() -> None:
    rng = make_rng(7)
    for _ in range(100):
        A = random_low_rank(rng, 50, int(rng.integers(1, 50)))
        X = pseudo_inverse(A)
        scale = np.linalg.norm(A, 2)
        assert_allclose(A @ X @ A, A, atol=1e-8 * scale)
        assert_allclose(X @ A @ X, X, atol=1e-8 * np.linalg.norm(X, 2))
        assert_allclose((A @ X).conj().T, A @ X, atol=1e-8)
        assert_allclose((X @ A).conj().T, X @ A, atol=1e-8)


@check("steering vector modulus")
def steering_modulus() -> None:
    geom = make_ula(64, 0.075, 0.15)
    for theta in np.linspace(0.0, math.pi, 7):
        assert_allclose(np.abs(steering_vector_ula(geom, theta)), 1.0, atol=1e-12)


@check("mmse not worse than ls")
def mmse_beats_ls() -> None:
    geom = make_ula(64, 0.075, 0.15)
    c1 = ClusterSet.from_degrees((45.0, 75.0))
    c2 = ClusterSet.from_degrees((105.0, 135.0))
    R1, R2 = covariance_ula_analytic(geom, c1), covariance_ula_analytic(geom, c2)
    ls, mmse = [], []
    for t in range(200):
        h1 = draw_multipath_channel(geom, c1, 20, 1.0, derive_seed(11, t, 0)).h
        h2 = draw_multipath_channel(geom, c2, 20, 1.0, derive_seed(11, t, 1)).h
        pilot = make_pilot(16, 0.1, derive_seed(11, t, 2))
        Y = simulate_pilot_rx([h1, h2], pilot, derive_seed(11, t, 3))
        ls.append(estimation_mse_db(ls_estimate(Y, pilot).h_hat, h1))
        mmse.append(estimation_mse_db(mmse_estimate(Y, pilot, [R1, R2]).h_hat, h1))
    assert np.mean(mmse) <= np.mean(ls), f"mmse {np.mean(mmse):.2f} dB > ls {np.mean(ls):.2f} dB"


@check("error-free estimation under rank additivity")
def error_free() -> None:
    geom = make_ula(200, 0.075, 0.15)
    Rd = covariance_ula_analytic(geom, ClusterSet.from_degrees((40.0, 60.0)))
    Ri = covariance_ula_analytic(geom, ClusterSet.from_degrees((110.0, 130.0)))
    gap = rank_additivity_gap(Rd, Ri)
    assert abs(gap) <= 2, f"rank gap {gap}"
    Ce = error_covariance_noiseless(Rd, Ri)
    ratio = np.linalg.norm(Ce) / np.linalg.norm(Rd.R)
    assert ratio < 1e-6, f"||Ce||/||Rd|| = {ratio:.2e}"


@check("subspace projector idempotence")
def projector_idempotence() -> None:
    geom = make_ula(100, 0.075, 0.15)
    R = covariance_ula_analytic(geom, ClusterSet.from_degrees((80.0, 100.0)))
    W1 = subspace_filter(R)
    P = W1.conj().T @ W1
    assert_allclose(P @ P, P, atol=1e-9)
    assert_allclose(W1 @ W1.conj().T, np.eye(W1.shape[0]), atol=1e-10)


@check("krasikov bound at one wavelength")
def krasikov_constant() -> None:
    value = krasikov_sir_bound(SirBoundInput(D_u=0.15 + 30.0, r=15.0, wavelength=0.15, M=1))
    assert abs(value - 9.888) < 1e-3, f"got {value}"


@check("bessel j0 against series")
def bessel_series() -> None:
    for x in (0.0, 1.0, 2.404825557695773, 2 * math.pi, 7.5):
        series = sum((-1) ** k * (x / 2) ** (2 * k) / math.factorial(k) ** 2 for k in range(60))
        assert abs(bessel_j0(x) - series) < 1e-10, f"x={x}"


@check("sum rate")
def sum_rate_values() -> None:
    assert sum_rate([1.0, 1.0]) == 2.0
    assert sum_rate([0.0]) == 0.0
    assert sum_rate([3.0]) == 2.0


def run_selftest() -> list[tuple[str, str | None]]:
    """Run every check; returns (name, error message or None)."""
    results = []
    for name, fn in CHECKS:
        try:
            fn()
        except AssertionError as e:
            logger.warning(f"Selftest '{name}' failed: {e}")
            results.append((name, str(e) or "assertion failed"))
        except Exception as e:
            logger.error(f"Selftest '{name}' crashed: {e}", exc_info=True)
            results.append((name, f"{type(e).__name__}: {e}"))
        else:
            results.append((name, None))
    return results
