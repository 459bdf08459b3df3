"""
Correlation experiments - scattering-path correlation vs. the Bessel limit,
the path loss correlation sigma^2(D) and the cross-correlation limit law.
"""
import logging
from typing import Any

import numpy as np
from scipy import stats

from src.channel import NO_PATH_LOSS, PathLossModel, draw_single_path_channel
from src.experiments.router import Param, RunContext, Router
from src.filtering import (
    KRASIKOV_X_MIN,
    bessel_j0,
    crosscorr_limit_samples,
    exponential_ks,
    krasikov_envelope,
    path_correlation,
    sigma_sq,
    sigma_sq_monte_carlo,
)
from src.parallel import derive_seed, map_ordered
from src.results import ResultTable
from src.scenario import make_disk_network

logger = logging.getLogger(__name__)
router = Router(name="correlation")


def _envelope(x: float) -> float:
    """Upper bound on |J0(x)|: the envelope where defined, 1 elsewhere."""
    return min(1.0, krasikov_envelope(x)) if x > KRASIKOV_X_MIN else 1.0


@router.experiment(
    "path-correlation",
    "Normalized correlation of two scattering paths vs. scatterer spacing, against |J0|",
    M=Param("ints", help="antenna counts"),
    L=Param("float", 500.0, "network radius (m)"),
    wavelength=Param("float", 0.15),
    r=Param("float", 15.0),
    d_max=Param("float", 3.0, "largest spacing in wavelengths"),
    d_step=Param("float", 0.05, "spacing step in wavelengths"),
    path_loss=Param("bool", False),
    gamma=Param("float", 2.5),
    trials=Param("int", 1, "antenna layouts averaged per point"),
)
def path_correlation_sweep(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    lam = p["wavelength"]
    loss = PathLossModel(alpha=1.0, gamma=p["gamma"]) if p["path_loss"] else NO_PATH_LOSS
    grid = np.round(np.arange(0.0, p["d_max"] + p["d_step"] / 2, p["d_step"]), 12)
    table = ResultTable(columns=["M", "d_over_lambda", "correlation", "bessel", "envelope", "trials"])

    for i, M in enumerate(p["M"]):
        def layout(t: int, M=M) -> np.ndarray:
            geom = make_disk_network(M, p["L"], lam, derive_seed(ctx.seed, i, t))
            out = []
            for d in grid:
                half = d * lam / 2
                h1p = draw_single_path_channel(geom, (-half, 0.0), p["r"], loss)
                h2q = draw_single_path_channel(geom, (half, 0.0), p["r"], loss)
                out.append(path_correlation(h1p, h2q))
            return np.array(out)

        corr = np.mean(map_ordered(layout, range(p["trials"]), ctx.threads), axis=0)
        for d, c in zip(grid, corr):
            x = 2 * np.pi * d
            table.add_row(M=M, d_over_lambda=float(d), correlation=float(c), bessel=abs(bessel_j0(x)),
                          envelope=_envelope(x), trials=p["trials"])
        rms = float(np.sqrt(np.mean((corr - np.abs(bessel_j0(2 * np.pi * grid))) ** 2)))
        logger.info(f"path-correlation: M={M} RMS deviation from |J0| = {rms:.4f}")
    return table


@router.experiment(
    "sigma-sq",
    "Path loss correlation sigma^2(D) by quadrature, checked against Monte Carlo",
    D=Param("floats", help="scatterer distances (m)"),
    L=Param("float", 500.0),
    r=Param("float", 15.0),
    alpha=Param("float", 1e7),
    gamma=Param("float", 2.5),
    mode=Param("str", "first_principles", "first_principles (alpha^2) or printed (alpha)"),
    samples=Param("int", 1_000_000, "Monte Carlo antenna positions per point"),
)
def sigma_sq_sweep(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    table = ResultTable(columns=["D", "sigma_sq", "monte_carlo", "monte_carlo_stderr", "relative_difference"])
    for i, D in enumerate(p["D"]):
        value = sigma_sq(D, p["L"], p["r"], p["alpha"], p["gamma"], p["mode"])
        mc, se = sigma_sq_monte_carlo(D, p["L"], p["r"], p["alpha"], p["gamma"], p["samples"],
                                      derive_seed(ctx.seed, i), p["mode"])
        table.add_row(D=D, sigma_sq=value, monte_carlo=mc, monte_carlo_stderr=se,
                      relative_difference=abs(mc - value) / value)
        logger.info(f"sigma-sq: D={D} quadrature={value:.6g} monte_carlo={mc:.6g}")
    return table


@router.experiment(
    "crosscorr-dist",
    "Distribution of |h2q^H h1p|^2 / (sigma^2 M) against a mean-fitted exponential",
    M=Param("int", help="antenna count"),
    L=Param("float", 500.0),
    D_pq=Param("float", 100.0, "scatterer distance (m)"),
    r=Param("float", 15.0),
    wavelength=Param("float", 0.15),
    alpha=Param("float", 1.0),
    gamma=Param("float", 2.5),
    trials=Param("int", 1000),
)
def crosscorr_dist(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    loss = PathLossModel(alpha=p["alpha"], gamma=p["gamma"])
    samples = crosscorr_limit_samples(p["M"], p["L"], p["D_pq"], p["r"], p["wavelength"], loss,
                                      p["trials"], seed=ctx.seed, threads=ctx.threads)
    statistic, mean = exponential_ks(samples)
    ordered = np.sort(samples)
    n = ordered.size
    fitted = stats.expon.cdf(ordered, scale=mean)

    table = ResultTable(columns=["index", "sample", "empirical_cdf", "fitted_cdf"])
    for k, (value, cdf) in enumerate(zip(ordered, fitted)):
        table.add_row(index=k, sample=float(value), empirical_cdf=(k + 1) / n, fitted_cdf=float(cdf))
    table.metadata["ks_statistic"] = format(statistic, ".17g")
    table.metadata["fitted_mean"] = format(mean, ".17g")
    logger.info(f"crosscorr-dist: M={p['M']} KS={statistic:.4f} fitted mean={mean:.4f}")
    return table
