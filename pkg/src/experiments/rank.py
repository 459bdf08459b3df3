"""
Rank experiments - effective covariance rank against the closed-form bounds
for linear arrays, one-ring scattering and a line of scatterers.
"""
import logging
import math
from typing import Any

from src.channel import NO_PATH_LOSS, draw_multipath_channel
from src.covariance import (
    covariance_monte_carlo,
    covariance_one_ring,
    covariance_ula_analytic,
    effective_rank,
    rank_bound_distributed,
    rank_bound_random,
    rank_bound_segment,
    rank_bound_ula,
)
from src.errors import ConfigError
from src.experiments.common import clusters_from_degrees, draws_for, dump_geometry, dump_spectrum, linear_array
from src.experiments.router import Param, RunContext, Router
from src.parallel import derive_seed
from src.results import ResultTable
from src.scenario import make_disk_network

logger = logging.getLogger(__name__)
router = Router(name="rank")


def _relative_error(rank: int, bound: float) -> float:
    """|rank - bound| / bound; a zero bound (point-mass clusters) gives 0 or inf."""
    if bound > 0:
        return abs(rank - bound) / bound
    return 0.0 if rank == 0 else math.inf


@router.experiment(
    "rank-vs-m",
    "Effective rank of a linear-array covariance vs. M, against the closed-form model",
    M=Param("ints", help="antenna counts"),
    array=Param("str", "random", "ula or random"),
    wavelength=Param("float", 0.15),
    spacing=Param("float", 0.075, "ULA spacing or mean random spacing (m)"),
    clusters=Param("floats", [70.0, 110.0], "AOA intervals in degrees, min,max pairs"),
    beta=Param("float", 1.0),
    covariance=Param("str", "analytic", "analytic or monte_carlo"),
    P=Param("int", 50, "paths per draw (monte_carlo only)"),
    draws_per_antenna=Param("int", 10, "monte_carlo only"),
)
def rank_vs_m(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    clusters = clusters_from_degrees(p["clusters"], "clusters")
    bound_fn = rank_bound_ula if p["array"] == "ula" else rank_bound_random
    table = ResultTable(columns=["M", "effective_rank", "bound", "relative_error"])

    for i, M in enumerate(p["M"]):
        geom = linear_array(p["array"], M, p["spacing"], p["wavelength"], derive_seed(ctx.seed, 0, i))
        if p["covariance"] == "analytic":
            R = covariance_ula_analytic(geom, clusters, p["beta"])
        elif p["covariance"] == "monte_carlo":
            def sampler(s, geom=geom):
                return draw_multipath_channel(geom, clusters, p["P"], p["beta"], s)
            R = covariance_monte_carlo(sampler, draws_for(M, p["draws_per_antenna"]),
                                       seed=derive_seed(ctx.seed, 1, i), threads=ctx.threads)
        else:
            raise ConfigError(f"covariance must be 'analytic' or 'monte_carlo', got {p['covariance']!r}",
                              key="covariance")

        bound = bound_fn(clusters, p["spacing"], p["wavelength"], M)
        report = effective_rank(R, ctx.rank_threshold, bound=bound)
        dump_geometry(ctx, f"geometry-M{M}.csv", geom.positions, array=p["array"], M=M)
        dump_spectrum(ctx, f"spectrum-M{M}.csv", report.eigenvalues, M=M)
        table.add_row(M=M, effective_rank=report.effective_rank, bound=bound,
                      relative_error=_relative_error(report.effective_rank, bound))
        logger.info(f"rank-vs-m: M={M} rank={report.effective_rank} bound={bound:.1f}")
    return table


@router.experiment(
    "rank-vs-r",
    "Effective rank of a distributed-array one-ring covariance vs. scattering radius",
    r=Param("floats", help="ring radii (m)"),
    M=Param("int", 800),
    L=Param("float", 500.0, "network radius (m)"),
    wavelength=Param("float", 0.15),
    P=Param("int", 50),
    user_x=Param("float", 0.0),
    user_y=Param("float", 0.0),
    draws_per_antenna=Param("int", 10),
)
def rank_vs_r(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    M = p["M"]
    geom = make_disk_network(M, p["L"], p["wavelength"], derive_seed(ctx.seed, 0))
    user = (p["user_x"], p["user_y"])
    T = draws_for(M, p["draws_per_antenna"])
    table = ResultTable(columns=["r", "effective_rank", "bound", "capped_bound", "draws"])
    dump_geometry(ctx, "geometry.csv", geom.positions, kind="disk", M=M)

    for i, r in enumerate(p["r"]):
        R = covariance_one_ring(geom, user, r, p["P"], NO_PATH_LOSS, T,
                                seed=derive_seed(ctx.seed, 1, i), threads=ctx.threads)
        bound = rank_bound_distributed(r, p["wavelength"])
        report = effective_rank(R, ctx.rank_threshold, bound=bound)
        dump_spectrum(ctx, f"spectrum-r{r:g}.csv", report.eigenvalues, r=r)
        table.add_row(r=r, effective_rank=report.effective_rank, bound=bound,
                      capped_bound=min(float(M), bound), draws=T)
        logger.info(f"rank-vs-r: r={r} rank={report.effective_rank} bound={bound:.1f}")
    return table


@router.experiment(
    "segment-rank",
    "Effective rank when the scatterers lie on a line segment, against 2 L / lambda",
    length=Param("floats", help="segment lengths (m)"),
    M=Param("int", 800),
    L=Param("float", 500.0, "network radius (m)"),
    wavelength=Param("float", 0.15),
    P=Param("int", 50),
    draws_per_antenna=Param("int", 10),
)
def segment_rank(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    M = p["M"]
    geom = make_disk_network(M, p["L"], p["wavelength"], derive_seed(ctx.seed, 0))
    T = draws_for(M, p["draws_per_antenna"])
    table = ResultTable(columns=["length", "effective_rank", "bound", "draws"])
    dump_geometry(ctx, "geometry.csv", geom.positions, kind="disk", M=M)

    for i, length in enumerate(p["length"]):
        R = covariance_one_ring(geom, (0.0, 0.0), 0.0, p["P"], NO_PATH_LOSS, T,
                                seed=derive_seed(ctx.seed, 1, i), threads=ctx.threads,
                                layout="segment", segment_length=length)
        bound = rank_bound_segment(length, p["wavelength"])
        report = effective_rank(R, ctx.rank_threshold, bound=bound)
        dump_spectrum(ctx, f"spectrum-length{length:g}.csv", report.eigenvalues, length=length)
        table.add_row(length=length, effective_rank=report.effective_rank, bound=bound, draws=T)
        logger.info(f"segment-rank: length={length} rank={report.effective_rank} bound={bound:.1f}")
    return table
