"""
Pilot decontamination experiments - LS vs. MMSE estimation MSE under a shared
pilot, swept over the array size and over the inter-user distance.
"""
import logging
from typing import Any

import numpy as np

from src.channel import draw_multipath_channel
from src.covariance import covariance_one_ring, covariance_ula_analytic
from src.estimation import estimation_mse_db, make_pilot, mmse_gain, simulate_pilot_rx
from src.experiments.common import (
    calibrated_loss,
    clusters_from_degrees,
    draw_user_channel,
    draws_for,
    dump_geometry,
    dump_realization,
    linear_array,
    noise_var_for_snr,
)
from src.experiments.router import Param, RunContext, Router
from src.parallel import derive_seed, map_ordered
from src.results import ResultTable
from src.scenario import make_disk_network

logger = logging.getLogger(__name__)
router = Router(name="decontamination")

METHODS = ("ls", "mmse", "ls_interference_free", "mmse_interference_free")
COLUMNS = ["mean_mse_db", "trials"]


def _trial_mse(h1: np.ndarray, h2: np.ndarray, pilot, noise_seed, G: np.ndarray, G_free: np.ndarray) -> list[float]:
    """MSE (dB) of each method for one pilot block; both scenarios share the noise."""
    s_conj = pilot.s.conj()
    z = simulate_pilot_rx([h1, h2], pilot, noise_seed) @ s_conj
    z_free = simulate_pilot_rx([h1], pilot, noise_seed) @ s_conj
    estimates = (z / pilot.tau, G @ z, z_free / pilot.tau, G_free @ z_free)
    return [estimation_mse_db(h_hat, h1) for h_hat in estimates]


def _add_rows(table: ResultTable, x_name: str, x: float, mse: np.ndarray) -> None:
    means = mse.mean(axis=0)
    for method, value in zip(METHODS, means):
        table.add_row(**{x_name: x}, method=method, mean_mse_db=float(value), trials=mse.shape[0])


@router.experiment(
    "pilot-decontamination",
    "Estimation MSE vs. M for a linear array, two users with disjoint AOA clusters and one pilot",
    M=Param("ints", help="antenna counts"),
    array=Param("str", "random", "ula or random"),
    wavelength=Param("float", 0.15),
    spacing=Param("float", 0.075),
    desired=Param("floats", [45.0, 75.0], "target AOA intervals in degrees"),
    interference=Param("floats", [105.0, 135.0], "interferer AOA intervals in degrees"),
    beta_interference=Param("float", 1.0, "interferer power relative to the target"),
    P=Param("int", 50),
    tau=Param("int", 16),
    snr_db=Param("float", 20.0, "cell-edge SNR; target power is 1"),
    trials=Param("int", 200),
)
def pilot_decontamination(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    C1 = clusters_from_degrees(p["desired"], "desired")
    C2 = clusters_from_degrees(p["interference"], "interference")
    noise_var = noise_var_for_snr(p["snr_db"])
    table = ResultTable(columns=["M", "method", *COLUMNS])

    for i, M in enumerate(p["M"]):
        geom = linear_array(p["array"], M, p["spacing"], p["wavelength"], derive_seed(ctx.seed, 0, i))
        R1 = covariance_ula_analytic(geom, C1, 1.0)
        R2 = covariance_ula_analytic(geom, C2, p["beta_interference"])
        G, cond = mmse_gain([R1, R2], p["tau"], noise_var)
        G_free, _ = mmse_gain([R1], p["tau"], noise_var)
        logger.debug(f"pilot-decontamination: M={M} cond={cond:.3g}")
        dump_geometry(ctx, f"geometry-M{M}.csv", geom.positions, array=p["array"], M=M)

        def trial(t: int, geom=geom, G=G, G_free=G_free) -> list[float]:
            s = derive_seed(ctx.seed, 1, i, t)
            h1 = draw_multipath_channel(geom, C1, p["P"], 1.0, derive_seed(s, 0)).h
            h2 = draw_multipath_channel(geom, C2, p["P"], p["beta_interference"], derive_seed(s, 1)).h
            pilot = make_pilot(p["tau"], noise_var, derive_seed(s, 2))
            return _trial_mse(h1, h2, pilot, derive_seed(s, 3), G, G_free)

        mse = np.array(map_ordered(trial, range(p["trials"]), ctx.threads))
        _add_rows(table, "M", M, mse)
        if ctx.dump_dir is not None:
            first = derive_seed(ctx.seed, 1, i, 0)
            h1 = draw_multipath_channel(geom, C1, p["P"], 1.0, derive_seed(first, 0)).h
            dump_realization(ctx, f"channel-M{M}-trial0.csv", h1, M=M, user="target")
        logger.info(f"pilot-decontamination: M={M} ls={mse[:, 0].mean():.2f} dB mmse={mse[:, 1].mean():.2f} dB")
    return table


@router.experiment(
    "mse-vs-distance",
    "Estimation MSE vs. distance between two one-ring users sharing a pilot, distributed array",
    distance=Param("floats", help="inter-user distances (m)"),
    M=Param("int", 500),
    L=Param("float", 500.0, "network radius (m)"),
    r=Param("float", 15.0),
    wavelength=Param("float", 0.6),
    P=Param("int", 50),
    gamma=Param("float", 2.5),
    snr_db=Param("float", 20.0, "cell-edge SNR with unit noise"),
    path_loss=Param("bool", True),
    tau=Param("int", 16),
    trials=Param("int", 200),
    draws_per_antenna=Param("int", 10),
)
def mse_vs_distance(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    M, r, P = p["M"], p["r"], p["P"]
    geom = make_disk_network(M, p["L"], p["wavelength"], derive_seed(ctx.seed, 0))
    loss = calibrated_loss(p)
    T = draws_for(M, p["draws_per_antenna"])
    user1 = (0.0, 0.0)
    R1 = covariance_one_ring(geom, user1, r, P, loss, T, seed=derive_seed(ctx.seed, 1), threads=ctx.threads)
    G_free, _ = mmse_gain([R1], p["tau"], 1.0)
    dump_geometry(ctx, "geometry.csv", geom.positions, kind="disk", M=M)
    table = ResultTable(columns=["distance", "method", *COLUMNS])

    for i, D in enumerate(p["distance"]):
        user2 = (D, 0.0)
        R2 = covariance_one_ring(geom, user2, r, P, loss, T, seed=derive_seed(ctx.seed, 2, i), threads=ctx.threads)
        G, cond = mmse_gain([R1, R2], p["tau"], 1.0)
        logger.debug(f"mse-vs-distance: D={D} cond={cond:.3g}")

        def trial(t: int, user2=user2, G=G) -> list[float]:
            s = derive_seed(ctx.seed, 3, i, t)
            h1 = draw_user_channel(geom, user1, r, P, loss, derive_seed(s, 0))
            h2 = draw_user_channel(geom, user2, r, P, loss, derive_seed(s, 1))
            pilot = make_pilot(p["tau"], 1.0, derive_seed(s, 2))
            return _trial_mse(h1, h2, pilot, derive_seed(s, 3), G, G_free)

        mse = np.array(map_ordered(trial, range(p["trials"]), ctx.threads))
        _add_rows(table, "distance", D, mse)
        logger.info(f"mse-vs-distance: D={D} ls={mse[:, 0].mean():.2f} dB mmse={mse[:, 1].mean():.2f} dB")
    return table
