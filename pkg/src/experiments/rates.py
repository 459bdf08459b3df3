"""
Rate experiments - uplink sum-rate of the four receivers (LS + MRC, MMSE + MRC,
MMSE + MMSE, subspace MRC) with shared pilots, single-cell and 7-cell.
"""
import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from src.channel import draw_one_ring_channel
from src.covariance import CovarianceMatrix, covariance_one_ring
from src.errors import EmptyFilterError
from src.estimation import PilotConfig, make_pilot, mmse_gain, simulate_pilot_rx
from src.experiments.common import calibrated_loss, draw_user_channel, draws_for
from src.experiments.router import Param, RunContext, Router
from src.filtering import (
    MmseCombiner,
    mrc_weights,
    per_cell_rate,
    subspace_filter,
    subspace_mrc_receiver,
    sum_rate,
    uplink_sinr,
)
from src.parallel import derive_seed, map_ordered
from src.results import ResultTable
from src.scenario import make_disk_network, make_hex_network, place_scatterers_ring

logger = logging.getLogger(__name__)
router = Router(name="rates")

METHODS = ("ls_mrc", "mmse_mrc", "mmse_mmse", "subspace_mrc")
NOISE_VAR = 1.0


@dataclass
class Receiver:
    """Per-target receive processing built from known covariances."""

    gain: np.ndarray
    combiner: MmseCombiner
    W1: np.ndarray

    @classmethod
    def build(cls, R_target: CovarianceMatrix, R_others: list[CovarianceMatrix], tau: int,
              threshold: float, min_free: int) -> "Receiver":
        gain, _ = mmse_gain([R_target, *R_others], tau, NOISE_VAR)
        R_int = np.sum([R.R for R in R_others], axis=0)
        try:
            W1 = subspace_filter(R_int, threshold)
        except EmptyFilterError:
            M = R_int.shape[0]
            logger.warning(f"No interference-free subspace; keeping the {min_free} weakest modes")
            W1 = subspace_filter(R_int, threshold, max_rank=max(0, M - min_free))
        return cls(gain=gain, combiner=MmseCombiner(R_int, NOISE_VAR), W1=W1)

    def sinrs(self, Y: np.ndarray, pilot: PilotConfig, channels: list[np.ndarray]) -> list[float]:
        """Target SINR for each method, target channel first in `channels`."""
        z = Y @ pilot.s.conj()
        h_ls = z / pilot.tau
        h_mmse = self.gain @ z
        weights = (
            mrc_weights(h_ls, "mrc_ls"),
            mrc_weights(h_mmse, "mrc_mmse"),
            self.combiner(h_mmse),
            subspace_mrc_receiver(self.W1, Y, pilot),
        )
        return [uplink_sinr(w, channels, NOISE_VAR) for w in weights]


RATE_PARAMS = dict(
    L=Param("float", 500.0),
    r=Param("float", 15.0),
    P=Param("int", 50),
    gamma=Param("float", 2.5),
    snr_db=Param("float", 20.0, "cell-edge SNR with unit noise"),
    tau=Param("int", 16),
    trials=Param("int", 200),
    draws_per_antenna=Param("int", 10),
    min_free=Param("int", 50, "dimensions kept by the subspace filter when interference fills the space"),
)


@router.experiment(
    "sumrate-vs-distance",
    "Uplink sum-rate of two users sharing a pilot vs. their distance, distributed array",
    distance=Param("floats", help="inter-user distances (m)"),
    M=Param("int", 500),
    wavelength=Param("float", 0.6),
    **RATE_PARAMS,
)
def sumrate_vs_distance(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    M, r, P = p["M"], p["r"], p["P"]
    geom = make_disk_network(M, p["L"], p["wavelength"], derive_seed(ctx.seed, 0))
    loss = calibrated_loss(p)
    T = draws_for(M, p["draws_per_antenna"])
    users = [(0.0, 0.0)]
    R1 = covariance_one_ring(geom, users[0], r, P, loss, T, seed=derive_seed(ctx.seed, 1), threads=ctx.threads)
    table = ResultTable(columns=["distance", "method", "sum_rate", "trials"])

    for i, D in enumerate(p["distance"]):
        user2 = (D, 0.0)
        R2 = covariance_one_ring(geom, user2, r, P, loss, T, seed=derive_seed(ctx.seed, 2, i), threads=ctx.threads)
        receivers = [
            Receiver.build(R1, [R2], p["tau"], ctx.rank_threshold, p["min_free"]),
            Receiver.build(R2, [R1], p["tau"], ctx.rank_threshold, p["min_free"]),
        ]

        def trial(t: int, user2=user2, receivers=receivers) -> list[float]:
            s = derive_seed(ctx.seed, 3, i, t)
            h1 = draw_user_channel(geom, users[0], r, P, loss, derive_seed(s, 0))
            h2 = draw_user_channel(geom, user2, r, P, loss, derive_seed(s, 1))
            pilot = make_pilot(p["tau"], NOISE_VAR, derive_seed(s, 2))
            Y = simulate_pilot_rx([h1, h2], pilot, derive_seed(s, 3))
            sinr1 = receivers[0].sinrs(Y, pilot, [h1, h2])
            sinr2 = receivers[1].sinrs(Y, pilot, [h2, h1])
            return [sum_rate([a, b]) for a, b in zip(sinr1, sinr2)]

        rates = np.array(map_ordered(trial, range(p["trials"]), ctx.threads))
        for method, value in zip(METHODS, rates.mean(axis=0)):
            table.add_row(distance=D, method=method, sum_rate=float(value), trials=p["trials"])
        logger.info(f"sumrate-vs-distance: D={D} " + " ".join(f"{m}={v:.2f}" for m, v in zip(METHODS, rates.mean(axis=0))))
    return table


@router.experiment(
    "percell-rate-vs-r",
    "Per-cell uplink rate vs. scattering radius in a 7-cell hexagonal network, one pilot",
    M=Param("int", 100, "antennas per cell"),
    wavelength=Param("float", 0.75),
    user_placement=Param("str", "uniform", "uniform or edge"),
    **{**RATE_PARAMS, "r": Param("floats", help="ring radii (m)")},
)
def percell_rate_vs_r(p: dict[str, Any], ctx: RunContext) -> ResultTable:
    M, P = p["M"], p["P"]
    T = draws_for(M, p["draws_per_antenna"])
    table = ResultTable(columns=["r", "method", "per_cell_rate", "trials"])

    for i, r in enumerate(p["r"]):
        net = make_hex_network(p["L"], M, p["wavelength"], r, P, derive_seed(ctx.seed, 0), p["user_placement"])
        loss = calibrated_loss({**p, "r": r})
        B = net.count
        # R[b][k]: covariance of user k at the array of cell b
        R = [[covariance_one_ring(cell.array, other.user, r, P, loss, T,
                                  seed=derive_seed(ctx.seed, 1, i, b, k), threads=ctx.threads)
              for k, other in enumerate(net.cells)]
             for b, cell in enumerate(net.cells)]
        receivers = [
            Receiver.build(R[b][b], [R[b][k] for k in range(B) if k != b], p["tau"],
                           ctx.rank_threshold, p["min_free"])
            for b in range(B)
        ]

        def trial(t: int, net=net, loss=loss, receivers=receivers) -> list[float]:
            s = derive_seed(ctx.seed, 2, i, t)
            scat = [place_scatterers_ring(cell.user, r, P, derive_seed(s, k, 0)) for k, cell in enumerate(net.cells)]
            pilot = make_pilot(p["tau"], NOISE_VAR, derive_seed(s, B))
            per_method = [[] for _ in METHODS]
            for b, cell in enumerate(net.cells):
                # same phases for user k at every array: one physical channel
                h = [draw_one_ring_channel(cell.array, scat[k], loss, derive_seed(s, k, 1)).h for k in range(B)]
                Y = simulate_pilot_rx(h, pilot, derive_seed(s, B + 1, b))
                ordered = [h[b], *(h[k] for k in range(B) if k != b)]
                for m, sinr in enumerate(receivers[b].sinrs(Y, pilot, ordered)):
                    per_method[m].append(sinr)
            return [per_cell_rate(sinrs, B) for sinrs in per_method]

        rates = np.array(map_ordered(trial, range(p["trials"]), ctx.threads))
        for method, value in zip(METHODS, rates.mean(axis=0)):
            table.add_row(r=r, method=method, per_cell_rate=float(value), trials=p["trials"])
        logger.info(f"percell-rate-vs-r: r={r} " + " ".join(f"{m}={v:.3f}" for m, v in zip(METHODS, rates.mean(axis=0))))
    return table
