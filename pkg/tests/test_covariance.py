import logging
import math

import numpy as np
import pytest
from scipy import integrate

from src.channel import NO_PATH_LOSS, draw_multipath_channel
from src.covariance import (
    CovarianceMatrix,
    covariance_monte_carlo,
    covariance_one_ring,
    covariance_ula_analytic,
    default_quadrature_nodes,
    effective_rank,
    projector_overlap,
    rank_additivity_gap,
    rank_bound_distributed,
    rank_bound_random,
    rank_bound_segment,
    rank_bound_span,
    rank_bound_ula,
    signal_subspace,
    zero_covariance,
)
from src.errors import InvalidArgumentError
from src.scenario import ClusterSet, make_disk_network, make_random_linear, make_ula


# --- CovarianceMatrix ---

def test_rejects_non_hermitian():
    with pytest.raises(InvalidArgumentError):
        CovarianceMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InvalidArgumentError):
        CovarianceMatrix(np.ones((2, 3)))


def test_add_keeps_smallest_draw_count():
    a = CovarianceMatrix(np.eye(3), draw_count=100)
    b = CovarianceMatrix(2 * np.eye(3), draw_count=50)
    total = a + b
    np.testing.assert_allclose(total.R, 3 * np.eye(3))
    assert total.draw_count == 50
    with pytest.raises(InvalidArgumentError):
        a + zero_covariance(4)


def test_is_psd():
    assert CovarianceMatrix(np.diag([1.0, 0.0])).is_psd()
    assert not CovarianceMatrix(np.diag([1.0, -0.5])).is_psd()


# --- Analytic covariance ---

def test_analytic_diagonal_and_toeplitz(ula, disjoint_clusters):
    c1, c2 = disjoint_clusters
    R = covariance_ula_analytic(ula, c1, beta=2.5)
    np.testing.assert_allclose(np.diag(R.R).real, 2.5, rtol=1e-12)
    np.testing.assert_allclose(R.R[0, 1], R.R[5, 6], rtol=1e-10)
    assert R.draw_count == 0
    assert R.is_psd()


def test_analytic_matches_direct_integral(ula):
    lo, hi = math.radians(70.0), math.radians(110.0)
    R = covariance_ula_analytic(ula, ClusterSet(((lo, hi),)))
    k = 7  # R[0, 7]
    phase = lambda t: 2 * np.pi * k * ula.spacing * np.cos(t) / ula.wavelength
    re, _ = integrate.quad(lambda t: np.cos(phase(t)), lo, hi)
    im, _ = integrate.quad(lambda t: np.sin(phase(t)), lo, hi)
    expected = (re + 1j * im) / (hi - lo)
    assert R.R[0, k] == pytest.approx(expected, abs=1e-10)


def test_analytic_point_mass_is_rank_one(ula):
    R = covariance_ula_analytic(ula, ClusterSet.from_degrees((60.0, 60.0)))
    assert effective_rank(R).effective_rank == 1


def test_quadrature_node_count(ula):
    n = default_quadrature_nodes(ula, math.radians(30.0))
    assert n % 8 == 0
    assert n >= 8 * math.ceil(ula.count * math.radians(30.0) / math.pi)


def test_analytic_rejects_bad_arguments(ula, disjoint_clusters):
    c1, _ = disjoint_clusters
    with pytest.raises(InvalidArgumentError):
        covariance_ula_analytic(ula, c1, beta=0.0)
    with pytest.raises(InvalidArgumentError):
        covariance_ula_analytic(ula, c1, nodes=1)


# --- Monte Carlo covariance ---

def test_monte_carlo_converges_to_analytic(disjoint_clusters):
    geom = make_ula(16, 0.075, 0.15)
    c1, _ = disjoint_clusters
    R = covariance_ula_analytic(geom, c1)
    R_mc = covariance_monte_carlo(lambda s: draw_multipath_channel(geom, c1, 20, 1.0, s), 4000, seed=5)
    assert R_mc.draw_count == 4000
    rel = np.linalg.norm(R_mc.R - R.R) / np.linalg.norm(R.R)
    assert rel < 0.15


@pytest.mark.slow
def test_monte_carlo_matches_analytic_at_many_draws(disjoint_clusters):
    geom = make_ula(16, 0.075, 0.15)
    c1, _ = disjoint_clusters
    R = covariance_ula_analytic(geom, c1)
    R_mc = covariance_monte_carlo(lambda s: draw_multipath_channel(geom, c1, 20, 1.0, s), 100_000,
                                  seed=6, threads=4)
    assert np.linalg.norm(R_mc.R - R.R) / np.linalg.norm(R.R) < 0.03


@pytest.mark.parametrize("array", ["ula", "random"])
def test_quadrature_converges(disjoint_clusters, array):
    geom = make_ula(64, 0.075, 0.15) if array == "ula" else make_random_linear(100, 0.075, 0.15, seed=2)
    c1, _ = disjoint_clusters
    nodes = default_quadrature_nodes(geom, c1.measure)
    coarse = covariance_ula_analytic(geom, c1, nodes=nodes).R
    fine = covariance_ula_analytic(geom, c1, nodes=2 * nodes).R
    assert np.linalg.norm(fine - coarse) / np.linalg.norm(fine) < 1e-3


def test_monte_carlo_thread_independent(disjoint_clusters):
    geom = make_ula(12, 0.075, 0.15)
    c1, _ = disjoint_clusters

    def sampler(s):
        return draw_multipath_channel(geom, c1, 10, 1.0, s)

    serial = covariance_monte_carlo(sampler, 300, seed=9, threads=1, chunk=32)
    threaded = covariance_monte_carlo(sampler, 300, seed=9, threads=4, chunk=32)
    np.testing.assert_array_equal(serial.R, threaded.R)


def test_monte_carlo_rejects_zero_draws(ula, disjoint_clusters):
    with pytest.raises(InvalidArgumentError):
        covariance_monte_carlo(lambda s: np.ones(ula.count), 0)


def test_one_ring_covariance_diagonal_without_loss():
    geom = make_disk_network(20, 30.0, 0.15, seed=1)
    R = covariance_one_ring(geom, (0.0, 0.0), 2.0, 10, NO_PATH_LOSS, 400, seed=2)
    assert R.draw_count == 400
    # E|h_m|^2 = 1 with unit-modulus paths and random phases
    np.testing.assert_allclose(np.diag(R.R).real, 1.0, atol=0.25)


def test_one_ring_trace_without_loss():
    geom = make_disk_network(40, 30.0, 0.15, seed=3)
    R = covariance_one_ring(geom, (0.0, 0.0), 2.0, 20, NO_PATH_LOSS, 10_000, seed=4, threads=4)
    assert np.trace(R.R).real == pytest.approx(40.0, rel=0.02)


def test_one_ring_rank_non_decreasing_in_radius():
    geom = make_disk_network(100, 50.0, 0.15, seed=5)
    ranks = []
    for i, r in enumerate([0.25, 0.5, 1.0, 2.0]):
        R = covariance_one_ring(geom, (0.0, 0.0), r, 50, NO_PATH_LOSS, 1000, seed=(7, i), threads=4)
        ranks.append(effective_rank(R).effective_rank)
    assert ranks == sorted(ranks)
    assert ranks[0] < ranks[-1] <= 100


def test_one_ring_rejects_unknown_layout():
    geom = make_disk_network(5, 30.0, 0.15, seed=1)
    with pytest.raises(InvalidArgumentError):
        covariance_one_ring(geom, (0.0, 0.0), 2.0, 10, NO_PATH_LOSS, 10, layout="cloud")


# --- Rank ---

def test_effective_rank_threshold():
    R = np.diag([1.0, 1e-3, 1e-6, 0.0])
    report = effective_rank(R, 1e-5)
    assert report.effective_rank == 2
    np.testing.assert_allclose(report.eigenvalues, [1.0, 1e-3, 1e-6, 0.0])
    assert effective_rank(np.zeros((3, 3))).effective_rank == 0
    with pytest.raises(InvalidArgumentError):
        effective_rank(R, 1.5)


def test_effective_rank_warns_on_few_draws(caplog):
    R = CovarianceMatrix(np.eye(4), draw_count=5)
    with caplog.at_level(logging.WARNING, logger="src.covariance"):
        report = effective_rank(R)
    assert report.warning is not None
    assert "rank may be biased" in caplog.text
    assert effective_rank(CovarianceMatrix(np.eye(4), draw_count=40)).warning is None


def test_rank_additivity_gap():
    Rd = np.diag([1.0, 1.0, 0.0, 0.0])
    Ri = np.diag([0.0, 0.0, 1.0, 0.0])
    assert rank_additivity_gap(Rd, Ri) == 0
    assert rank_additivity_gap(Rd, Rd) == -2
    assert rank_additivity_gap(np.zeros((2, 2)), np.zeros((2, 2))) == 0


def test_signal_subspace_and_overlap():
    Rd = np.diag([2.0, 1.0, 0.0, 0.0])
    Ri = np.diag([0.0, 0.0, 1.0, 0.0])
    U = signal_subspace(Rd)
    assert U.shape == (4, 2)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
    assert projector_overlap(Rd, Ri) == pytest.approx(0.0, abs=1e-12)
    assert projector_overlap(Rd, Rd) == pytest.approx(1.0)


def test_overlapping_clusters_share_subspace():
    geom = make_ula(128, 0.075, 0.15)
    Rd = covariance_ula_analytic(geom, ClusterSet.from_degrees((40.0, 60.0)))
    Ri = covariance_ula_analytic(geom, ClusterSet.from_degrees((110.0, 130.0)))
    Ro = covariance_ula_analytic(geom, ClusterSet.from_degrees((50.0, 70.0)))
    overlapping = projector_overlap(Rd, Ro)
    assert overlapping > 0.99
    assert projector_overlap(Rd, Ri) < overlapping


# --- Closed-form bounds ---

def test_ula_bound():
    clusters = ClusterSet.from_degrees((70.0, 110.0))
    expected = 100 * 2 * math.cos(math.radians(70.0)) / 2
    assert rank_bound_ula(clusters, 0.075, 0.15, 100) == pytest.approx(expected)
    assert rank_bound_random(clusters, 0.075, 0.15, 100) == pytest.approx(expected)
    everything = ClusterSet.from_degrees((0.0, 180.0))
    assert rank_bound_ula(everything, 0.15, 0.15, 100) == 100


def test_span_bound():
    assert rank_bound_span(-0.5, 0.5, 0.075, 0.15, 200) == pytest.approx(100.0)
    with pytest.raises(InvalidArgumentError):
        rank_bound_span(0.5, -0.5, 0.075, 0.15, 200)


def test_distributed_and_segment_bounds():
    assert rank_bound_distributed(15.0, 0.15) == pytest.approx(400 * math.pi)
    assert rank_bound_distributed(0.0, 0.15) == 0.0
    assert rank_bound_segment(10.0, 0.15) == pytest.approx(400.0 / 3)
    with pytest.raises(InvalidArgumentError):
        rank_bound_distributed(1.0, 0.0)


def test_ula_rank_follows_bound():
    geom = make_ula(400, 0.075, 0.15)
    clusters = ClusterSet.from_degrees((70.0, 110.0))
    bound = rank_bound_ula(clusters, 0.075, 0.15, 400)
    rank = effective_rank(covariance_ula_analytic(geom, clusters)).effective_rank
    assert abs(rank - bound) / bound <= 0.15


@pytest.mark.parametrize("M", [200, 300, 400])
def test_random_array_rank_follows_bound(M):
    clusters = ClusterSet.from_degrees((70.0, 110.0))
    geom = make_random_linear(M, 0.075, 0.15, seed=1)
    bound = rank_bound_random(clusters, 0.075, 0.15, M)
    assert bound == pytest.approx((math.cos(math.radians(70.0)) - math.cos(math.radians(110.0))) * M / 2)
    rank = effective_rank(covariance_ula_analytic(geom, clusters)).effective_rank
    assert abs(rank - bound) / bound <= 0.10


@pytest.mark.slow
def test_one_ring_rank_grows_like_bound():
    lam = 0.15
    geom = make_disk_network(800, 500.0, lam, seed=1)
    radii = [1.5, 3.0, 6.0]
    ranks = []
    for i, r in enumerate(radii):
        R = covariance_one_ring(geom, (0.0, 0.0), r, 50, NO_PATH_LOSS, 8000, seed=(2, i), threads=4)
        ranks.append(effective_rank(R).effective_rank)
        assert ranks[-1] <= 1.25 * rank_bound_distributed(r, lam)
    slope = np.polyfit(radii, ranks, 1)[0]
    assert slope == pytest.approx(4 * math.pi / lam, rel=0.15)
