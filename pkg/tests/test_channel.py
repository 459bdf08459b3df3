import math

import numpy as np
import pytest

from src.channel import (
    NO_PATH_LOSS,
    PathLossModel,
    alpha_for_cell_edge_snr,
    draw_multipath_channel,
    draw_one_ring_channel,
    draw_single_path_channel,
    path_loss,
    steering_matrix,
    steering_vector_positions,
    steering_vector_ula,
)
from src.errors import DegenerateGeometryError, InvalidArgumentError
from src.parallel import derive_seed
from src.scenario import (
    ArrayGeometry,
    ClusterSet,
    ScattererSet,
    make_disk_network,
    make_random_linear,
    make_ula,
    place_scatterers_ring,
)


def test_steering_vector_unit_modulus(ula):
    for theta in np.linspace(0.0, math.pi, 9):
        a = steering_vector_ula(ula, theta)
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)
        assert a[0] == pytest.approx(1.0)


def test_broadside_is_all_ones(ula):
    np.testing.assert_allclose(steering_vector_ula(ula, math.pi / 2), np.ones(ula.count), atol=1e-12)


def test_steering_vector_phase_progression(ula):
    theta = math.radians(60.0)
    a = steering_vector_ula(ula, theta)
    step = np.exp(-2j * np.pi * ula.spacing * math.cos(theta) / ula.wavelength)
    np.testing.assert_allclose(a[1:] / a[:-1], step)


def test_position_steering_matches_ula(ula):
    theta = 1.1
    np.testing.assert_allclose(steering_vector_positions(ula, theta), steering_vector_ula(ula, theta))


def test_steering_matrix_columns(ula):
    thetas = np.array([0.3, 1.2, 2.5])
    A = steering_matrix(ula, thetas)
    assert A.shape == (ula.count, 3)
    for k, theta in enumerate(thetas):
        np.testing.assert_allclose(A[:, k], steering_vector_ula(ula, theta))


def test_ula_steering_rejects_other_arrays():
    geom = make_random_linear(8, 0.075, 0.15, seed=1)
    with pytest.raises(InvalidArgumentError):
        steering_vector_ula(geom, 1.0)
    disk = make_disk_network(8, 10.0, 0.15, seed=1)
    with pytest.raises(InvalidArgumentError):
        steering_matrix(disk, np.array([1.0]))


def test_multipath_single_path_scaling(ula):
    clusters = ClusterSet.from_degrees((60.0, 60.0))
    ch = draw_multipath_channel(ula, clusters, 1, 4.0, seed=1, phases=np.array([0.0]))
    np.testing.assert_allclose(ch.h, 2.0 * steering_vector_ula(ula, math.radians(60.0)))


def test_multipath_reproducible(ula, disjoint_clusters):
    c1, _ = disjoint_clusters
    a = draw_multipath_channel(ula, c1, 20, 1.0, seed=(4, 2)).h
    b = draw_multipath_channel(ula, c1, 20, 1.0, seed=(4, 2)).h
    c = draw_multipath_channel(ula, c1, 20, 1.0, seed=(4, 3)).h
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_multipath_rejects_bad_arguments(ula, disjoint_clusters):
    c1, _ = disjoint_clusters
    with pytest.raises(InvalidArgumentError):
        draw_multipath_channel(ula, c1, 0, 1.0, seed=1)
    with pytest.raises(InvalidArgumentError):
        draw_multipath_channel(ula, c1, 5, 0.0, seed=1)


def test_path_loss_values():
    loss = PathLossModel(alpha=2.0, gamma=2.0)
    assert path_loss(3.0, 1.0, loss) == pytest.approx(2.0 / 16.0)
    np.testing.assert_allclose(path_loss(np.array([1.0, 3.0]), 1.0, loss), [0.5, 0.125])
    assert path_loss(3.0, 1.0, NO_PATH_LOSS) == 1.0
    with pytest.raises(InvalidArgumentError):
        path_loss(0.0, 0.0, loss)
    with pytest.raises(InvalidArgumentError):
        PathLossModel(alpha=-1.0)


def test_cell_edge_calibration():
    alpha = alpha_for_cell_edge_snr(20.0, 500.0, 15.0, 2.5)
    loss = PathLossModel(alpha=alpha, gamma=2.5)
    assert path_loss(500.0, 15.0, loss) == pytest.approx(100.0)


def test_one_ring_structure():
    geom = make_disk_network(40, 50.0, 0.15, seed=1)
    scat = place_scatterers_ring((0.0, 0.0), 5.0, 12, seed=2)
    ch = draw_one_ring_channel(geom, scat, NO_PATH_LOSS, seed=3, user=1)
    assert ch.per_path.shape == (12, 40)
    np.testing.assert_allclose(np.abs(ch.per_path), 1.0)
    np.testing.assert_allclose(ch.h, ch.per_path.sum(axis=0) / math.sqrt(12))
    assert ch.user == 1
    assert ch.count == 40


def test_one_ring_phase_includes_ring_radius():
    geom = ArrayGeometry(np.array([[10.0, 0.0]]), 1.0, "disk")
    scat = ScattererSet(center=(0.0, 0.0), ring_radius=0.25, scatterers=np.array([[0.0, 0.0]]))
    ch = draw_one_ring_channel(geom, scat, NO_PATH_LOSS, seed=0, phases=np.array([0.0]))
    # path length 10.25 wavelengths
    assert ch.h[0] == pytest.approx(np.exp(-2j * np.pi * 10.25))


def test_one_ring_with_path_loss_amplitude():
    geom = ArrayGeometry(np.array([[4.0, 0.0]]), 0.5, "disk")
    scat = ScattererSet(center=(0.0, 0.0), ring_radius=1.0, scatterers=np.array([[0.0, 0.0]]))
    loss = PathLossModel(alpha=25.0, gamma=2.0)
    ch = draw_one_ring_channel(geom, scat, loss, seed=0)
    assert abs(ch.h[0]) == pytest.approx(1.0)


def test_antenna_on_scatterer_is_degenerate():
    geom = ArrayGeometry(np.array([[0.0, 0.0], [1.0, 0.0]]), 0.15, "disk")
    scat = ScattererSet(center=(0.0, 0.0), ring_radius=1.0, scatterers=np.array([[0.0, 0.0]]))
    with pytest.raises(DegenerateGeometryError):
        draw_one_ring_channel(geom, scat, PathLossModel(), seed=0)


def test_single_path_vector():
    geom = make_disk_network(25, 20.0, 0.15, seed=5)
    h = draw_single_path_channel(geom, (1.0, 2.0), 3.0, NO_PATH_LOSS, phase=0.5)
    assert h.shape == (25,)
    d = np.hypot(geom.positions[:, 0] - 1.0, geom.positions[:, 1] - 2.0)
    np.testing.assert_allclose(h, np.exp(-2j * np.pi * (d + 3.0) / 0.15) * np.exp(0.5j))


# --- Monte Carlo moments ---

DRAWS = 10_000


def test_multipath_energy_is_beta_m(ula, disjoint_clusters):
    c1, _ = disjoint_clusters
    energy = [np.vdot(h, h).real for h in
              (draw_multipath_channel(ula, c1, 20, 2.0, derive_seed(1, t)).h for t in range(DRAWS))]
    assert np.mean(energy) == pytest.approx(2.0 * ula.count, rel=0.02)


def test_one_ring_energy_without_loss():
    geom = make_disk_network(40, 30.0, 0.15, seed=2)
    energy = []
    for t in range(DRAWS):
        scat = place_scatterers_ring((0.0, 0.0), 2.0, 20, derive_seed(3, t, 0))
        h = draw_one_ring_channel(geom, scat, NO_PATH_LOSS, derive_seed(3, t, 1)).h
        energy.append(np.vdot(h, h).real)
    assert np.mean(energy) == pytest.approx(40.0, rel=0.02)


def test_users_with_independent_seeds_are_uncorrelated(disjoint_clusters):
    geom = make_ula(8, 0.075, 0.15)
    c1, _ = disjoint_clusters
    H1 = np.array([draw_multipath_channel(geom, c1, 20, 1.0, derive_seed(4, t, 0)).h for t in range(DRAWS)])
    H2 = np.array([draw_multipath_channel(geom, c1, 20, 1.0, derive_seed(4, t, 1)).h for t in range(DRAWS)])
    cross = H1.T @ H2.conj() / DRAWS
    assert np.max(np.abs(cross)) < 5 / math.sqrt(DRAWS)


def test_phases_invariant_under_common_scaling():
    scale = 2.5
    geom = make_disk_network(30, 40.0, 0.15, seed=5)
    scat = place_scatterers_ring((3.0, -1.0), 2.0, 12, seed=6)
    big_geom = ArrayGeometry(geom.positions * scale, geom.wavelength * scale, "disk")
    big_scat = ScattererSet(center=(3.0 * scale, -1.0 * scale), ring_radius=2.0 * scale,
                            scatterers=scat.scatterers * scale)
    h = draw_one_ring_channel(geom, scat, NO_PATH_LOSS, seed=7).h
    h_big = draw_one_ring_channel(big_geom, big_scat, NO_PATH_LOSS, seed=7).h
    np.testing.assert_allclose(h_big, h, atol=1e-8)

    ula, big_ula = make_ula(16, 0.075, 0.15), make_ula(16, 0.075 * scale, 0.15 * scale)
    for theta in (0.3, 1.2, 2.9):
        np.testing.assert_allclose(steering_vector_ula(big_ula, theta), steering_vector_ula(ula, theta), atol=1e-12)
