"""Tests for zero-forcing precoders and the Monte-Carlo interference statistics."""

import numpy as np
import pytest

from cellfree_core.core.errors import MonteCarloError, SingularPrecoderError
from cellfree_core.core.seeding import Stream, derive_seed
from cellfree_core.network.channel import draw_small_scale
from cellfree_core.network.deployment import ClusterPartition
from cellfree_core.network.precoding import (
    InterferenceEstimator,
    estimate_gamma,
    estimate_gamma_bar,
    zf_precoder,
    zf_residual,
)
from cellfree_core.network.training import (
    PilotAssignment,
    build_pilot_book,
    estimation_stats,
    estimator_coefficients,
)


def test_identity_channel():
    """Test that the identity channel has the identity precoder."""
    np.testing.assert_allclose(zf_precoder(np.eye(3)).w, np.eye(3), atol=1e-15)


def test_diagonal_channel():
    """Test that a diagonal channel is inverted entrywise."""
    np.testing.assert_allclose(zf_precoder(2.0 * np.eye(2)).w, 0.5 * np.eye(2))


def test_random_instance_residual():
    """Test that a random precoder zero-forces and has minimum norm."""
    rng = np.random.default_rng(0)
    g_hat = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    precoder = zf_precoder(g_hat)
    assert zf_residual(g_hat, precoder.w) < 1e-10
    # minimum-norm inverse lies in the column space of conj(G_hat)
    projector = g_hat.conj() @ np.linalg.pinv(g_hat.conj())
    np.testing.assert_allclose(projector @ precoder.w, precoder.w, atol=1e-12)


def test_more_users_than_aps():
    """Test that more users than APs is singular."""
    with pytest.raises(SingularPrecoderError):
        zf_precoder(np.ones((2, 3)))


def test_rank_deficient_estimate():
    """Test that a rank-deficient estimate is singular."""
    column = np.array([1.0, 2.0, 3.0])
    with pytest.raises(SingularPrecoderError):
        zf_precoder(np.stack([column, 2.0 * column], axis=1))


def test_no_users():
    """Test that no users gives an empty precoder."""
    assert zf_precoder(np.zeros((3, 0))).w.shape == (3, 0)


def test_no_estimation_error_means_no_interference():
    """Test that a noiseless estimate leaves no interference."""
    beta = np.array([[1.0, 0.5], [0.25, 2.0], [1.0, 1.0]])
    book = build_pilot_book(2)
    assignment = PilotAssignment(np.array([0, 1]))
    stats = InterferenceEstimator(n_mc=50).estimate(
        beta, assignment, book, p_ms=1.0, sigma2=0.0, seed=1
    )
    np.testing.assert_allclose(stats.gamma, 0.0, atol=1e-12)
    np.testing.assert_array_equal(stats.signal_gain, np.ones(2))


def test_single_user_gamma_matches_direct_average():
    """Test that gamma and omega match a direct per-draw average."""
    beta = np.array([[1.0], [0.3], [0.7], [0.2]])
    book = build_pilot_book(2)
    assignment = PilotAssignment(np.array([0]))
    p_ms, sigma2, seed = 1.0, 0.5, 3

    gamma, omega = estimate_gamma(
        beta, assignment, book, p_ms, sigma2, n_mc=100, seed=seed
    )

    stats = estimation_stats(beta, assignment, book, p_ms, sigma2)
    coef = estimator_coefficients(beta, stats.xi, 2, p_ms)[:, 0]
    phi = book.sequences[:, 0]
    rng = np.random.default_rng(seed)
    g = np.sqrt(beta[:, 0]) * draw_small_scale(rng, (100, 4, 1))[:, :, 0]
    noise = np.sqrt(sigma2) * draw_small_scale(rng, (100, 4, 2))
    total_gamma = 0.0
    total_power = np.zeros(4)
    for n in range(100):
        received = np.sqrt(2 * p_ms) * np.outer(g[n], phi) + noise[n]
        g_hat = coef * (received @ phi.conj())
        w = g_hat.conj() / np.sum(np.abs(g_hat) ** 2)
        total_gamma += np.sum(stats.error_var[:, 0] * np.abs(w) ** 2)
        total_power += np.abs(w) ** 2

    assert gamma[0, 0] == pytest.approx(total_gamma / 100, rel=1e-9)
    np.testing.assert_allclose(omega[:, 0], total_power / 100, rtol=1e-9)


def test_independent_streams_agree_within_standard_error():
    """Test that two seed streams agree within three combined standard errors."""
    beta = np.array(
        [
            [1.0, 0.1],
            [0.7, 0.2],
            [0.5, 0.1],
            [0.8, 0.3],
            [0.2, 0.9],
            [0.1, 0.6],
            [0.3, 1.0],
            [0.1, 0.5],
        ]
    )
    partition = ClusterPartition(
        ap_to_cpu=np.array([0, 0, 0, 0, 1, 1, 1, 1]),
        user_to_cpu=np.array([0, 1]),
        num_cpus=2,
    )
    book = build_pilot_book(1)
    assignment = PilotAssignment(np.array([0, 0]))
    estimator = InterferenceEstimator(n_mc=10_000, batch_size=2_000)
    first, second = (
        estimator.estimate(
            beta,
            assignment,
            book,
            1.0,
            0.3,
            seed=derive_seed(0, 0, Stream.DESIGN, stream),
            partition=partition,
        )
        for stream in (0, 1)
    )

    gamma_band = 3.0 * np.hypot(first.gamma_se, second.gamma_se)
    assert np.all(np.abs(first.gamma - second.gamma) <= gamma_band)
    bar_band = 3.0 * np.hypot(first.gamma_bar_se, second.gamma_bar_se)
    assert np.all(np.abs(first.gamma_bar - second.gamma_bar) <= bar_band)
    assert np.all(np.diag(first.gamma_se) > 0)
    assert first.gamma_bar_se[0, 1] > 0 and first.gamma_bar_se[1, 0] > 0


def test_omega_predicts_the_transmit_power_per_ap():
    """Test that sum_k omega_mk eta_k matches the simulated E|x_m|^2."""
    beta = np.random.default_rng(21).uniform(0.2, 1.0, size=(8, 2))
    book = build_pilot_book(2)
    assignment = PilotAssignment(np.array([0, 1]))
    p_ms, sigma2, draws = 1.0, 0.3, 40_000
    eta = np.array([0.3, 0.7])
    stats = InterferenceEstimator(n_mc=draws, batch_size=5_000).estimate(
        beta, assignment, book, p_ms, sigma2, seed=5
    )

    xi = estimation_stats(beta, assignment, book, p_ms, sigma2).xi
    coef = estimator_coefficients(beta, xi, 2, p_ms)
    phi = book.columns(assignment.user_to_pilot)
    rng = np.random.default_rng(6)
    g = np.sqrt(beta) * draw_small_scale(rng, (draws, 8, 2))
    noise = np.sqrt(sigma2) * draw_small_scale(rng, (draws, 8, 2))
    g_hat = coef * ((np.sqrt(2 * p_ms) * (g @ phi.T) + noise) @ phi.conj())
    w = np.linalg.pinv(np.swapaxes(g_hat, 1, 2))
    symbols = np.exp(0.5j * np.pi * rng.integers(0, 4, size=(draws, 2)))
    x = w @ (np.sqrt(eta) * symbols)[:, :, np.newaxis]
    transmitted = np.mean(np.abs(x[:, :, 0]) ** 2, axis=0)

    np.testing.assert_allclose(stats.omega @ eta, transmitted, rtol=0.05)


def test_same_seed_gives_identical_statistics():
    """Test that the same seed gives identical statistics."""
    beta = np.random.default_rng(1).uniform(0.2, 1.0, size=(4, 2))
    book = build_pilot_book(2)
    assignment = PilotAssignment(np.array([0, 1]))
    whole = InterferenceEstimator(n_mc=60, batch_size=60).estimate(
        beta, assignment, book, 1.0, 0.3, seed=2
    )
    again = InterferenceEstimator(n_mc=60, batch_size=60).estimate(
        beta, assignment, book, 1.0, 0.3, seed=2
    )
    np.testing.assert_array_equal(whole.gamma, again.gamma)
    np.testing.assert_array_equal(whole.omega, again.omega)


def _block_network():
    beta = np.zeros((6, 4))
    beta[:3, :2] = [[1.0, 0.4], [0.6, 0.9], [0.3, 0.5]]
    beta[3:, 2:] = [[0.8, 0.2], [0.5, 1.0], [0.7, 0.6]]
    partition = ClusterPartition(
        ap_to_cpu=np.array([0, 0, 0, 1, 1, 1]),
        user_to_cpu=np.array([0, 0, 1, 1]),
        num_cpus=2,
    )
    return beta, partition


def test_no_cross_gain_means_no_cross_interference():
    """Test that zero cross gains give zero cross-cluster interference."""
    beta, partition = _block_network()
    book = build_pilot_book(4)
    assignment = PilotAssignment(np.array([0, 1, 2, 3]))
    gamma_bar = estimate_gamma_bar(
        beta, assignment, book, 1.0, 0.2, partition, n_mc=30, seed=0
    )
    np.testing.assert_array_equal(gamma_bar, np.zeros((4, 4)))


def test_cross_interference_only_between_clusters():
    """Test that cross-cluster terms only couple users of different CPUs."""
    beta, partition = _block_network()
    beta = beta + 0.05
    book = build_pilot_book(4)
    assignment = PilotAssignment(np.array([0, 1, 2, 3]))
    stats = InterferenceEstimator(n_mc=30).estimate(
        beta, assignment, book, 1.0, 0.2, seed=0, partition=partition
    )
    same = partition.user_to_cpu[:, None] == partition.user_to_cpu[None, :]
    assert np.all(stats.gamma_bar[same] == 0.0)
    assert np.all(stats.gamma_bar[~same] > 0.0)
    assert np.all(stats.gamma[~same] == 0.0)
    # each CPU only spends power on its own APs
    assert np.all(stats.omega[:3, 2:] == 0.0) and np.all(stats.omega[3:, :2] == 0.0)


def test_single_cpu_has_no_cross_terms():
    """Test that a single CPU has no cross-cluster terms."""
    beta = np.random.default_rng(7).uniform(0.2, 1.0, size=(4, 3))
    book = build_pilot_book(3)
    assignment = PilotAssignment(np.array([0, 1, 2]))
    stats = InterferenceEstimator(n_mc=20).estimate(
        beta, assignment, book, 1.0, 0.2, seed=0
    )
    np.testing.assert_array_equal(stats.gamma_bar, np.zeros((3, 3)))
    np.testing.assert_array_equal(stats.coupling, stats.gamma)


def test_mismatched_normalisation():
    """Test that a halved normalisation scales signal and power by a quarter."""
    beta = np.random.default_rng(8).uniform(0.2, 1.0, size=(4, 2))
    book = build_pilot_book(1)
    assignment = PilotAssignment(np.array([0, 0]))
    true_xi = estimation_stats(beta, assignment, book, 1.0, 0.5).xi
    estimator = InterferenceEstimator(n_mc=40)
    matched = estimator.estimate(beta, assignment, book, 1.0, 0.5, seed=3)
    halved = estimator.estimate(
        beta, assignment, book, 1.0, 0.5, seed=3, xi_used=true_xi / 2.0
    )
    # the estimate doubles, the precoder halves and so does the useful signal
    np.testing.assert_allclose(halved.signal_gain, [0.25, 0.25])
    np.testing.assert_allclose(halved.omega, matched.omega / 4.0)
    np.testing.assert_allclose(halved.gamma, matched.gamma / 4.0, rtol=1e-6, atol=1e-9)


def test_too_many_singular_draws():
    """Test that too many ill-conditioned draws raise MonteCarloError."""
    beta = np.ones((3, 2))
    book = build_pilot_book(2)
    assignment = PilotAssignment(np.array([0, 1]))
    estimator = InterferenceEstimator(n_mc=10, cond_limit=0.5)
    with pytest.raises(MonteCarloError):
        estimator.estimate(beta, assignment, book, 1.0, 0.1, seed=0)


def test_overloaded_scope_is_singular():
    """Test that a scope with more users than APs is singular."""
    beta = np.ones((2, 3))
    book = build_pilot_book(3)
    assignment = PilotAssignment(np.array([0, 1, 2]))
    with pytest.raises(SingularPrecoderError):
        InterferenceEstimator(n_mc=5).estimate(beta, assignment, book, 1.0, 0.1, seed=0)


def test_estimator_rejects_empty_sample():
    """Test that a zero Monte-Carlo sample size is rejected."""
    with pytest.raises(ValueError):
        InterferenceEstimator(n_mc=0)
