"""Tests for drops, torus distances, k-means clustering and user association."""

import logging

import numpy as np
import pytest

from cellfree_core.network.deployment import (
    ApClusters,
    ClusterPartition,
    NetworkGeometry,
    _lloyd,
    associate_users,
    cluster_aps,
    generate_deployment,
    wrap_distance,
)


def _geometry(aps, side=1000.0, num_cpus=1):
    aps = np.asarray(aps, dtype=float)
    return NetworkGeometry(side, aps, aps[:1].copy(), num_cpus)


def test_generate_deployment_shapes_and_bounds():
    """Test that a drop has the right shapes and stays inside the square."""
    geometry = generate_deployment(7, 100, 40, 1000.0)
    assert geometry.ap_positions.shape == (100, 2)
    assert geometry.ms_positions.shape == (40, 2)
    for points in (geometry.ap_positions, geometry.ms_positions):
        assert np.all(points >= 0.0) and np.all(points < 1000.0)


def test_generate_deployment_single_point():
    """Test that a drop of one AP and one MS works."""
    geometry = generate_deployment(1, 1, 1, 10.0)
    assert geometry.num_aps == 1 and geometry.num_users == 1
    assert np.all(geometry.ap_positions < 10.0)


def test_generate_deployment_is_deterministic():
    """Test that the same seed gives the same drop."""
    first = generate_deployment(7, 20, 5, 1000.0)
    second = generate_deployment(7, 20, 5, 1000.0)
    np.testing.assert_array_equal(first.ap_positions, second.ap_positions)
    np.testing.assert_array_equal(first.ms_positions, second.ms_positions)


@pytest.mark.parametrize(
    "num_aps,num_users,side", [(0, 3, 10.0), (3, 0, 10.0), (3, 3, 0.0)]
)
def test_generate_deployment_rejects_bad_arguments(num_aps, num_users, side):
    """Test that empty drops and a zero side are rejected."""
    with pytest.raises(ValueError):
        generate_deployment(0, num_aps, num_users, side)


def test_wrap_distance_examples():
    """Test wrap-around distances on hand-checked points."""
    assert wrap_distance(np.array([3.0, 4.0]), np.array([3.0, 4.0]), 1000.0) == 0.0
    assert wrap_distance(np.array([0.0, 0.0]), np.array([999.0, 0.0]), 1000.0) == (
        pytest.approx(1.0)
    )
    assert wrap_distance(
        np.array([100.0, 200.0]), np.array([400.0, 600.0]), 1000.0
    ) == pytest.approx(500.0)


def test_wrap_distance_is_symmetric_and_bounded():
    """Test that torus distance is symmetric and at most half the diagonal."""
    rng = np.random.default_rng(3)
    p = rng.uniform(0, 1000.0, size=(50, 2))
    q = rng.uniform(0, 1000.0, size=(50, 2))
    forward = wrap_distance(p, q, 1000.0)
    np.testing.assert_allclose(forward, wrap_distance(q, p, 1000.0))
    assert np.all(forward <= 1000.0 / np.sqrt(2.0) + 1e-9)


def test_geometry_validates_positions():
    """Test that positions off the square and too few APs are rejected."""
    with pytest.raises(ValueError):
        _geometry([[1000.0, 5.0]])
    with pytest.raises(ValueError):
        _geometry([[1.0, 5.0]], num_cpus=2)


def test_cluster_single_cpu():
    """Test that one CPU takes every AP."""
    geometry = generate_deployment(2, 10, 1, 1000.0)
    clusters = cluster_aps(geometry, 1, seed=0)
    assert np.all(clusters.ap_to_cpu == 0)


def test_cluster_every_ap_alone():
    """Test that as many CPUs as APs gives singleton clusters."""
    geometry = generate_deployment(2, 6, 1, 1000.0)
    clusters = cluster_aps(geometry, 6, seed=0)
    assert sorted(clusters.ap_to_cpu.tolist()) == list(range(6))
    assert clusters.inertia == pytest.approx(0.0, abs=1e-9)


def test_cluster_two_pairs():
    """Test that two separated pairs form two clusters."""
    geometry = _geometry([[100, 100], [110, 100], [900, 900], [910, 900]])
    clusters = cluster_aps(geometry, 2, seed=4)
    assert clusters.ap_to_cpu.tolist() == [0, 0, 1, 1]


def test_cluster_across_the_edge():
    """Test that clustering measures distance across the torus edge."""
    # (5, 500) and (995, 500) are 10 m apart on the torus
    geometry = _geometry([[5, 500], [995, 500], [500, 5], [500, 20]])
    clusters = cluster_aps(geometry, 2, seed=1)
    assert clusters.ap_to_cpu.tolist() == [0, 0, 1, 1]
    assert clusters.inertia == pytest.approx(2 * 25.0 + 2 * 56.25)


def test_cluster_objective_never_increases():
    """Test that the k-means objective never increases between iterations."""
    geometry = generate_deployment(9, 40, 1, 1000.0)
    history = []
    cluster_aps(geometry, 4, seed=2, restarts=3, history=history)
    assert len(history) >= 2
    assert np.all(np.diff(history) <= 1e-6)


def test_cluster_labels_ordered_by_first_ap():
    """Test that CPU labels are numbered by their first AP."""
    geometry = generate_deployment(5, 30, 1, 1000.0)
    labels = cluster_aps(geometry, 3, seed=8).ap_to_cpu
    _, first = np.unique(labels, return_index=True)
    assert labels[0] == 0
    assert np.all(np.diff(first) > 0)


def test_lloyd_reseeds_an_empty_cluster(caplog):
    """Test that a cluster left empty takes the point farthest from its centroid."""
    points = np.array([[100.0, 100.0], [110.0, 100.0], [120.0, 100.0]])
    centroids = np.array([[110.0, 100.0], [110.0, 100.0]])

    with caplog.at_level(logging.DEBUG, logger="cellfree_core.network.deployment"):
        labels, centroids = _lloyd(points, centroids, 1000.0, max_iter=10)

    assert labels.tolist() == [1, 0, 0]
    np.testing.assert_allclose(centroids, [[115.0, 100.0], [100.0, 100.0]])
    assert "Re-seeding empty cluster 1 at point 0" in caplog.text


def test_cluster_coincident_aps_leaves_no_cpu_empty():
    """Test that every CPU gets an AP even when all APs share one position."""
    geometry = _geometry([[300.0, 300.0]] * 3, num_cpus=2)
    clusters = cluster_aps(geometry, 2, seed=4, restarts=2)
    assert sorted(set(clusters.ap_to_cpu.tolist())) == [0, 1]
    assert clusters.inertia == pytest.approx(0.0)


def test_cluster_rejects_too_many_cpus():
    """Test that more CPUs than APs is rejected."""
    geometry = generate_deployment(5, 3, 1, 1000.0)
    with pytest.raises(ValueError):
        cluster_aps(geometry, 4, seed=0)


def _clusters(ap_to_cpu, num_cpus):
    ap_to_cpu = np.asarray(ap_to_cpu)
    return ApClusters(ap_to_cpu, np.zeros((num_cpus, 2)), 0.0, num_cpus)


def test_associate_single_cpu():
    """Test that a single CPU serves every user."""
    beta = np.random.default_rng(0).uniform(0.1, 1.0, size=(4, 3))
    partition = associate_users(beta, _clusters([0, 0, 0, 0], 1))
    assert partition.user_to_cpu.tolist() == [0, 0, 0]


def test_associate_largest_average_gain():
    """Test that a user joins the CPU with the largest mean gain."""
    beta = np.array([[1.0], [1.0], [0.1]])
    partition = associate_users(beta, _clusters([0, 0, 1], 2))
    assert partition.user_to_cpu.tolist() == [0]


def test_associate_tie_goes_to_lower_cpu():
    """Test that a tie goes to the lower CPU index."""
    beta = np.array([[0.5], [0.5]])
    partition = associate_users(beta, _clusters([1, 0], 2))
    assert partition.user_to_cpu.tolist() == [0]


def test_associate_db_scale_can_differ():
    """Test that the linear and dB averages can pick different CPUs."""
    # linear mean favours the single strong AP, the dB mean does not
    beta = np.array([[1.0], [1e-6], [1e-2], [1e-2]])
    clusters = _clusters([0, 0, 1, 1], 2)
    assert associate_users(beta, clusters, "linear").user_to_cpu.tolist() == [0]
    assert associate_users(beta, clusters, "db").user_to_cpu.tolist() == [1]


def test_partition_sets_are_disjoint_and_complete():
    """Test that the partition covers every AP exactly once."""
    partition = ClusterPartition(
        ap_to_cpu=np.array([1, 0, 1, 0, 2]),
        user_to_cpu=np.array([2, 2, 0]),
        num_cpus=3,
    )
    assert partition.ap_counts.tolist() == [2, 2, 1]
    assert partition.user_counts.tolist() == [1, 0, 2]
    aps = np.concatenate(partition.cluster_ap_sets)
    assert sorted(aps.tolist()) == list(range(5))


def test_partition_rejects_out_of_range_cpu():
    """Test that a CPU index out of range is rejected."""
    with pytest.raises(ValueError):
        ClusterPartition(np.array([0, 2]), np.array([0]), num_cpus=2)
