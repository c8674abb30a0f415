"""Network layout: random AP/MS drops on a wrap-around square, AP clustering
into CPU domains and user-to-CPU association."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkGeometry:
    """AP and MS positions on an L x L torus."""

    side_length_m: float
    ap_positions: np.ndarray
    ms_positions: np.ndarray
    num_cpus: int = 1

    def __post_init__(self) -> None:
        if self.side_length_m <= 0:
            raise ValueError(f"side_length_m must be positive, got {self.side_length_m}")
        for name in ("ap_positions", "ms_positions"):
            points = getattr(self, name)
            if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 1:
                raise ValueError(f"{name} must be a non-empty (n, 2) array")
            if np.any(points < 0) or np.any(points >= self.side_length_m):
                raise ValueError(f"{name} must lie in [0, {self.side_length_m})")
        if not 1 <= self.num_cpus <= self.num_aps:
            raise ValueError(
                f"num_cpus must be in [1, {self.num_aps}], got {self.num_cpus}"
            )

    @property
    def num_aps(self) -> int:
        return int(self.ap_positions.shape[0])

    @property
    def num_users(self) -> int:
        return int(self.ms_positions.shape[0])

    def ap_ms_distances(self) -> np.ndarray:
        """M x K wrap-around distances between APs and MSs."""
        return pairwise_wrap_distance(
            self.ap_positions, self.ms_positions, self.side_length_m
        )


@dataclass(frozen=True)
class ApClusters:
    """AP side of a cluster partition, as produced by k-means."""

    ap_to_cpu: np.ndarray
    centroids: np.ndarray
    inertia: float
    num_cpus: int


@dataclass(frozen=True)
class ClusterPartition:
    """Disjoint AP clusters plus the exclusive user-to-CPU association."""

    ap_to_cpu: np.ndarray
    user_to_cpu: np.ndarray
    num_cpus: int
    cluster_ap_sets: List[np.ndarray] = field(init=False, repr=False)
    cluster_user_sets: List[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if np.any(self.ap_to_cpu < 0) or np.any(self.ap_to_cpu >= self.num_cpus):
            raise ValueError("ap_to_cpu holds an index outside [0, num_cpus)")
        if np.any(self.user_to_cpu < 0) or np.any(self.user_to_cpu >= self.num_cpus):
            raise ValueError("user_to_cpu holds an index outside [0, num_cpus)")
        aps = [np.flatnonzero(self.ap_to_cpu == d) for d in range(self.num_cpus)]
        users = [np.flatnonzero(self.user_to_cpu == d) for d in range(self.num_cpus)]
        object.__setattr__(self, "cluster_ap_sets", aps)
        object.__setattr__(self, "cluster_user_sets", users)

    @classmethod
    def single(cls, num_aps: int, num_users: int) -> "ClusterPartition":
        """Everything under one CPU (the centralized case)."""
        return cls(
            ap_to_cpu=np.zeros(num_aps, dtype=int),
            user_to_cpu=np.zeros(num_users, dtype=int),
            num_cpus=1,
        )

    @property
    def ap_counts(self) -> np.ndarray:
        """M_d for every CPU."""
        return np.array([len(s) for s in self.cluster_ap_sets], dtype=int)

    @property
    def user_counts(self) -> np.ndarray:
        """K_d for every CPU."""
        return np.array([len(s) for s in self.cluster_user_sets], dtype=int)


def generate_deployment(
    seed: int,
    num_aps: int,
    num_users: int,
    side_length_m: float,
    num_cpus: int = 1,
) -> NetworkGeometry:
    """Drop APs and MSs i.i.d. uniformly on [0, L)^2."""
    if num_aps < 1 or num_users < 1:
        raise ValueError(
            f"num_aps and num_users must be >= 1, got {num_aps} and {num_users}"
        )
    if side_length_m <= 0:
        raise ValueError(f"side_length_m must be positive, got {side_length_m}")

    rng = np.random.default_rng(seed)
    aps = np.mod(rng.uniform(0.0, side_length_m, size=(num_aps, 2)), side_length_m)
    mss = np.mod(rng.uniform(0.0, side_length_m, size=(num_users, 2)), side_length_m)
    return NetworkGeometry(side_length_m, aps, mss, num_cpus)


def wrap_displacement(p: np.ndarray, q: np.ndarray, side_length_m: float) -> np.ndarray:
    """Per-axis signed displacement q - p folded into [-L/2, L/2)."""
    delta = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return np.mod(delta + side_length_m / 2.0, side_length_m) - side_length_m / 2.0


def wrap_distance(p: np.ndarray, q: np.ndarray, side_length_m: float) -> np.ndarray:
    """Torus distance; broadcasts over leading axes, last axis is (x, y)."""
    delta = np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    delta = np.mod(delta, side_length_m)
    delta = np.minimum(delta, side_length_m - delta)
    return np.sqrt(np.sum(delta**2, axis=-1))


def pairwise_wrap_distance(a: np.ndarray, b: np.ndarray, side_length_m: float) -> np.ndarray:
    """len(a) x len(b) matrix of torus distances."""
    return wrap_distance(a[:, np.newaxis, :], b[np.newaxis, :, :], side_length_m)


def _kmeans_plus_plus(
    points: np.ndarray, k: int, side_length_m: float, rng: np.random.Generator
) -> np.ndarray:
    centroids = [points[rng.integers(len(points))]]
    while len(centroids) < k:
        d2 = np.min(
            pairwise_wrap_distance(points, np.array(centroids), side_length_m) ** 2,
            axis=1,
        )
        total = d2.sum()
        if total <= 0.0:
            # all points already coincide with a centroid
            idx = rng.integers(len(points))
        else:
            idx = rng.choice(len(points), p=d2 / total)
        centroids.append(points[idx])
    return np.array(centroids, dtype=float)


def _torus_mean(
    members: np.ndarray, reference: np.ndarray, side_length_m: float
) -> np.ndarray:
    # displacements are unwrapped around the current centroid, which keeps the
    # within-cluster sum of squares non-increasing
    shift = wrap_displacement(reference, members, side_length_m).mean(axis=0)
    return np.mod(reference + shift, side_length_m)


def _lloyd(
    points: np.ndarray,
    centroids: np.ndarray,
    side_length_m: float,
    max_iter: int,
    history: Optional[List[float]] = None,
):
    k = len(centroids)
    labels = np.full(len(points), -1)
    for _ in range(max_iter):
        dist = pairwise_wrap_distance(points, centroids, side_length_m)
        new_labels = np.argmin(dist, axis=1)

        counts = np.bincount(new_labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            own = dist[np.arange(len(points)), new_labels]
            donors = np.flatnonzero(counts[new_labels] > 1)
            far = donors[np.argmax(own[donors])]
            logger.debug(f"Re-seeding empty cluster {empty} at point {far}")
            centroids[empty] = points[far]
            counts[new_labels[far]] -= 1
            new_labels[far] = empty
            counts[empty] = 1
            dist = pairwise_wrap_distance(points, centroids, side_length_m)

        if history is not None:
            history.append(_inertia(points, centroids, new_labels, side_length_m))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centroids[c] = _torus_mean(points[labels == c], centroids[c], side_length_m)
        if history is not None:
            history.append(_inertia(points, centroids, labels, side_length_m))
    return labels, centroids


def _inertia(
    points: np.ndarray, centroids: np.ndarray, labels: np.ndarray, side_length_m: float
) -> float:
    return float(
        np.sum(wrap_distance(points, centroids[labels], side_length_m) ** 2)
    )


def _relabel_by_first_ap(labels: np.ndarray, centroids: np.ndarray):
    order: List[int] = []
    for label in labels:
        if label not in order:
            order.append(int(label))
    mapping = np.empty(len(order), dtype=int)
    mapping[order] = np.arange(len(order))
    return mapping[labels], centroids[order]


def cluster_aps(
    geometry: NetworkGeometry,
    num_cpus: int,
    seed: int,
    restarts: int = 10,
    max_iter: int = 100,
    history: Optional[List[float]] = None,
) -> ApClusters:
    """Split the APs into ``num_cpus`` disjoint clusters with torus k-means.

    k-means++ seeding, ``restarts`` independent runs, best objective kept.
    CPU indices are ordered by the lowest AP index they contain. ``history``
    collects the objective after every assignment and update step of the
    winning run.
    """
    if not 1 <= num_cpus <= geometry.num_aps:
        raise ValueError(f"num_cpus must be in [1, {geometry.num_aps}], got {num_cpus}")

    points = geometry.ap_positions
    side = geometry.side_length_m
    rng = np.random.default_rng(seed)

    best = None
    for restart in range(max(1, restarts)):
        trace: List[float] = []
        init = _kmeans_plus_plus(points, num_cpus, side, rng)
        labels, centroids = _lloyd(points, init, side, max_iter, trace)
        inertia = _inertia(points, centroids, labels, side)
        logger.debug(f"k-means restart {restart}: inertia {inertia:.3f}")
        if best is None or inertia < best[0]:
            best = (inertia, labels, centroids, trace)

    inertia, labels, centroids, trace = best
    if history is not None:
        history.extend(trace)
    labels, centroids = _relabel_by_first_ap(labels, centroids)
    return ApClusters(
        ap_to_cpu=labels, centroids=centroids, inertia=inertia, num_cpus=num_cpus
    )


def associate_users(
    beta: np.ndarray, ap_clusters: ApClusters, scale: str = "linear"
) -> ClusterPartition:
    """Assign every user to the CPU with the largest average large-scale gain.

    ``scale="linear"`` averages beta itself; ``scale="db"`` averages
    10*log10(beta). Ties go to the lowest CPU index.
    """
    if np.any(beta <= 0):
        raise ValueError("beta must be strictly positive")
    if scale == "linear":
        values = beta
    elif scale == "db":
        values = 10.0 * np.log10(beta)
    else:
        raise ValueError(f"Unknown association scale: {scale}")

    averages = np.vstack(
        [
            values[ap_clusters.ap_to_cpu == d].mean(axis=0)
            for d in range(ap_clusters.num_cpus)
        ]
    )
    user_to_cpu = np.argmax(averages, axis=0)
    return ClusterPartition(
        ap_to_cpu=ap_clusters.ap_to_cpu.copy(),
        user_to_cpu=user_to_cpu,
        num_cpus=ap_clusters.num_cpus,
    )
