"""Brute-force cross-checks run by ``cellfree oracle``."""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from ..network.deployment import (
    NetworkGeometry,
    cluster_aps,
    pairwise_wrap_distance,
    wrap_displacement,
)
from ..network.power_control import solve_maxmin
from ..network.precoding import zf_precoder, zf_residual
from ..network.training import PilotAssignment, build_pilot_book, estimation_stats

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    detail: str


def _partition_cost(points: np.ndarray, labels: np.ndarray, side: float) -> float:
    cost = 0.0
    for label in np.unique(labels):
        members = points[labels == label]
        # wrapped means anchored at every member; the best one is the torus centroid
        centres = [
            np.mod(anchor + wrap_displacement(anchor, members, side).mean(axis=0), side)
            for anchor in members
        ]
        cost += min(
            float(np.sum(pairwise_wrap_distance(members, centre[np.newaxis, :], side) ** 2))
            for centre in centres
        )
    return cost


def exhaustive_two_partition(points: np.ndarray, side: float) -> Tuple[np.ndarray, float]:
    """Minimum within-cluster cost over every split into two non-empty sets."""
    n = len(points)
    best_labels, best_cost = None, np.inf
    for mask in itertools.product((0, 1), repeat=n - 1):
        labels = np.array((0,) + mask)
        if labels.min() == labels.max():
            continue
        cost = _partition_cost(points, labels, side)
        if cost < best_cost:
            best_labels, best_cost = labels, cost
    return best_labels, best_cost


def grid_maxmin(
    gamma: np.ndarray,
    omega: np.ndarray,
    p_ap: float,
    sigma2: float,
    resolution: float = 1e-3,
) -> float:
    """Best min-SINR of two users over a grid of eta in [0, eta_max]^2."""
    eta_max = np.min(1.0 / omega, axis=0)
    steps = int(round(1.0 / resolution)) + 1
    e1, e2 = np.meshgrid(
        np.linspace(0.0, eta_max[0], steps), np.linspace(0.0, eta_max[1], steps)
    )
    eta = np.stack([e1.ravel(), e2.ravel()])
    feasible = np.all(omega @ eta <= 1.0 + 1e-12, axis=0)
    sinr = p_ap * eta / (p_ap * (gamma @ eta) + sigma2)
    return float(np.max(np.min(sinr, axis=0)[feasible]))


def check_zf_identity(seed: int = 0, instances: int = 1000) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(2, 17))
        k = int(rng.integers(1, m + 1))
        g_hat = rng.standard_normal((m, k)) + 1j * rng.standard_normal((m, k))
        worst = max(worst, zf_residual(g_hat, zf_precoder(g_hat).w))
    return OracleResult("zf_identity", worst < 1e-9, f"worst residual {worst:.3e}")


def check_kmeans(seed: int = 0) -> OracleResult:
    side = 1000.0
    rng = np.random.default_rng(seed)
    blobs = np.vstack(
        [
            rng.normal((150.0, 150.0), 20.0, size=(4, 2)),
            rng.normal((650.0, 700.0), 20.0, size=(4, 2)),
        ]
    )
    cases = [
        np.array([[100.0, 100.0], [110.0, 100.0], [900.0, 900.0], [910.0, 900.0]]),
        np.mod(blobs, side),
    ]
    worst = 0.0
    for points in cases:
        geometry = NetworkGeometry(side, points, points[:1].copy(), 2)
        found = cluster_aps(geometry, 2, seed)
        _, best = exhaustive_two_partition(points, side)
        worst = max(worst, found.inertia - best)
    return OracleResult(
        "kmeans_two_partition", worst <= 1e-6, f"excess objective {worst:.3e}"
    )


def check_contamination(seed: int = 0) -> OracleResult:
    rng = np.random.default_rng(seed)
    beta = rng.uniform(0.1, 1.0, size=(3, 5))
    pilots = np.array([0, 1, 0, 1, 1])
    book = build_pilot_book(2)
    p_ms, sigma2 = 0.5, 0.2
    stats = estimation_stats(beta, PilotAssignment(pilots), book, p_ms, sigma2)
    expected = np.empty_like(beta)
    for m in range(3):
        for k in range(5):
            total = sigma2
            for j in range(5):
                phi_j = book.sequences[:, pilots[j]]
                phi_k = book.sequences[:, pilots[k]]
                overlap = abs(np.vdot(phi_j, phi_k)) ** 2
                total += book.tau_p * p_ms * beta[m, j] * overlap
            expected[m, k] = total
    error = float(np.max(np.abs(stats.xi - expected)))
    return OracleResult("pilot_contamination", error < 1e-12, f"max xi error {error:.3e}")


def check_bisection(seed: int = 0, instances: int = 50) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        gamma = rng.uniform(0.0, 0.3, size=(2, 2))
        omega = rng.uniform(1.0, 2.0, size=(3, 2))
        solution = solve_maxmin(gamma, omega, 1.0, 1.0, tol=1e-6)
        worst = max(worst, abs(solution.t_star - grid_maxmin(gamma, omega, 1.0, 1.0)))
    return OracleResult("bisection_vs_grid", worst <= 2e-3, f"max |dt| {worst:.3e}")


ORACLES: List[Callable[[int], OracleResult]] = [
    check_zf_identity,
    check_kmeans,
    check_contamination,
    check_bisection,
]


def run_oracles(seed: int = 0) -> List[OracleResult]:
    results = []
    for oracle in ORACLES:
        result = oracle(seed)
        log = logger.info if result.passed else logger.error
        log(f"{result.name}: {'ok' if result.passed else 'MISMATCH'} ({result.detail})")
        results.append(result)
    return results
