"""Uplink training: DFT pilot book, pilot allocation, pilot reception and
MMSE channel estimation."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import dft

from .channel import ChannelRealization, draw_small_scale
from .deployment import ClusterPartition

logger = logging.getLogger(__name__)

GLOBAL_SCOPE = "global"
PER_CPU_SCOPE = "per_cpu"


@dataclass(frozen=True)
class PilotBook:
    """tau_p orthonormal pilots, one per column."""

    tau_p: int
    sequences: np.ndarray

    def columns(self, pilots: np.ndarray) -> np.ndarray:
        """tau_p x len(pilots) matrix of the selected sequences."""
        return self.sequences[:, pilots]


@dataclass(frozen=True)
class PilotAssignment:
    """Pilot index per user and the scope the allocation was computed in."""

    user_to_pilot: np.ndarray
    scope: str = GLOBAL_SCOPE

    @property
    def num_users(self) -> int:
        return int(len(self.user_to_pilot))

    def subset(self, users: np.ndarray) -> "PilotAssignment":
        return PilotAssignment(self.user_to_pilot[users], self.scope)

    def overlap(self, book: PilotBook) -> np.ndarray:
        """K x K matrix of |phi_k'^H phi_k|^2 (row k', column k)."""
        phi = book.columns(self.user_to_pilot)
        return np.abs(phi.conj().T @ phi) ** 2


@dataclass(frozen=True)
class EstimationStats:
    """MMSE statistics: xi, alpha = Var(g_hat) and the error variance."""

    xi: np.ndarray
    alpha: np.ndarray
    error_var: np.ndarray


def build_pilot_book(tau_p: int) -> PilotBook:
    """Columns of the unit-norm tau_p x tau_p DFT matrix."""
    if tau_p < 1:
        raise ValueError(f"tau_p must be >= 1, got {tau_p}")
    return PilotBook(tau_p=tau_p, sequences=dft(tau_p) / np.sqrt(tau_p))


def _fingerprint_allocation(
    fingerprints: np.ndarray, tau_p: int, rng: np.random.Generator
) -> np.ndarray:
    """Greedy max-min fingerprint distance; fingerprints is n_users x n_features."""
    num_users = fingerprints.shape[0]
    pilots = np.full(num_users, -1, dtype=int)
    members: List[List[int]] = [[] for _ in range(tau_p)]

    for rank, user in enumerate(rng.permutation(num_users)):
        if rank < tau_p:
            choice = rank
        else:
            separation = np.array(
                [
                    np.min(
                        np.linalg.norm(
                            fingerprints[group] - fingerprints[user], axis=1
                        )
                    )
                    for group in members
                ]
            )
            choice = int(np.argmax(separation))
        pilots[user] = choice
        members[choice].append(int(user))
    return pilots


def _random_allocation(num_users: int, tau_p: int, rng: np.random.Generator) -> np.ndarray:
    if num_users <= tau_p:
        return rng.permutation(tau_p)[:num_users]
    return rng.integers(0, tau_p, size=num_users)


def _allocate(
    beta: np.ndarray, tau_p: int, rng: np.random.Generator, method: str
) -> np.ndarray:
    if method == "fingerprint":
        return _fingerprint_allocation(10.0 * np.log10(beta.T), tau_p, rng)
    if method == "random":
        return _random_allocation(beta.shape[1], tau_p, rng)
    raise ValueError(f"Unknown pilot allocation method: {method}")


def assign_pilots(
    beta: np.ndarray,
    tau_p: int,
    seed: int,
    partition: Optional[ClusterPartition] = None,
    method: str = "fingerprint",
) -> PilotAssignment:
    """Allocate pilots from large-scale information only.

    Without a partition the allocation is global. With one, every CPU
    allocates its own users independently, seeing only the beta block of its
    own APs and users, and pilots are reused freely across CPUs. CPU d draws
    from stream ``[seed, d]``, the global allocation from ``[seed, 0]``, so a
    single CPU that sees the whole network reproduces the global result.
    """
    if np.any(beta <= 0):
        raise ValueError("beta must be strictly positive")

    if partition is None:
        pilots = _allocate(beta, tau_p, np.random.default_rng([seed, 0]), method)
        return PilotAssignment(pilots, GLOBAL_SCOPE)

    pilots = np.full(beta.shape[1], -1, dtype=int)
    for d in range(partition.num_cpus):
        local = assign_local_pilots(
            beta[np.ix_(partition.cluster_ap_sets[d], partition.cluster_user_sets[d])],
            tau_p,
            seed,
            d,
            method,
        )
        pilots[partition.cluster_user_sets[d]] = local
    return PilotAssignment(pilots, PER_CPU_SCOPE)


def assign_local_pilots(
    local_beta: np.ndarray, tau_p: int, seed: int, cpu: int, method: str = "fingerprint"
) -> np.ndarray:
    """Pilot allocation a single CPU computes from its own M_d x K_d beta block."""
    if local_beta.shape[1] == 0:
        return np.zeros(0, dtype=int)
    return _allocate(local_beta, tau_p, np.random.default_rng([seed, cpu]), method)


def _pilot_noise(rng: np.random.Generator, shape: Sequence[int], sigma2: float) -> np.ndarray:
    return np.sqrt(sigma2) * draw_small_scale(rng, shape)


def receive_pilots(
    channel: ChannelRealization,
    assignment: PilotAssignment,
    book: PilotBook,
    p_ms: float,
    sigma2: float,
    seed,
) -> np.ndarray:
    """M x tau_p received pilot blocks: y_m = sqrt(tau_p P) sum_k g_mk phi_k + w_m."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    phi = book.columns(assignment.user_to_pilot)
    g = channel.g
    received = np.sqrt(book.tau_p * p_ms) * (g @ phi.T)
    return received + _pilot_noise(rng, received.shape, sigma2)


def estimation_stats(
    beta: np.ndarray,
    assignment: PilotAssignment,
    book: PilotBook,
    p_ms: float,
    sigma2: float,
) -> EstimationStats:
    """xi_mk = tau_p P sum_k' beta_mk' |phi_k'^H phi_k|^2 + sigma2 and alpha."""
    gain = book.tau_p * p_ms
    xi = gain * (beta @ assignment.overlap(book)) + sigma2
    alpha = np.divide(
        gain * beta**2, xi, out=np.zeros_like(beta, dtype=float), where=xi > 0
    )
    return EstimationStats(xi=xi, alpha=alpha, error_var=beta - alpha)


def estimator_coefficients(
    beta: np.ndarray, xi: np.ndarray, tau_p: int, p_ms: float
) -> np.ndarray:
    """sqrt(tau_p P) beta / xi, zero where xi vanishes."""
    return np.divide(
        np.sqrt(tau_p * p_ms) * beta,
        xi,
        out=np.zeros_like(beta, dtype=float),
        where=xi > 0,
    )


def project_pilots(
    received: np.ndarray, assignment: PilotAssignment, book: PilotBook
) -> np.ndarray:
    """phi_k^H y_m for every AP m and user k; works on stacked draws too."""
    return received @ book.columns(assignment.user_to_pilot).conj()


def mmse_estimate(
    received: np.ndarray,
    beta: np.ndarray,
    assignment: PilotAssignment,
    book: PilotBook,
    p_ms: float,
    sigma2: float,
    xi: Optional[np.ndarray] = None,
):
    """MMSE estimate g_hat and its statistics.

    ``xi`` overrides the normalisation the estimator uses; by default it is the
    true xi of ``assignment``. A CPU that does not know every co-pilot user
    passes its own, smaller xi.
    """
    stats = estimation_stats(beta, assignment, book, p_ms, sigma2)
    used_xi = stats.xi if xi is None else xi
    coefficients = estimator_coefficients(beta, used_xi, book.tau_p, p_ms)
    g_hat = coefficients * project_pilots(received, assignment, book)
    return g_hat, stats
