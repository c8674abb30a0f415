"""Zero-forcing precoders and Monte-Carlo interference statistics.

``gamma`` holds the own-cluster interference terms and ``gamma_bar`` the
cross-cluster terms, both indexed by global user numbers (row = victim k,
column = interfering user l). ``omega`` is E|w_mk|^2 per AP and user.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.errors import MonteCarloError, SingularPrecoderError
from .channel import draw_small_scale
from .deployment import ClusterPartition
from .training import (
    PilotAssignment,
    PilotBook,
    estimation_stats,
    estimator_coefficients,
)

logger = logging.getLogger(__name__)

COND_LIMIT = 1e6


@dataclass(frozen=True)
class ZfPrecoder:
    """Right pseudo-inverse W with G_hat^T W = I for one precoding scope."""

    w: np.ndarray
    scope: str = "global"


@dataclass(frozen=True)
class InterferenceStats:
    gamma: np.ndarray
    gamma_bar: np.ndarray
    omega: np.ndarray
    signal_gain: np.ndarray
    gamma_se: np.ndarray
    gamma_bar_se: np.ndarray
    n_mc: int
    singular_draws: int = 0

    @property
    def coupling(self) -> np.ndarray:
        """Total interference coupling gamma + gamma_bar."""
        return self.gamma + self.gamma_bar


def _condition(g_hat: np.ndarray) -> np.ndarray:
    # 2-norm condition number of G_hat; its Gram matrix has the square of it
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(g_hat)
    return np.where(np.isfinite(cond), cond, np.inf)


def _solve_zf(g_hat: np.ndarray) -> np.ndarray:
    # W = G_hat^* (G_hat^T G_hat^*)^{-1} is the pseudo-inverse of G_hat^T
    return np.linalg.pinv(np.swapaxes(g_hat, -1, -2))


def zf_precoder(
    g_hat: np.ndarray, scope: str = "global", cond_limit: float = COND_LIMIT
) -> ZfPrecoder:
    """Minimum-norm right inverse of an M x K channel estimate."""
    g_hat = np.asarray(g_hat, dtype=complex)
    num_aps, num_users = g_hat.shape
    if num_users == 0:
        return ZfPrecoder(w=np.zeros((num_aps, 0), dtype=complex), scope=scope)
    if num_users > num_aps:
        raise SingularPrecoderError(
            f"{scope}: {num_users} users cannot be zero-forced with {num_aps} APs"
        )
    cond = float(_condition(g_hat))
    if cond > cond_limit:
        raise SingularPrecoderError(f"{scope}: estimate is rank deficient (cond {cond:.3g})")
    return ZfPrecoder(w=_solve_zf(g_hat), scope=scope)


def zf_residual(g_hat: np.ndarray, w: np.ndarray) -> float:
    """Frobenius norm of G_hat^T W - I."""
    return float(np.linalg.norm(g_hat.T @ w - np.eye(w.shape[1])))


def _scopes(partition: ClusterPartition) -> List[Tuple[int, np.ndarray, np.ndarray]]:
    scopes = []
    for d in range(partition.num_cpus):
        aps = partition.cluster_ap_sets[d]
        users = partition.cluster_user_sets[d]
        if len(users) == 0:
            continue
        if len(users) > len(aps):
            raise SingularPrecoderError(
                f"CPU {d}: {len(users)} users cannot be zero-forced with {len(aps)} APs"
            )
        scopes.append((d, aps, users))
    return scopes


def _standard_error(total: np.ndarray, squares: np.ndarray, n: int) -> np.ndarray:
    if n < 2:
        return np.zeros_like(total)
    mean = total / n
    var = np.maximum(squares / n - mean**2, 0.0) * n / (n - 1)
    return np.sqrt(var / n)


class InterferenceEstimator:
    """Monte-Carlo estimator of gamma, gamma_bar and omega for a fixed
    large-scale state.

    Every draw generates the true channel, the received pilot block
    and the MMSE estimate, so co-pilot users share one projection and
    true channels and estimates are jointly distributed. A draw with any
    singular Gram matrix is discarded and replaced.
    """

    def __init__(
        self,
        n_mc: int = 1000,
        batch_size: int = 250,
        max_singular_fraction: float = 0.1,
        cond_limit: float = COND_LIMIT,
    ):
        if n_mc < 1:
            raise ValueError(f"n_mc must be >= 1, got {n_mc}")
        self.n_mc = n_mc
        self.batch_size = max(1, batch_size)
        self.max_singular_fraction = max_singular_fraction
        self.cond_limit = cond_limit

    def estimate(
        self,
        beta: np.ndarray,
        assignment: PilotAssignment,
        book: PilotBook,
        p_ms: float,
        sigma2: float,
        seed: int,
        partition: Optional[ClusterPartition] = None,
        xi_used: Optional[np.ndarray] = None,
        cross: bool = True,
    ) -> InterferenceStats:
        """Estimate the statistics of the per-scope ZF precoders.

        ``partition`` defines the precoding scopes (one global scope when
        omitted). ``xi_used`` is the normalisation each CPU's estimator
        applies; entries that differ from the true xi add the bias terms
        of a mismatched estimator and make ``signal_gain`` drop below one.
        """
        num_aps, num_users = beta.shape
        if partition is None:
            partition = ClusterPartition.single(num_aps, num_users)
        scopes = _scopes(partition)

        stats = estimation_stats(beta, assignment, book, p_ms, sigma2)
        if xi_used is None:
            xi_used = stats.xi
        ratio = np.divide(
            xi_used, stats.xi, out=np.ones_like(beta, dtype=float), where=stats.xi > 0
        )
        in_scope = partition.ap_to_cpu[:, np.newaxis] == partition.user_to_cpu[np.newaxis, :]
        mismatch = bool(np.any(ratio[in_scope] != 1.0))

        coefficients = estimator_coefficients(beta, xi_used, book.tau_p, p_ms)
        phi = book.columns(assignment.user_to_pilot)
        pilot_gain = np.sqrt(book.tau_p * p_ms)
        amplitude = np.sqrt(beta)

        omega_sum = np.zeros((num_aps, num_users))
        gamma_sum = np.zeros((num_users, num_users))
        gamma_sq = np.zeros((num_users, num_users))
        bar_sum = np.zeros((num_users, num_users))
        bar_sq = np.zeros((num_users, num_users))
        signal_sum = np.zeros(num_users, dtype=complex)

        rng = np.random.default_rng(seed)
        accepted = 0
        singular = 0
        limit = self.max_singular_fraction * self.n_mc

        while accepted < self.n_mc:
            n = min(self.batch_size, self.n_mc - accepted)
            g = amplitude * draw_small_scale(rng, (n, num_aps, num_users))
            noise = np.sqrt(sigma2) * draw_small_scale(rng, (n, num_aps, book.tau_p))
            received = pilot_gain * (g @ phi.T) + noise
            g_hat = coefficients * (received @ phi.conj())

            valid = np.ones(n, dtype=bool)
            for _, aps, users in scopes:
                valid &= _condition(g_hat[:, aps][:, :, users]) <= self.cond_limit
            dropped = int(n - valid.sum())
            if dropped:
                singular += dropped
                logger.debug(f"Discarded {dropped} singular draws ({singular} total)")
                if singular > limit:
                    raise MonteCarloError(
                        f"{singular} of {accepted + n} draws were singular "
                        f"(limit {self.max_singular_fraction:.0%} of {self.n_mc})"
                    )
            g, g_hat = g[valid], g_hat[valid]

            for _, aps, users in scopes:
                local_hat = g_hat[:, aps][:, :, users]
                w = _solve_zf(local_hat)
                power = np.abs(w) ** 2
                omega_sum[np.ix_(aps, users)] += power.sum(axis=0)

                error = stats.error_var[np.ix_(aps, users)]
                own = np.einsum("mk,nml->nkl", error, power)
                if mismatch:
                    biased = ratio[np.ix_(aps, users)] * local_hat
                    leak = np.swapaxes(biased, 1, 2) @ w
                    own = own + np.abs(leak) ** 2
                    signal_sum[users] += np.einsum("nkk->k", leak)
                gamma_sum[np.ix_(users, users)] += own.sum(axis=0)
                gamma_sq[np.ix_(users, users)] += (own**2).sum(axis=0)

                others = np.setdiff1d(np.arange(num_users), users)
                if cross and len(others):
                    spill = np.swapaxes(g[:, aps][:, :, others], 1, 2) @ w
                    spill_power = np.abs(spill) ** 2
                    bar_sum[np.ix_(others, users)] += spill_power.sum(axis=0)
                    bar_sq[np.ix_(others, users)] += (spill_power**2).sum(axis=0)

            accepted += int(valid.sum())

        n = self.n_mc
        gamma = gamma_sum / n
        if mismatch:
            signal_gain = np.abs(signal_sum / n) ** 2
            served = np.concatenate([users for _, _, users in scopes]) if scopes else []
            idx = np.asarray(served, dtype=int)
            gamma[idx, idx] = np.maximum(gamma[idx, idx] - signal_gain[idx], 0.0)
        else:
            signal_gain = np.ones(num_users)

        result = InterferenceStats(
            gamma=gamma,
            gamma_bar=bar_sum / n,
            omega=omega_sum / n,
            signal_gain=signal_gain,
            gamma_se=_standard_error(gamma_sum, gamma_sq, n),
            gamma_bar_se=_standard_error(bar_sum, bar_sq, n),
            n_mc=n,
            singular_draws=singular,
        )
        logger.debug(
            f"Interference statistics from {n} draws over {len(scopes)} scope(s), "
            f"{singular} singular, largest standard error "
            f"{float(np.max(result.gamma_se, initial=0.0)):.3g} own / "
            f"{float(np.max(result.gamma_bar_se, initial=0.0)):.3g} cross"
        )
        return result


def estimate_gamma(
    beta: np.ndarray,
    assignment: PilotAssignment,
    book: PilotBook,
    p_ms: float,
    sigma2: float,
    n_mc: int,
    seed: int,
    partition: Optional[ClusterPartition] = None,
    batch_size: int = 250,
) -> Tuple[np.ndarray, np.ndarray]:
    """Own-scope gamma and omega."""
    stats = InterferenceEstimator(n_mc, batch_size).estimate(
        beta, assignment, book, p_ms, sigma2, seed, partition, cross=False
    )
    return stats.gamma, stats.omega


def estimate_gamma_bar(
    beta: np.ndarray,
    assignment: PilotAssignment,
    book: PilotBook,
    p_ms: float,
    sigma2: float,
    partition: ClusterPartition,
    n_mc: int,
    seed: int,
    batch_size: int = 250,
) -> np.ndarray:
    """Cross-cluster gamma_bar; gamma_bar[k, l] is the leakage of the
    precoder column of user l (CPU d') onto user k, for k outside d'."""
    stats = InterferenceEstimator(n_mc, batch_size).estimate(
        beta, assignment, book, p_ms, sigma2, seed, partition, cross=True
    )
    return stats.gamma_bar
