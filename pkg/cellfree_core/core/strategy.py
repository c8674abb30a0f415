import logging
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Tuple

import numpy as np

from ..network.deployment import ClusterPartition
from ..network.channel import realize_channel
from ..network.precoding import InterferenceStats, zf_precoder
from ..network.training import PilotAssignment, mmse_estimate, receive_pilots
from .errors import SingularPrecoderError
from .scenario import CpuView, Scenario
from .seeding import Stream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransmitPlan:
    """Everything a strategy fixes for one throw from large-scale data.

    ``precoding`` defines the ZF scopes, ``xi_used`` the normalisation the
    estimating CPUs apply (None when it is the true one) and ``stats`` the
    interference statistics of the resulting transmission.
    """

    assignment: PilotAssignment
    precoding: ClusterPartition
    eta: np.ndarray
    t_star: float
    stats: InterferenceStats
    sinr: np.ndarray
    infeasible: bool = False
    xi_used: Optional[np.ndarray] = None
    views: List[CpuView] = field(default_factory=list)


@dataclass(frozen=True)
class SignalDecomposition:
    """Instantaneous received powers per user: the desired term, leakage from
    users of the same precoding scope and interference from other scopes."""

    desired: np.ndarray
    intra: np.ndarray
    inter: np.ndarray

    def sinr(self, sigma2: float) -> np.ndarray:
        return self.desired / (self.intra + self.inter + sigma2)


@dataclass(frozen=True)
class RateReport:
    strategy: str
    num_cpus: int
    num_users: int
    throw: int
    master_seed: int
    sinr: np.ndarray
    t_star: float
    eta: np.ndarray
    infeasible: bool = False
    ergodic_rates: Optional[np.ndarray] = None
    fading_dropped: int = 0

    @property
    def rates(self) -> np.ndarray:
        """log2(1 + SINR) per user."""
        return np.log2(1.0 + self.sinr)

    @property
    def min_rate(self) -> float:
        return float(np.min(self.rates))

    @property
    def max_rate(self) -> float:
        return float(np.max(self.rates))

    @property
    def mean_rate(self) -> float:
        return float(np.mean(self.rates))

    @property
    def quotient(self) -> float:
        """max_rate / min_rate; infinite when some user gets nothing."""
        if self.min_rate <= 0.0:
            return float("inf")
        return self.max_rate / self.min_rate


def full_precoder(g_hat: np.ndarray, precoding: ClusterPartition) -> np.ndarray:
    """M x K matrix holding every scope's ZF columns on that scope's APs."""
    w = np.zeros_like(g_hat)
    for d in range(precoding.num_cpus):
        aps = precoding.cluster_ap_sets[d]
        users = precoding.cluster_user_sets[d]
        if len(users) == 0:
            continue
        local = zf_precoder(g_hat[np.ix_(aps, users)], scope=f"cpu {d}")
        w[np.ix_(aps, users)] = local.w
    return w


def signal_decomposition(
    g: np.ndarray,
    w: np.ndarray,
    eta: np.ndarray,
    precoding: ClusterPartition,
    p_ap: float,
) -> SignalDecomposition:
    """Split |g_k^T w_l|^2 P eta_l into desired, same-scope and other-scope parts."""
    received = np.abs(g.T @ w) ** 2 * (p_ap * eta)[np.newaxis, :]
    owner = precoding.user_to_cpu
    same = owner[:, np.newaxis] == owner[np.newaxis, :]
    np.fill_diagonal(same, False)
    other = owner[:, np.newaxis] != owner[np.newaxis, :]
    return SignalDecomposition(
        desired=np.diag(received).copy(),
        intra=np.sum(received * same, axis=1),
        inter=np.sum(received * other, axis=1),
    )


class ConnectivityStrategy:
    """Base class for CPU connectivity strategies."""

    tag: ClassVar[str] = ""
    order: ClassVar[int] = 100  # higher runs later
    enabled: ClassVar[bool] = True

    def __init__(self):
        self._config: Dict[str, Any] = {}
        self._is_enabled = self.__class__.enabled

    @property
    def name(self) -> str:
        return self.tag or self.__class__.__name__

    @property
    def is_enabled(self) -> bool:
        return self._is_enabled

    def configure(self, config: Dict[str, Any]) -> None:
        """Configure the strategy from a configuration dictionary."""
        self._config = config
        if "enabled" in config:
            self._is_enabled = bool(config["enabled"])

    def plan(self, scenario: Scenario) -> TransmitPlan:
        """Pilots, power coefficients and interference statistics for one throw."""
        raise NotImplementedError

    def run(self, scenario: Scenario) -> RateReport:
        plan = self.plan(scenario)
        ergodic, dropped = self.fading_rates(scenario, plan)
        return RateReport(
            strategy=self.name,
            num_cpus=scenario.num_cpus,
            num_users=scenario.num_users,
            throw=scenario.throw,
            master_seed=scenario.master_seed,
            sinr=plan.sinr,
            t_star=plan.t_star,
            eta=plan.eta,
            infeasible=plan.infeasible,
            ergodic_rates=ergodic,
            fading_dropped=dropped,
        )

    def fading_rates(
        self, scenario: Scenario, plan: TransmitPlan
    ) -> Tuple[Optional[np.ndarray], int]:
        """Average of log2(1 + instantaneous SINR) over the fading realizations.

        Every realization runs the full chain (channel, pilots, MMSE
        estimate, per-scope ZF) with the plan's fixed power coefficients.
        Realizations with a singular precoder are skipped and counted.
        """
        settings = scenario.settings
        if settings.n_fading < 1:
            return None, 0
        book = scenario.book
        total = np.zeros(scenario.num_users)
        accepted = 0
        dropped = 0

        for f in range(settings.n_fading):
            rng = np.random.default_rng(scenario.seed(Stream.FADING, f))
            channel = realize_channel(scenario.beta, rng)
            received = receive_pilots(
                channel, plan.assignment, book, settings.p_ms_w, settings.sigma2, rng
            )
            g_hat, _ = mmse_estimate(
                received,
                scenario.beta,
                plan.assignment,
                book,
                settings.p_ms_w,
                settings.sigma2,
                xi=plan.xi_used,
            )
            try:
                w = full_precoder(g_hat, plan.precoding)
            except SingularPrecoderError as exc:
                dropped += 1
                logger.debug(f"{self.name}: fading realization {f} skipped ({exc})")
                continue
            parts = signal_decomposition(
                channel.g, w, plan.eta, plan.precoding, settings.p_ap_w
            )
            total += np.log2(1.0 + parts.sinr(settings.sigma2))
            accepted += 1

        if dropped:
            logger.warning(
                f"{self.name}: {dropped} of {settings.n_fading} fading realizations "
                f"had a singular precoder"
            )
        if accepted == 0:
            return np.full(scenario.num_users, np.nan), dropped
        return total / accepted, dropped
