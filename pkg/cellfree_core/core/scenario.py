"""One large-scale throw as the strategies see it, and the per-CPU views."""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..network.deployment import ClusterPartition
from ..network.training import PilotBook, build_pilot_book
from .seeding import Stream, derive_seed


@dataclass(frozen=True)
class TrialSettings:
    """Numbers every strategy needs besides the channel state."""

    p_ap_w: float
    p_ms_w: float
    sigma2: float
    tau_p: int
    n_mc: int = 1000
    mc_batch_size: int = 250
    n_fading: int = 1000
    bisection_tol: float = 1e-4
    bisection_max_iter: int = 64
    feasibility_backend: str = "fixed_point"
    pilot_allocation: str = "fingerprint"
    max_singular_fraction: float = 0.1


@dataclass(frozen=True)
class Scenario:
    """Large-scale gains, the CPU partition and the seeds of one throw."""

    beta: np.ndarray
    partition: ClusterPartition
    settings: TrialSettings
    master_seed: int = 0
    throw: int = 0

    def __post_init__(self) -> None:
        if self.beta.shape != (len(self.partition.ap_to_cpu), len(self.partition.user_to_cpu)):
            raise ValueError("beta does not match the partition dimensions")

    @property
    def num_aps(self) -> int:
        return int(self.beta.shape[0])

    @property
    def num_users(self) -> int:
        return int(self.beta.shape[1])

    @property
    def num_cpus(self) -> int:
        return self.partition.num_cpus

    @property
    def book(self) -> PilotBook:
        return build_pilot_book(self.settings.tau_p)

    def seed(self, stream: Stream, *extra: int) -> int:
        return derive_seed(self.master_seed, self.throw, stream, *extra)

    def with_beta(self, beta: np.ndarray) -> "Scenario":
        return replace(self, beta=beta)

    def local_view(self, cpu: int) -> "CpuView":
        """What CPU ``cpu`` knows with no inter-CPU exchange: the beta block of
        its own APs and users."""
        aps = self.partition.cluster_ap_sets[cpu]
        users = self.partition.cluster_user_sets[cpu]
        return CpuView(
            cpu=cpu,
            aps=aps,
            users=users,
            known_beta=self.beta[np.ix_(aps, users)].copy(),
            beta_scope="cluster",
        )

    def network_view(self, cpu: int) -> "CpuView":
        """View of a CPU that receives every large-scale gain."""
        return CpuView(
            cpu=cpu,
            aps=self.partition.cluster_ap_sets[cpu],
            users=self.partition.cluster_user_sets[cpu],
            known_beta=self.beta,
            beta_scope="network",
        )


@dataclass(frozen=True)
class CpuView:
    """Information available at one CPU.

    ``known_beta`` is either the full M x K matrix (``beta_scope="network"``)
    or the M_d x K_d block of the CPU's own APs and users (``"cluster"``),
    indexed locally. The remaining fields are filled in as the strategy
    computes them.
    """

    cpu: int
    aps: np.ndarray
    users: np.ndarray
    known_beta: np.ndarray
    beta_scope: str
    pilots: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    gamma_bar: Optional[np.ndarray] = None
    eta: Optional[np.ndarray] = None
    t_star: Optional[float] = None

    def with_plan(self, **fields) -> "CpuView":
        return replace(self, **fields)
