"""Strong (SC), weak (WC) and no (NC) CPU connectivity.

SC: CPUs exchange channel estimates, so precoding and power control are
centralized and the result does not depend on the clustering.
WC: CPUs exchange large-scale statistics only. ZF is computed per cluster
from local estimates; power control is joint and accounts for the
cross-cluster interference.
NC: CPUs share only a clock. Every CPU allocates pilots, estimates and
optimizes power from its own cluster's statistics; the reported SINRs are
those the network actually achieves.
"""

import logging
from typing import List

import numpy as np

from ..network.deployment import ClusterPartition
from ..network.power_control import evaluate_sinr, evaluate_sinr_wc, solve_maxmin
from ..network.precoding import InterferenceEstimator, InterferenceStats
from ..network.training import (
    PER_CPU_SCOPE,
    PilotAssignment,
    assign_local_pilots,
    assign_pilots,
    estimation_stats,
)
from .scenario import CpuView, Scenario
from .seeding import Stream
from .strategy import ConnectivityStrategy, RateReport, TransmitPlan

logger = logging.getLogger(__name__)


def _estimator(scenario: Scenario) -> InterferenceEstimator:
    settings = scenario.settings
    return InterferenceEstimator(
        n_mc=settings.n_mc,
        batch_size=settings.mc_batch_size,
        max_singular_fraction=settings.max_singular_fraction,
    )


def _solve(scenario: Scenario, stats: InterferenceStats, joint: bool):
    settings = scenario.settings
    return solve_maxmin(
        stats.gamma,
        stats.omega,
        settings.p_ap_w,
        settings.sigma2,
        gamma_bar=stats.gamma_bar if joint else None,
        tol=settings.bisection_tol,
        max_iter=settings.bisection_max_iter,
        backend=settings.feasibility_backend,
    )


def _global_pilots(scenario: Scenario) -> PilotAssignment:
    return assign_pilots(
        scenario.beta,
        scenario.settings.tau_p,
        scenario.seed(Stream.PILOTS),
        method=scenario.settings.pilot_allocation,
    )


def split_transmit(
    w: np.ndarray, eta: np.ndarray, partition: ClusterPartition, p_ap: float
) -> List[np.ndarray]:
    """Per-CPU blocks W^(d) P^(d): the columns of the centralized W P that
    belong to each CPU's users."""
    scaled = w * np.sqrt(p_ap * eta)[np.newaxis, :]
    return [scaled[:, users] for users in partition.cluster_user_sets]


class StrongConnectivity(ConnectivityStrategy):
    tag = "sc"
    order = 10

    def plan(self, scenario: Scenario) -> TransmitPlan:
        settings = scenario.settings
        single = ClusterPartition.single(scenario.num_aps, scenario.num_users)
        assignment = _global_pilots(scenario)
        stats = _estimator(scenario).estimate(
            scenario.beta,
            assignment,
            scenario.book,
            settings.p_ms_w,
            settings.sigma2,
            scenario.seed(Stream.DESIGN, 0),
            partition=single,
            cross=False,
        )
        solution = _solve(scenario, stats, joint=False)
        views = [
            scenario.network_view(d).with_plan(
                pilots=assignment.user_to_pilot,
                gamma=stats.gamma,
                eta=solution.eta,
                t_star=solution.t_star,
            )
            for d in range(scenario.num_cpus)
        ]
        return TransmitPlan(
            assignment=assignment,
            precoding=single,
            eta=solution.eta,
            t_star=solution.t_star,
            stats=stats,
            sinr=solution.sinr,
            infeasible=solution.infeasible,
            views=views,
        )


class WeakConnectivity(ConnectivityStrategy):
    tag = "wc"
    order = 20

    def plan(self, scenario: Scenario) -> TransmitPlan:
        settings = scenario.settings
        assignment = _global_pilots(scenario)
        stats = _estimator(scenario).estimate(
            scenario.beta,
            assignment,
            scenario.book,
            settings.p_ms_w,
            settings.sigma2,
            scenario.seed(Stream.DESIGN, 0),
            partition=scenario.partition,
            cross=True,
        )
        solution = _solve(scenario, stats, joint=True)
        sinr = evaluate_sinr_wc(
            solution.eta, stats.gamma, stats.gamma_bar, settings.p_ap_w, settings.sigma2
        )
        views = []
        for d in range(scenario.num_cpus):
            users = scenario.partition.cluster_user_sets[d]
            views.append(
                scenario.network_view(d).with_plan(
                    pilots=assignment.user_to_pilot,
                    gamma=stats.gamma[np.ix_(users, users)],
                    gamma_bar=stats.gamma_bar,
                    eta=solution.eta[users],
                    t_star=solution.t_star,
                )
            )
        return TransmitPlan(
            assignment=assignment,
            precoding=scenario.partition,
            eta=solution.eta,
            t_star=solution.t_star,
            stats=stats,
            sinr=sinr,
            infeasible=solution.infeasible,
            views=views,
        )


class NoConnectivity(ConnectivityStrategy):
    tag = "nc"
    order = 30

    def local_plan(self, scenario: Scenario, view: CpuView) -> CpuView:
        """Pilots and power one CPU computes from its own cluster only.

        Nothing outside ``view`` is read here; ``scenario`` only supplies
        the settings and the seeds.
        """
        settings = scenario.settings
        local_beta = view.known_beta
        if local_beta.shape[1] == 0:
            return view.with_plan(pilots=np.zeros(0, dtype=int), eta=np.zeros(0), t_star=0.0)

        pilots = assign_local_pilots(
            local_beta,
            settings.tau_p,
            scenario.seed(Stream.PILOTS),
            view.cpu,
            settings.pilot_allocation,
        )
        assignment = PilotAssignment(pilots, PER_CPU_SCOPE)
        stats = _estimator(scenario).estimate(
            local_beta,
            assignment,
            scenario.book,
            settings.p_ms_w,
            settings.sigma2,
            scenario.seed(Stream.DESIGN, view.cpu),
            cross=False,
        )
        solution = _solve(scenario, stats, joint=False)
        if solution.infeasible:
            logger.warning(f"nc: CPU {view.cpu} found no feasible power allocation")
        return view.with_plan(
            pilots=pilots,
            gamma=stats.gamma,
            eta=solution.eta,
            t_star=solution.t_star,
        )

    def local_plans(self, scenario: Scenario) -> List[CpuView]:
        return [
            self.local_plan(scenario, scenario.local_view(d))
            for d in range(scenario.num_cpus)
        ]

    def plan(self, scenario: Scenario) -> TransmitPlan:
        settings = scenario.settings
        book = scenario.book
        views = self.local_plans(scenario)

        pilots = np.zeros(scenario.num_users, dtype=int)
        eta = np.zeros(scenario.num_users)
        for view in views:
            pilots[view.users] = view.pilots
            eta[view.users] = view.eta
        assignment = PilotAssignment(pilots, PER_CPU_SCOPE)

        # each CPU normalises its estimates with the xi it can compute locally
        true_xi = estimation_stats(
            scenario.beta, assignment, book, settings.p_ms_w, settings.sigma2
        ).xi
        xi_used = true_xi.copy()
        for view in views:
            if len(view.users) == 0:
                continue
            local = estimation_stats(
                view.known_beta,
                PilotAssignment(view.pilots, PER_CPU_SCOPE),
                book,
                settings.p_ms_w,
                settings.sigma2,
            )
            xi_used[np.ix_(view.aps, view.users)] = local.xi

        stats = _estimator(scenario).estimate(
            scenario.beta,
            assignment,
            book,
            settings.p_ms_w,
            settings.sigma2,
            scenario.seed(Stream.DESIGN, 0),
            partition=scenario.partition,
            xi_used=xi_used,
            cross=True,
        )
        sinr = evaluate_sinr(
            eta, stats.coupling, settings.p_ap_w, settings.sigma2, stats.signal_gain
        )
        served = [view.t_star for view in views if len(view.users)]
        return TransmitPlan(
            assignment=assignment,
            precoding=scenario.partition,
            eta=eta,
            t_star=float(min(served)) if served else 0.0,
            stats=stats,
            sinr=sinr,
            infeasible=any(len(v.users) > 0 and v.t_star == 0.0 for v in views),
            xi_used=xi_used,
            views=views,
        )


def run_sc(scenario: Scenario) -> RateReport:
    return StrongConnectivity().run(scenario)


def run_wc(scenario: Scenario) -> RateReport:
    return WeakConnectivity().run(scenario)


def run_nc(scenario: Scenario) -> RateReport:
    return NoConnectivity().run(scenario)
