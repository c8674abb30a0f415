"""Experiment runner: throws x strategies, sweeps over K and D."""

import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import repeat
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..__version__ import version_string
from ..config.app_config import ScenarioConfig
from ..core.scenario import Scenario, TrialSettings
from ..core.seeding import Stream, derive_seed
from ..core.strategy import RateReport
from ..core.strategy_executor import StrategyExecutor, TrialOutcome
from ..network.channel import compute_large_scale
from ..network.deployment import associate_users, cluster_aps, generate_deployment
from .results import ResultTable

logger = logging.getLogger(__name__)


def noise_power(
    psd_dbm_per_hz: float, bandwidth_hz: float, noise_figure_db: float
) -> float:
    """Thermal noise power in watts: 10^((psd + 10 log10(BW) + NF - 30) / 10)."""
    if bandwidth_hz <= 0:
        raise ValueError(f"bandwidth_hz must be positive, got {bandwidth_hz}")
    dbm = psd_dbm_per_hz + 10.0 * np.log10(bandwidth_hz) + noise_figure_db
    return float(10.0 ** ((dbm - 30.0) / 10.0))


def rate_scale(config: ScenarioConfig) -> float:
    """1 for bit/s/Hz, (tau_dl / tau_c) W for net bit/s."""
    if config.rate_mode == "net":
        return config.tau_dl / config.tau_c * config.bandwidth_hz
    return 1.0


def compute_rate(
    sinr: Union[float, np.ndarray], config: ScenarioConfig
) -> Union[float, np.ndarray]:
    rate = rate_scale(config) * np.log2(1.0 + np.asarray(sinr, dtype=float))
    return float(rate) if np.ndim(rate) == 0 else rate


def trial_settings(config: ScenarioConfig) -> TrialSettings:
    return TrialSettings(
        p_ap_w=config.p_ap_w,
        p_ms_w=config.p_ms_w,
        sigma2=noise_power(
            config.noise_psd_dbm_per_hz, config.bandwidth_hz, config.noise_figure_db
        ),
        tau_p=config.tau_p,
        n_mc=config.n_mc,
        mc_batch_size=config.mc_batch_size,
        n_fading=config.n_fading,
        bisection_tol=config.bisection_tol,
        bisection_max_iter=config.bisection_max_iter,
        feasibility_backend=config.feasibility_backend,
        pilot_allocation=config.pilot_allocation,
        max_singular_fraction=config.max_singular_fraction,
    )


def build_scenario(config: ScenarioConfig, throw: int) -> Scenario:
    """Deployment, clustering, large-scale gains and association of one throw.

    None of the seeds involve the number of CPUs, so two configurations that
    differ only in ``num_cpus`` see the same APs, users and gains.
    """
    seed = config.master_seed
    geometry = generate_deployment(
        derive_seed(seed, throw, Stream.DEPLOYMENT),
        config.num_aps,
        config.num_users,
        config.side_length_m,
        config.num_cpus,
    )
    clusters = cluster_aps(
        geometry,
        config.num_cpus,
        derive_seed(seed, throw, Stream.CLUSTERING),
        restarts=config.kmeans_restarts,
    )
    large_scale = compute_large_scale(
        geometry, config.large_scale, derive_seed(seed, throw, Stream.SHADOWING)
    )
    partition = associate_users(large_scale.beta, clusters, config.association_scale)
    logger.debug(
        f"Throw {throw}: APs per CPU {partition.ap_counts.tolist()}, "
        f"users per CPU {partition.user_counts.tolist()}"
    )
    return Scenario(
        beta=large_scale.beta,
        partition=partition,
        settings=trial_settings(config),
        master_seed=seed,
        throw=throw,
    )


def report_row(report: RateReport, config: ScenarioConfig) -> Dict[str, Any]:
    rates = compute_rate(report.sinr, config)
    minimum = float(np.min(rates))
    maximum = float(np.max(rates))
    row: Dict[str, Any] = {
        "strategy": report.strategy,
        "D": report.num_cpus,
        "K": report.num_users,
        "throw": report.throw,
        "seed": report.master_seed,
        "min_rate": minimum,
        "max_rate": maximum,
        "quotient": maximum / minimum if minimum > 0 else float("inf"),
        "mean_rate": float(np.mean(rates)),
        "t_star": report.t_star,
        "ergodic_min_rate": float("nan"),
        "ergodic_mean_rate": float("nan"),
        "dropped_trials": 0,
    }
    if report.ergodic_rates is not None:
        ergodic = rate_scale(config) * report.ergodic_rates
        row["ergodic_min_rate"] = float(np.min(ergodic))
        row["ergodic_mean_rate"] = float(np.mean(ergodic))
    return row


def dropped_row(outcome: TrialOutcome, config: ScenarioConfig, throw: int) -> Dict[str, Any]:
    nan = float("nan")
    return {
        "strategy": outcome.strategy,
        "D": config.num_cpus,
        "K": config.num_users,
        "throw": throw,
        "seed": config.master_seed,
        "min_rate": nan,
        "max_rate": nan,
        "quotient": nan,
        "mean_rate": nan,
        "t_star": nan,
        "ergodic_min_rate": nan,
        "ergodic_mean_rate": nan,
        "dropped_trials": 1,
    }


def run_throw(config: ScenarioConfig, throw: int) -> List[Dict[str, Any]]:
    """Raw rows of every enabled strategy on one throw."""
    scenario = build_scenario(config, throw)
    executor = StrategyExecutor.default(config.strategies)
    rows = []
    for outcome in executor.run_all(scenario):
        if outcome.dropped:
            rows.append(dropped_row(outcome, config, throw))
        else:
            rows.append(report_row(outcome.report, config))
    return rows


def _collect_rows(config: ScenarioConfig, workers: int) -> List[Dict[str, Any]]:
    throws = range(config.n_throws)
    logger.info(
        f"Running {config.n_throws} throws (M={config.num_aps}, K={config.num_users}, "
        f"D={config.num_cpus}, strategies={','.join(config.strategies)}, "
        f"workers={workers})"
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(run_throw, repeat(config), throws))
    else:
        batches = [run_throw(config, throw) for throw in throws]
    return [row for batch in batches for row in batch]


def run_experiment(
    config: ScenarioConfig, workers: Optional[int] = None
) -> ResultTable:
    """Run ``config.n_throws`` throws; rows come back in throw order whatever
    the worker count."""
    rows = _collect_rows(config, workers or config.workers)
    return ResultTable.from_rows(rows, version_string(), config.echo())


def run_sweep(
    config: ScenarioConfig,
    users: Optional[Sequence[int]] = None,
    cpus: Optional[Sequence[int]] = None,
    workers: Optional[int] = None,
) -> ResultTable:
    """Grid over K x D, every point with the configured strategies."""
    users = list(users or [config.num_users])
    cpus = list(cpus or [config.num_cpus])
    rows: List[Dict[str, Any]] = []
    for num_users in users:
        for num_cpus in cpus:
            point = config.replace(num_users=num_users, num_cpus=num_cpus)
            rows.extend(_collect_rows(point, workers or config.workers))
    echo = config.echo()
    echo["sweep_users"] = users
    echo["sweep_cpus"] = cpus
    return ResultTable.from_rows(rows, version_string(), echo)
