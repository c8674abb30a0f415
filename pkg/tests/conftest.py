"""Pytest fixtures for cellfree-core tests."""

import os
import sys

import numpy as np
import pytest
import yaml

# Add parent directory to path to make cellfree_core importable
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from cellfree_core.config.app_config import ScenarioConfig  # noqa: E402
from cellfree_core.core.scenario import Scenario, TrialSettings  # noqa: E402
from cellfree_core.network.deployment import ClusterPartition  # noqa: E402

SMALL_SCENARIO = {
    "num_aps": 12,
    "num_users": 3,
    "num_cpus": 1,
    "tau_p": 4,
    "n_throws": 2,
    "n_fading": 3,
    "n_mc": 40,
    "mc_batch_size": 20,
    "kmeans_restarts": 2,
    "strategies": "sc",
}


@pytest.fixture
def small_config():
    """Scenario small enough for a throw to take well under a second."""
    return ScenarioConfig.from_dict(SMALL_SCENARIO)


@pytest.fixture
def config_file(tmp_path):
    """Write a YAML scenario and return its path."""

    def write(values):
        path = tmp_path / "scenario.yaml"
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(values, f)
        return str(path)

    return write


@pytest.fixture
def settings():
    return TrialSettings(
        p_ap_w=0.2,
        p_ms_w=0.1,
        sigma2=6.3e-13,
        tau_p=4,
        n_mc=40,
        mc_batch_size=40,
        n_fading=3,
    )


@pytest.fixture
def two_cpu_scenario(settings):
    """Eight APs split 4/4 between two CPUs, two users each."""
    rng = np.random.default_rng(11)
    beta = 10.0 ** rng.uniform(-12.0, -9.0, size=(8, 4))
    partition = ClusterPartition(
        ap_to_cpu=np.array([0, 0, 0, 0, 1, 1, 1, 1]),
        user_to_cpu=np.array([0, 0, 1, 1]),
        num_cpus=2,
    )
    return Scenario(beta=beta, partition=partition, settings=settings, master_seed=5)


@pytest.fixture
def one_cpu_scenario(two_cpu_scenario):
    """The same gains and seeds as ``two_cpu_scenario`` under a single CPU."""
    partition = ClusterPartition.single(*two_cpu_scenario.beta.shape)
    return Scenario(
        beta=two_cpu_scenario.beta,
        partition=partition,
        settings=two_cpu_scenario.settings,
        master_seed=two_cpu_scenario.master_seed,
    )
