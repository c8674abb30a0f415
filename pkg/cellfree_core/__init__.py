from .__version__ import __version__, version_string
from .config.app_config import ConfigError, ScenarioConfig
from .core.errors import SimulationError
from .core.scenario import Scenario, TrialSettings
from .core.strategy import ConnectivityStrategy, RateReport
from .core.strategy_executor import StrategyExecutor
from .harness.experiment import run_experiment, run_sweep
from .harness.results import ResultTable, emit_results

__all__ = [
    "__version__",
    "version_string",
    "ConfigError",
    "ConnectivityStrategy",
    "RateReport",
    "ResultTable",
    "Scenario",
    "ScenarioConfig",
    "SimulationError",
    "StrategyExecutor",
    "TrialSettings",
    "emit_results",
    "run_experiment",
    "run_sweep",
]
