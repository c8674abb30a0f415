from .experiment import build_scenario, compute_rate, noise_power, run_experiment, run_sweep
from .oracles import OracleResult, run_oracles
from .results import ResultTable, emit_results

__all__ = [
    "OracleResult",
    "ResultTable",
    "build_scenario",
    "compute_rate",
    "emit_results",
    "noise_power",
    "run_experiment",
    "run_oracles",
    "run_sweep",
]
