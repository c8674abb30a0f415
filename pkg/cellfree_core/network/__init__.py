from .channel import LargeScaleParams, compute_large_scale, realize_channel
from .deployment import (
    ClusterPartition,
    NetworkGeometry,
    associate_users,
    cluster_aps,
    generate_deployment,
)
from .power_control import PowerSolution, feasibility_check, solve_maxmin
from .precoding import InterferenceEstimator, InterferenceStats, zf_precoder
from .training import PilotBook, assign_pilots, build_pilot_book, mmse_estimate

__all__ = [
    "ClusterPartition",
    "InterferenceEstimator",
    "InterferenceStats",
    "LargeScaleParams",
    "NetworkGeometry",
    "PilotBook",
    "PowerSolution",
    "assign_pilots",
    "associate_users",
    "build_pilot_book",
    "cluster_aps",
    "compute_large_scale",
    "feasibility_check",
    "generate_deployment",
    "mmse_estimate",
    "realize_channel",
    "solve_maxmin",
    "zf_precoder",
]
