"""SINR evaluation and max-min power control by bisection.

Power coefficients are linear in every interference sum. The per-AP power
constraint is taken in expectation and normalised to the AP power,
sum_k omega_mk eta_k <= 1.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from ..core.errors import SolverError

logger = logging.getLogger(__name__)

FIXED_POINT = "fixed_point"
LINPROG = "linprog"
BACKENDS = (FIXED_POINT, LINPROG)

AP_BUDGET = 1.0
BUDGET_RTOL = 1e-9


@dataclass(frozen=True)
class PowerSolution:
    """Result of a max-min solve. ``infeasible`` is set when no positive
    target could be met; then ``t_star`` is 0 and ``eta`` is all zeros."""

    eta: np.ndarray
    t_star: float
    sinr: np.ndarray
    rates: np.ndarray
    iterations: int
    infeasible: bool = False


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    eta: Optional[np.ndarray] = None


def _signal_gain(signal_gain: Optional[np.ndarray], num_users: int) -> np.ndarray:
    if signal_gain is None:
        return np.ones(num_users)
    return np.asarray(signal_gain, dtype=float)


def evaluate_sinr(
    eta: np.ndarray,
    coupling: np.ndarray,
    p_ap: float,
    sigma2: float,
    signal_gain: Optional[np.ndarray] = None,
) -> np.ndarray:
    """SINR_k = P b_k eta_k / (P sum_l coupling_kl eta_l + sigma2)."""
    eta = np.asarray(eta, dtype=float)
    b = _signal_gain(signal_gain, len(eta))
    return p_ap * b * eta / (p_ap * (coupling @ eta) + sigma2)


def evaluate_sinr_centralized(
    eta: np.ndarray, gamma: np.ndarray, p_ap: float, sigma2: float
) -> np.ndarray:
    return evaluate_sinr(eta, gamma, p_ap, sigma2)


def evaluate_sinr_wc(
    eta: np.ndarray,
    gamma: np.ndarray,
    gamma_bar: np.ndarray,
    p_ap: float,
    sigma2: float,
    signal_gain: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Clustered SINR with own-cluster ``gamma`` and cross-cluster
    ``gamma_bar``; ``eta`` holds every cluster's users in global order."""
    return evaluate_sinr(eta, gamma + gamma_bar, p_ap, sigma2, signal_gain)


def _minimal_power(
    transfer: np.ndarray, floor: np.ndarray, max_iter: int = 500, rtol: float = 1e-12
) -> np.ndarray:
    # smallest eta with eta >= transfer @ eta + floor (spectral radius < 1)
    eta = np.zeros_like(floor)
    for _ in range(max_iter):
        updated = transfer @ eta + floor
        if np.max(np.abs(updated - eta)) <= rtol * np.max(np.abs(updated)):
            return updated
        eta = updated
    return np.maximum(np.linalg.solve(np.eye(len(floor)) - transfer, floor), 0.0)


def _linprog_power(
    transfer: np.ndarray, floor: np.ndarray, omega: np.ndarray, budget: float
) -> Feasibility:
    num_users = len(floor)
    with np.errstate(divide="ignore"):
        scale = float(np.max(budget / np.max(omega, axis=0)))
    a_ub = np.vstack([-(np.eye(num_users) - transfer) * scale, omega * scale])
    b_ub = np.concatenate([-floor, np.full(omega.shape[0], budget)])
    result = linprog(
        np.ones(num_users), A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs"
    )
    if result.status == 2:
        return Feasibility(False)
    if result.status != 0:
        raise SolverError(f"linprog failed: {result.message}")
    return Feasibility(True, np.maximum(result.x, 0.0) * scale)


def feasibility_check(
    t: float,
    coupling: np.ndarray,
    omega: np.ndarray,
    p_ap: float,
    sigma2: float,
    signal_gain: Optional[np.ndarray] = None,
    budget: float = AP_BUDGET,
    backend: str = FIXED_POINT,
) -> Feasibility:
    """Decide whether every user can reach SINR ``t`` within the per-AP
    budget, and return the minimal-power witness when it can.

    ``coupling`` is the K x K total interference matrix (gamma, or gamma +
    gamma_bar for clustered precoding) and ``omega`` the M x K expected
    precoder powers.
    """
    if backend not in BACKENDS:
        raise ValueError(f"Unknown feasibility backend: {backend}")
    num_users = coupling.shape[0]
    if t <= 0:
        return Feasibility(True, np.zeros(num_users))

    b = _signal_gain(signal_gain, num_users)
    if np.any(b <= 0):
        return Feasibility(False)
    transfer = t * coupling / b[:, np.newaxis]
    floor = t * sigma2 / (p_ap * b)

    if backend == LINPROG:
        return _linprog_power(transfer, floor, omega, budget)

    try:
        radius = float(np.max(np.abs(np.linalg.eigvals(transfer))))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Eigenvalue computation failed: {exc}") from exc
    if radius >= 1.0:
        return Feasibility(False)

    eta = _minimal_power(transfer, floor)
    if not np.all(np.isfinite(eta)):
        raise SolverError(f"Non-finite power witness at target {t:g}")
    if np.max(omega @ eta) > budget * (1.0 + BUDGET_RTOL):
        return Feasibility(False)
    return Feasibility(True, eta)


def interference_free_bound(
    omega: np.ndarray,
    p_ap: float,
    sigma2: float,
    signal_gain: Optional[np.ndarray] = None,
    budget: float = AP_BUDGET,
) -> float:
    """max_k P b_k eta_k^sup / sigma2 with eta_k^sup = min_m budget / omega_mk."""
    with np.errstate(divide="ignore"):
        eta_sup = np.min(np.where(omega > 0, budget / omega, np.inf), axis=0)
    if not np.all(np.isfinite(eta_sup)):
        raise SolverError("A user has no precoder power at any AP")
    b = _signal_gain(signal_gain, omega.shape[1])
    return float(np.max(p_ap * b * eta_sup / sigma2))


def solve_maxmin(
    gamma: np.ndarray,
    omega: np.ndarray,
    p_ap: float,
    sigma2: float,
    gamma_bar: Optional[np.ndarray] = None,
    signal_gain: Optional[np.ndarray] = None,
    tol: float = 1e-4,
    t_hi: Optional[float] = None,
    max_iter: int = 64,
    backend: str = FIXED_POINT,
    budget: float = AP_BUDGET,
) -> PowerSolution:
    """Max-min SINR power allocation by bisection on the common target.

    Stops once the bracket is narrower than ``tol`` relative to its upper
    end, or after ``max_iter`` checks. The target ``tol * t_hi`` is checked
    first; when it fails the allocation is flagged infeasible right away.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    coupling = gamma if gamma_bar is None else gamma + gamma_bar
    num_users = coupling.shape[0]
    if num_users == 0:
        empty = np.zeros(0)
        return PowerSolution(empty, 0.0, empty, empty, 0)

    lo = 0.0
    hi = t_hi
    if hi is None:
        hi = interference_free_bound(omega, p_ap, sigma2, signal_gain, budget)
    witness = np.zeros(num_users)

    # infeasible at the resolution floor means infeasible everywhere
    floor = feasibility_check(
        tol * hi, coupling, omega, p_ap, sigma2, signal_gain, budget, backend
    )
    iterations = 1
    if floor.feasible:
        lo, witness = tol * hi, floor.eta

    while floor.feasible and hi - lo > tol * hi and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        check = feasibility_check(
            mid, coupling, omega, p_ap, sigma2, signal_gain, budget, backend
        )
        if check.feasible:
            lo, witness = mid, check.eta
        else:
            hi = mid
        iterations += 1

    infeasible = lo == 0.0
    if infeasible:
        logger.warning(f"No positive SINR target is feasible for {num_users} users")
        witness = np.zeros(num_users)

    sinr = evaluate_sinr(witness, coupling, p_ap, sigma2, signal_gain)
    logger.debug(f"Bisection finished after {iterations} steps at t = {lo:.6g}")
    return PowerSolution(
        eta=witness,
        t_star=lo,
        sinr=sinr,
        rates=np.log2(1.0 + sinr),
        iterations=iterations,
        infeasible=infeasible,
    )
