class SimulationError(Exception):
    """Base exception for failures raised while simulating a trial"""

    pass


class SingularPrecoderError(SimulationError):
    """Raised when a zero-forcing Gram matrix cannot be inverted"""

    pass


class MonteCarloError(SimulationError):
    """Raised when too many Monte-Carlo draws had to be discarded"""

    pass


class SolverError(SimulationError):
    """Raised when a feasibility backend fails (as opposed to reporting infeasible)"""

    pass
