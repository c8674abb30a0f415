from .errors import MonteCarloError, SimulationError, SingularPrecoderError, SolverError
from .seeding import Stream, derive_seed

__all__ = [
    "MonteCarloError",
    "SimulationError",
    "SingularPrecoderError",
    "SolverError",
    "Stream",
    "derive_seed",
]
