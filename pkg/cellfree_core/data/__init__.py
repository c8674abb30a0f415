from .db_context import DbContext, IDbContext
from .entity import BaseEntity
from .repository import IRepository, Repository
from .specification import (
    CpuCountSpecification,
    ISpecification,
    LoadSpecification,
    Specification,
    StrategySpecification,
)
from .trial_record import TrialRecord

__all__ = [
    "BaseEntity",
    "CpuCountSpecification",
    "DbContext",
    "IDbContext",
    "IRepository",
    "ISpecification",
    "LoadSpecification",
    "Repository",
    "Specification",
    "StrategySpecification",
    "TrialRecord",
]
