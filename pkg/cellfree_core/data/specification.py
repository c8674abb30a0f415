from typing import Any, Generic, Protocol, TypeVar

from .trial_record import TrialRecord

T = TypeVar("T", contravariant=True)


class ISpecification(Generic[T], Protocol):
    def is_satisfied_by(self, entity: T) -> bool: ...
    def to_expression(self) -> Any: ...


class Specification(Generic[T], ISpecification[T]):
    def is_satisfied_by(self, entity: T) -> bool:
        raise NotImplementedError

    def to_expression(self) -> Any:
        # SQLAlchemy where-clause
        raise NotImplementedError

    def and_(self, other: ISpecification[T]) -> "Specification[T]":
        return AndSpecification(self, other)

    def or_(self, other: ISpecification[T]) -> "Specification[T]":
        return OrSpecification(self, other)


class AndSpecification(Specification[T]):
    def __init__(self, left: ISpecification[T], right: ISpecification[T]):
        self._left = left
        self._right = right

    def is_satisfied_by(self, entity: T) -> bool:
        return self._left.is_satisfied_by(entity) and self._right.is_satisfied_by(
            entity
        )

    def to_expression(self) -> Any:
        return self._left.to_expression() & self._right.to_expression()


class OrSpecification(Specification[T]):
    def __init__(self, left: ISpecification[T], right: ISpecification[T]):
        self._left = left
        self._right = right

    def is_satisfied_by(self, entity: T) -> bool:
        return self._left.is_satisfied_by(entity) or self._right.is_satisfied_by(entity)

    def to_expression(self) -> Any:
        return self._left.to_expression() | self._right.to_expression()


class StrategySpecification(Specification[TrialRecord]):
    """Rows produced by one connectivity strategy."""

    def __init__(self, strategy: str):
        self.strategy = strategy

    def is_satisfied_by(self, entity: TrialRecord) -> bool:
        return entity.strategy == self.strategy

    def to_expression(self) -> Any:
        return TrialRecord.strategy == self.strategy


class LoadSpecification(Specification[TrialRecord]):
    """Rows with a given number of users K."""

    def __init__(self, num_users: int):
        self.num_users = num_users

    def is_satisfied_by(self, entity: TrialRecord) -> bool:
        return entity.num_users == self.num_users

    def to_expression(self) -> Any:
        return TrialRecord.num_users == self.num_users


class CpuCountSpecification(Specification[TrialRecord]):
    """Rows with a given number of CPUs D."""

    def __init__(self, num_cpus: int):
        self.num_cpus = num_cpus

    def is_satisfied_by(self, entity: TrialRecord) -> bool:
        return entity.num_cpus == self.num_cpus

    def to_expression(self) -> Any:
        return TrialRecord.num_cpus == self.num_cpus
