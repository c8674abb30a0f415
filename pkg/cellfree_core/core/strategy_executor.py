import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Type

from .errors import SimulationError
from .scenario import Scenario
from .strategy import ConnectivityStrategy, RateReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialOutcome:
    """Report of one strategy on one throw, or the reason it was dropped."""

    strategy: str
    report: Optional[RateReport] = None
    error: Optional[str] = None

    @property
    def dropped(self) -> bool:
        return self.report is None


class StrategyExecutor:
    """Runs connectivity strategies in order."""

    def __init__(self):
        self._strategies: Dict[str, ConnectivityStrategy] = {}

    @property
    def strategies(self) -> List[ConnectivityStrategy]:
        """Enabled strategies sorted by order."""
        return sorted(
            [s for s in self._strategies.values() if s.is_enabled],
            key=lambda s: s.order,
        )

    def add_strategy(self, strategy: ConnectivityStrategy) -> "StrategyExecutor":
        self._strategies[strategy.name] = strategy
        return self

    def configure_strategies(self, enabled: Iterable[str]) -> None:
        """Enable exactly the strategies whose tags are listed."""
        wanted = set(enabled)
        unknown = wanted - set(self._strategies)
        if unknown:
            raise ValueError(f"Unknown strategies: {', '.join(sorted(unknown))}")
        for name, strategy in self._strategies.items():
            strategy.configure({"enabled": name in wanted})

    def run_all(self, scenario: Scenario) -> List[TrialOutcome]:
        """Run every enabled strategy on one throw.

        A strategy that raises ``SimulationError`` is logged and reported as
        dropped; the other strategies still run.
        """
        outcomes = []
        for strategy in self.strategies:
            logger.info(
                f"Throw {scenario.throw}: running {strategy.name} "
                f"(D={scenario.num_cpus}, K={scenario.num_users})"
            )
            try:
                outcomes.append(TrialOutcome(strategy.name, report=strategy.run(scenario)))
            except SimulationError as e:
                logger.warning(
                    f"Throw {scenario.throw}: {strategy.name} dropped: {str(e)}"
                )
                outcomes.append(TrialOutcome(strategy.name, error=str(e)))
        return outcomes

    def discover_strategies(self) -> "StrategyExecutor":
        """Add every concrete ConnectivityStrategy subclass that has a tag."""
        found: List[Type[ConnectivityStrategy]] = []
        pending = list(ConnectivityStrategy.__subclasses__())
        while pending:
            cls = pending.pop()
            pending.extend(cls.__subclasses__())
            if cls.tag and cls not in found:
                found.append(cls)

        for strategy_class in sorted(found, key=lambda cls: cls.order):
            self.add_strategy(strategy_class())
            logger.debug(
                f"Discovered strategy {strategy_class.tag} "
                f"({strategy_class.__name__}, order {strategy_class.order})"
            )
        return self

    @classmethod
    def default(cls, enabled: Optional[Iterable[str]] = None) -> "StrategyExecutor":
        """Executor with SC, WC and NC registered, optionally restricted."""
        from . import strategies  # noqa: F401  registers the built-in strategies

        executor = cls().discover_strategies()
        if enabled is not None:
            executor.configure_strategies(enabled)
        return executor
