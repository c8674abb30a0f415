from typing import Optional

from sqlalchemy.orm import Mapped, mapped_column

from .entity import BaseEntity


class TrialRecord(BaseEntity):
    """One raw result row: a strategy evaluated on one large-scale throw."""

    __tablename__ = "trial_results"

    strategy: Mapped[str] = mapped_column(index=True)
    num_cpus: Mapped[int] = mapped_column(index=True)
    num_users: Mapped[int] = mapped_column(index=True)
    throw: Mapped[int]
    seed: Mapped[int]
    min_rate: Mapped[Optional[float]]
    max_rate: Mapped[Optional[float]]
    quotient: Mapped[Optional[float]]
    mean_rate: Mapped[Optional[float]]
    t_star: Mapped[Optional[float]]
    ergodic_min_rate: Mapped[Optional[float]]
    ergodic_mean_rate: Mapped[Optional[float]]
    dropped_trials: Mapped[int] = mapped_column(default=0)
    version: Mapped[str]
    config_digest: Mapped[str] = mapped_column(index=True)
