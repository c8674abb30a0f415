"""Result table: raw per-throw rows plus per (strategy, D, K) aggregates,
written as CSV, JSON or into the SQLite results store."""

import asyncio
import json
import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from sqlalchemy.exc import SQLAlchemyError

from ..config.app_config import DatabaseConfig, config_digest
from ..data.db_context import DbContext, IDbContext
from ..data.repository import IRepository, Repository
from ..data.trial_record import TrialRecord

logger = logging.getLogger(__name__)

GROUP_KEYS = ["strategy", "D", "K"]
METRICS = [
    "min_rate",
    "max_rate",
    "quotient",
    "mean_rate",
    "t_star",
    "ergodic_min_rate",
    "ergodic_mean_rate",
]
RAW_COLUMNS = GROUP_KEYS + ["throw", "seed"] + METRICS + ["dropped_trials"]
STDERR_COLUMNS = [f"{name}_stderr" for name in METRICS]
COLUMNS = (
    ["row_type"]
    + RAW_COLUMNS
    + ["n_trials"]
    + STDERR_COLUMNS
    + ["version", "config_digest", "config"]
)
FORMATS = ("csv", "json", "sqlite")


def _stderr(values: pd.Series) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(n))


def _native(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class ResultTable:
    """Raw rows of a run and the aggregates derived from them."""

    def __init__(
        self,
        raw: pd.DataFrame,
        version: str,
        config: Optional[Dict[str, Any]] = None,
    ):
        self.raw = raw.reindex(columns=RAW_COLUMNS)
        self.version = version
        self.config = dict(config or {})
        self.config_digest = config_digest(self.config)

    @property
    def config_json(self) -> str:
        return json.dumps(self.config, sort_keys=True)

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Dict[str, Any]],
        version: str,
        config: Optional[Dict[str, Any]] = None,
    ) -> "ResultTable":
        return cls(pd.DataFrame(list(rows), columns=RAW_COLUMNS), version, config)

    def __len__(self) -> int:
        return len(self.raw)

    def aggregates(self) -> pd.DataFrame:
        """Mean and standard error of every metric over the non-dropped rows
        of each (strategy, D, K) group, in order of first appearance."""
        records = []
        for (strategy, d, k), group in self.raw.groupby(GROUP_KEYS, sort=False):
            kept = group[group["dropped_trials"] == 0]
            record: Dict[str, Any] = {
                "strategy": strategy,
                "D": d,
                "K": k,
                "n_trials": len(kept),
                "dropped_trials": int(group["dropped_trials"].sum()),
            }
            for name in METRICS:
                values = kept[name].astype(float)
                record[name] = float(values.mean()) if len(kept) else float("nan")
                record[f"{name}_stderr"] = _stderr(values)
            records.append(record)
        columns = GROUP_KEYS + ["n_trials", "dropped_trials"] + METRICS + STDERR_COLUMNS
        return pd.DataFrame(records, columns=columns)

    def to_frame(self) -> pd.DataFrame:
        """Raw rows followed by aggregate rows, in the fixed column order."""
        raw = self.raw.assign(row_type="raw")
        aggregates = self.aggregates().assign(row_type="aggregate")
        frames = [frame for frame in (raw, aggregates) if len(frame)]
        if frames:
            frame = pd.concat(frames, ignore_index=True)
        else:
            frame = pd.DataFrame(columns=COLUMNS)
        frame["version"] = self.version
        frame["config_digest"] = self.config_digest
        frame["config"] = self.config_json
        return frame.reindex(columns=COLUMNS)

    def to_json_dict(self) -> Dict[str, Any]:
        def records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
            return [
                {key: _native(value) for key, value in row.items()}
                for row in frame.to_dict(orient="records")
            ]

        return {
            "version": self.version,
            "config": self.config,
            "columns": RAW_COLUMNS,
            "rows": records(self.raw),
            "aggregates": records(self.aggregates()),
        }

    def trial_records(self) -> List[TrialRecord]:
        records = []
        for row in self.raw.to_dict(orient="records"):
            values = {key: _native(value) for key, value in row.items()}
            records.append(
                TrialRecord(
                    strategy=values["strategy"],
                    num_cpus=values["D"],
                    num_users=values["K"],
                    throw=values["throw"],
                    seed=values["seed"],
                    min_rate=values["min_rate"],
                    max_rate=values["max_rate"],
                    quotient=values["quotient"],
                    mean_rate=values["mean_rate"],
                    t_star=values["t_star"],
                    ergodic_min_rate=values["ergodic_min_rate"],
                    ergodic_mean_rate=values["ergodic_mean_rate"],
                    dropped_trials=values["dropped_trials"],
                    version=self.version,
                    config_digest=self.config_digest,
                )
            )
        return records


def write_csv(table: ResultTable, path: str) -> None:
    table.to_frame().to_csv(
        path,
        index=False,
        float_format="%.12g",
        encoding="utf-8",
        lineterminator="\r\n",
    )


def write_json(table: ResultTable, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(table.to_json_dict(), f, indent=2, allow_nan=False)
        f.write("\n")


async def store_results(
    table: ResultTable,
    db_config: Optional[DatabaseConfig] = None,
    db_context: Optional[IDbContext] = None,
) -> int:
    """Insert the raw rows into the ``trial_results`` table.

    A ``db_context`` passed in is left open for the caller; otherwise one is
    built from ``db_config`` and closed again.
    """
    if db_context is None and db_config is None:
        raise ValueError("store_results needs a db_config or a db_context")
    owned = db_context is None
    context: IDbContext = DbContext(db_config) if db_context is None else db_context
    try:
        await context.create_schema()
        async with context.session_context() as session:
            repository: IRepository[TrialRecord] = Repository(session, TrialRecord)
            created = await repository.create_many(table.trial_records())
        logger.info(f"Stored {len(created)} trial rows in {context.connection_string}")
        return len(created)
    finally:
        if owned:
            await context.close()


def emit_results(table: ResultTable, path: str, fmt: str = "csv") -> None:
    """Write ``table`` to ``path``; I/O failures carry the path."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown output format '{fmt}'; use one of {list(FORMATS)}")
    try:
        if fmt == "csv":
            write_csv(table, path)
        elif fmt == "json":
            write_json(table, path)
        else:
            asyncio.run(store_results(table, DatabaseConfig.for_path(path)))
    except (OSError, SQLAlchemyError) as e:
        raise OSError(f"Cannot write {fmt} results to {path}: {e}") from e
    logger.info(f"Wrote {len(table)} raw rows as {fmt} to {path}")
