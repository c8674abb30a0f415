"""Logging setup shared by the CLI and long-running sweeps."""

import logging
from typing import Optional, Union

from ...config.environment import Environment

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_LEVEL = "INFO"


def resolve_level(level: Optional[Union[str, int]] = None) -> int:
    """Resolve a level name or number, falling back to CELLFREE_LOG_LEVEL."""
    if level is None:
        level = Environment.get("CELLFREE_LOG_LEVEL", DEFAULT_LEVEL)
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(str(level).upper())
    if not isinstance(resolved, int):
        raise ValueError(f"Unknown log level: {level}")
    return resolved


def configure_logging(level: Optional[Union[str, int]] = None) -> None:
    """Install the package stream handler, replacing one installed earlier."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_cellfree", False):
            root.removeHandler(handler)

    handler = logging.StreamHandler()
    handler._cellfree = True  # type: ignore[attr-defined]
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(resolve_level(level))


__all__ = ["configure_logging", "resolve_level", "LOG_FORMAT"]
