import logging
import subprocess
from functools import lru_cache
from pathlib import Path

__version__ = "0.1.0"

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1)
def version_string() -> str:
    """``git describe`` of the source checkout, or ``v<__version__>`` when the
    package is not running from a git work tree."""
    try:
        described = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError) as e:
        logger.debug(f"git describe unavailable: {str(e)}")
        described = ""
    return described or f"v{__version__}"
