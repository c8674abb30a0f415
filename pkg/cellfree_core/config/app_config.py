import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import yaml

from ..network.channel import LargeScaleParams
from ..network.power_control import BACKENDS
from .yaml_config import YamlConfig

logger = logging.getLogger(__name__)

STRATEGY_TAGS = ("sc", "wc", "nc")
RATE_MODES = ("spectral", "net")
ASSOCIATION_SCALES = ("linear", "db")
PILOT_METHODS = ("fingerprint", "random")

PRESETS: Dict[str, Dict[str, Any]] = {
    "desk": {
        "num_aps": 100,
        "num_users": 12,
        "num_cpus": 3,
        "n_throws": 20,
        "n_fading": 50,
        "n_mc": 500,
    },
    "full": {
        "num_aps": 100,
        "num_users": 40,
        "num_cpus": 4,
        "n_throws": 200,
        "n_fading": 1000,
        "n_mc": 1000,
    },
}


class ConfigError(Exception):
    """Base exception for configuration errors"""

    pass


@dataclass
class DatabaseConfig:
    """SQLite results store parameters"""

    database: Optional[str] = "cellfree-results.db"
    driver: str = "aiosqlite"
    is_memory_db: bool = False

    @property
    def connection_string(self) -> str:
        """Generate SQLAlchemy connection string"""
        if self.is_memory_db:
            return f"sqlite+{self.driver}:///:memory:"
        return f"sqlite+{self.driver}:///{self.database}"

    @classmethod
    def for_path(cls, path: str) -> "DatabaseConfig":
        if path == ":memory:":
            return cls(database=None, is_memory_db=True)
        return cls(database=path)


def config_digest(echo: Dict[str, Any]) -> str:
    """SHA-256 of a configuration echo serialised as canonical JSON."""
    canonical = json.dumps(echo, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _as_int(key: str, value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    if not number.is_integer():
        raise ConfigError(f"'{key}' must be an integer, got {value!r}")
    return int(number)


def _as_float(key: str, value: Any) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' must be a number, got {value!r}")


def _as_tags(key: str, value: Any) -> List[str]:
    if isinstance(value, str):
        value = value.split(",")
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"'{key}' must be a list of strategy tags")
    tags = [str(tag).strip().lower() for tag in value if str(tag).strip()]
    unknown = [tag for tag in tags if tag not in STRATEGY_TAGS]
    if unknown:
        raise ConfigError(f"'{key}' has unknown strategies {unknown}; use {list(STRATEGY_TAGS)}")
    if not tags:
        raise ConfigError(f"'{key}' must name at least one strategy")
    return sorted(set(tags), key=STRATEGY_TAGS.index)


def _choice(key: str, value: Any, allowed) -> str:
    text = str(value).strip().lower()
    if text not in allowed:
        raise ConfigError(f"'{key}' must be one of {list(allowed)}, got {value!r}")
    return text


@dataclass
class ScenarioConfig:
    """Flat scenario configuration; every key may be set in the YAML file."""

    num_aps: int = 100
    num_users: int = 40
    num_cpus: int = 4
    side_length_m: float = 1000.0
    p_ap_w: float = 0.2
    p_ms_w: float = 0.1
    tau_c: float = 200.0
    tau_p: int = 15
    tau_dl: float = 92.5
    tau_ul: float = 92.5
    noise_psd_dbm_per_hz: float = -174.0
    noise_figure_db: float = 9.0
    bandwidth_hz: float = 20.0e6
    carrier_freq_mhz: float = 1900.0
    ap_height_m: float = 15.0
    ms_height_m: float = 1.65
    d0_m: float = 10.0
    d1_m: float = 50.0
    shadow_sigma_db: float = 8.0
    shadow_delta: float = 0.5
    decorr_dist_m: float = 100.0
    n_throws: int = 200
    n_fading: int = 1000
    n_mc: int = 1000
    mc_batch_size: int = 250
    bisection_tol: float = 1e-4
    bisection_max_iter: int = 64
    feasibility_backend: str = "fixed_point"
    master_seed: int = 0
    strategies: List[str] = field(default_factory=lambda: list(STRATEGY_TAGS))
    rate_mode: str = "spectral"
    association_scale: str = "linear"
    pilot_allocation: str = "fingerprint"
    kmeans_restarts: int = 10
    max_singular_fraction: float = 0.1
    workers: int = 1

    _INT_KEYS = (
        "num_aps",
        "num_users",
        "num_cpus",
        "tau_p",
        "n_throws",
        "n_fading",
        "n_mc",
        "mc_batch_size",
        "bisection_max_iter",
        "master_seed",
        "kmeans_restarts",
        "workers",
    )

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> "ScenarioConfig":
        """Create and validate a ScenarioConfig from a flat mapping"""
        unknown = sorted(set(config) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {unknown}")

        values: Dict[str, Any] = {}
        for name, value in config.items():
            if name in cls._INT_KEYS:
                values[name] = _as_int(name, value)
            elif name == "strategies":
                values[name] = _as_tags(name, value)
            elif name == "feasibility_backend":
                values[name] = _choice(name, value, BACKENDS)
            elif name == "rate_mode":
                values[name] = _choice(name, value, RATE_MODES)
            elif name == "association_scale":
                values[name] = _choice(name, value, ASSOCIATION_SCALES)
            elif name == "pilot_allocation":
                values[name] = _choice(name, value, PILOT_METHODS)
            else:
                values[name] = _as_float(name, value)

        scenario = cls(**values)
        scenario.validate()
        return scenario

    @classmethod
    def load(
        cls,
        path: Optional[str] = None,
        preset: Optional[str] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> "ScenarioConfig":
        """Defaults, then ``preset``, then the YAML file, then ``overrides``."""
        layers = YamlConfig()
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"Unknown preset '{preset}'; use {sorted(PRESETS)}")
            layers.update(PRESETS[preset])
        if path is not None:
            try:
                layers.load(path)
            except FileNotFoundError as e:
                raise ConfigError(str(e))
            except yaml.YAMLError as e:
                raise ConfigError(f"Error parsing YAML configuration {path}: {str(e)}")
            except ValueError as e:
                raise ConfigError(str(e))
            logger.info(f"Configuration loaded from {path}")
        if overrides:
            layers.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(layers.as_dict())

    def validate(self) -> None:
        positive = (
            "num_aps",
            "num_users",
            "side_length_m",
            "p_ap_w",
            "p_ms_w",
            "tau_c",
            "tau_p",
            "tau_dl",
            "bandwidth_hz",
            "n_throws",
            "n_fading",
            "n_mc",
            "mc_batch_size",
            "bisection_tol",
            "bisection_max_iter",
            "kmeans_restarts",
            "workers",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"'{name}' must be positive, got {getattr(self, name)}")
        if self.tau_ul < 0:
            raise ConfigError(f"'tau_ul' must be non-negative, got {self.tau_ul}")
        if not 1 <= self.num_cpus <= self.num_aps:
            raise ConfigError(
                f"'num_cpus' must be between 1 and num_aps={self.num_aps}, got {self.num_cpus}"
            )
        if self.tau_p + self.tau_dl + self.tau_ul > self.tau_c:
            raise ConfigError(
                "Frame budget violated: tau_p + tau_dl + tau_ul <= tau_c required, got "
                f"{self.tau_p} + {self.tau_dl} + {self.tau_ul} > {self.tau_c}"
            )
        if self.master_seed < 0:
            raise ConfigError(f"'master_seed' must be non-negative, got {self.master_seed}")
        if not 0.0 <= self.max_singular_fraction < 1.0:
            raise ConfigError("'max_singular_fraction' must be in [0, 1)")
        try:
            self.large_scale
        except ValueError as e:
            raise ConfigError(f"Invalid large-scale parameters: {str(e)}")

    @property
    def large_scale(self) -> LargeScaleParams:
        return LargeScaleParams.from_dict(self.to_dict())

    def replace(self, **changes: Any) -> "ScenarioConfig":
        values = self.to_dict()
        values.update(changes)
        return ScenarioConfig.from_dict(values)

    def to_dict(self) -> Dict[str, Any]:
        """Resolved configuration echo."""
        return asdict(self)

    def echo(self) -> Dict[str, Any]:
        """Configuration echo written next to the results; the worker count
        does not change any number so it is left out."""
        values = self.to_dict()
        values.pop("workers")
        return values

    def digest(self) -> str:
        """SHA-256 of the canonical JSON echo."""
        return config_digest(self.echo())
