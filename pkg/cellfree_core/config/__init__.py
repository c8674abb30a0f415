from .app_config import PRESETS, ConfigError, DatabaseConfig, ScenarioConfig
from .environment import Environment
from .yaml_config import YamlConfig

__all__ = [
    "ConfigError",
    "DatabaseConfig",
    "Environment",
    "PRESETS",
    "ScenarioConfig",
    "YamlConfig",
]
