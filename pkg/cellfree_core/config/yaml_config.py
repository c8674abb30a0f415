import os
from typing import Any, Dict, List, Optional

import yaml


class YamlConfig:
    """Layered YAML configuration: later layers override earlier keys."""

    def __init__(self, base: Optional[Dict[str, Any]] = None) -> None:
        self._config: Dict[str, Any] = dict(base or {})
        self._loaded_files: List[str] = []

    @property
    def loaded_files(self) -> List[str]:
        return list(self._loaded_files)

    def load(self, config_file: str) -> "YamlConfig":
        """Merge a YAML file on top of the current layers."""
        if not os.path.exists(config_file):
            raise FileNotFoundError(f"Configuration file not found: {config_file}")

        with open(config_file, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
        if config is None:
            config = {}
        if not isinstance(config, dict):
            raise ValueError(f"Top level of {config_file} must be a mapping")
        self._config.update(config)

        self._loaded_files.append(config_file)
        return self

    def update(self, values: Dict[str, Any]) -> "YamlConfig":
        """Merge an in-memory layer (presets, command-line overrides)."""
        self._config.update(values)
        return self

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value by key.

        Key can be a dot-separated path (e.g., 'presets.desk').
        """
        parts = key.split(".")
        value = self._config

        for part in parts:
            if isinstance(value, dict) and part in value:
                value = value[part]
            else:
                return default

        return value

    def as_dict(self) -> Dict[str, Any]:
        return dict(self._config)
