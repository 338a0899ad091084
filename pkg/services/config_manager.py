"""Configuration manager for evidencia.

Settings are layered, later layers winning:
- Built-in defaults (DEFAULT_CONFIG)
- An optional JSON file (``--config PATH`` or the EVIDENCIA_CONFIG variable)
- Environment overrides (EVIDENCIA_THREADS)

Values are read with dot notation, e.g. ``get("simulation.seed")``.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from services.errors import ConfigError

logger = logging.getLogger(__name__)

CONFIG_ENV = "EVIDENCIA_CONFIG"
THREADS_ENV = "EVIDENCIA_THREADS"

DEFAULT_CONFIG: Dict[str, Any] = {
    "simulation": {
        "n": 32,
        "replicates": 4096,
        "seed": 0xD1CE,
    },
    "runtime": {
        "threads": 0,
    },
    "output": {
        "format": "csv",
    },
}


class ConfigManager:
    """Resolves evidencia settings from defaults, a JSON file and the environment."""

    def __init__(self, config_path: Optional[str] = None, environ: Optional[Mapping[str, str]] = None):
        self._environ = os.environ if environ is None else environ
        path = config_path or self._environ.get(CONFIG_ENV)
        self.config_path = Path(path) if path else None
        self._config: Dict[str, Any] = {}

    def load(self) -> Dict[str, Any]:
        """Load the layered configuration.

        Returns:
            Dict containing the resolved configuration

        Raises:
            ConfigError: the JSON file is missing, unreadable or malformed
        """
        self._load_defaults()
        if self.config_path is not None:
            self._merge(self._config, self._load_from_file())
        self._load_from_environment()
        return self._config

    def _load_defaults(self) -> None:
        self._config = self._deep_copy(DEFAULT_CONFIG)

    def _load_from_file(self) -> Dict[str, Any]:
        """Read the JSON configuration file."""
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                file_config = json.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file '{self.config_path}' not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config file '{self.config_path}' is not valid JSON (line {exc.lineno}: {exc.msg})"
            ) from exc
        except OSError as exc:
            raise ConfigError(f"cannot read config file '{self.config_path}': {exc}") from exc
        if not isinstance(file_config, dict):
            raise ConfigError(f"config file '{self.config_path}' must hold a JSON object")
        logger.debug("loaded configuration from %s", self.config_path)
        return file_config

    def _load_from_environment(self) -> None:
        raw = self._environ.get(THREADS_ENV)
        if raw is None or raw.strip() == "":
            return
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer (got '{raw}')") from exc
        if threads < 0:
            raise ConfigError(f"{THREADS_ENV} must be >= 0 (got {threads})")
        self.set("runtime.threads", threads)

    def _merge(self, base: Dict[str, Any], override: Dict[str, Any]) -> None:
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                self._merge(base[key], value)
            else:
                base[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration value using dot notation.

        Args:
            key: Dot-separated key path (e.g., 'simulation.seed')
            default: Default value if key not found

        Returns:
            The configuration value or default
        """
        keys = key.split(".")
        value = self._config
        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
                if value is None:
                    return default
            else:
                return default
        return value if value is not None else default

    def set(self, key: str, value: Any) -> None:
        """Set a configuration value in memory using dot notation."""
        keys = key.split(".")
        config = self._config
        for k in keys[:-1]:
            config = config.setdefault(k, {})
        config[keys[-1]] = value

    def get_config(self) -> Dict[str, Any]:
        """Get the full resolved configuration dictionary."""
        return self._config

    def _deep_copy(self, d: Dict[str, Any]) -> Dict[str, Any]:
        """Create a deep copy of a dictionary."""
        return json.loads(json.dumps(d))
