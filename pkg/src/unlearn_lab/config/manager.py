##############################################################################
#
# Name: manager.py
#
# Function:
#       User and project configuration layers with platformdirs integration
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import platformdirs

from unlearn_lab.errors import ConfigError


class ConfigManager:
    """Manage the user configuration and the project experiment file.

    Values are looked up in the project file first, then in the user file.
    """

    APP_NAME = "unlearn-lab"
    APP_AUTHOR = "unlearn-lab"

    CONFIG_FILE = "config.json"
    PROJECT_CONFIG_FILE = "unlearn-lab.json"

    class Error(ConfigError):
        """Exception raised for configuration errors."""

        pass

    def __init__(
        self, project_dir: Path | None = None, *, project_file: Path | None = None
    ) -> None:
        """Initialize the configuration manager.

        Args:
            project_dir: Project directory. Defaults to the working directory.
            project_file: Explicit experiment file; overrides
                ``project_dir / PROJECT_CONFIG_FILE``.
        """
        self._project_file = project_file
        if project_dir is None and project_file is not None:
            project_dir = project_file.parent
        self._project_dir = project_dir or Path.cwd()
        self._user_config_dir: Path | None = None
        self._user_config: dict[str, Any] | None = None
        self._project_config: dict[str, Any] | None = None

    @property
    def user_config_dir(self) -> Path:
        """Return the user-level configuration directory.

        - Linux: ~/.config/unlearn-lab/
        - macOS: ~/Library/Application Support/unlearn-lab/
        - Windows: %APPDATA%/unlearn-lab/unlearn-lab/
        """
        if self._user_config_dir is None:
            self._user_config_dir = Path(
                platformdirs.user_config_dir(appname=self.APP_NAME, appauthor=self.APP_AUTHOR)
            )
        return self._user_config_dir

    @property
    def project_dir(self) -> Path:
        return self._project_dir

    @property
    def user_config_path(self) -> Path:
        return self.user_config_dir / self.CONFIG_FILE

    @property
    def project_config_path(self) -> Path:
        return self._project_file or self._project_dir / self.PROJECT_CONFIG_FILE

    def _load(self, path: Path) -> dict[str, Any]:
        if not path.exists():
            return {}
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise self.Error(f"Invalid JSON in {path}: {e}") from e
        except OSError as e:
            raise self.Error(f"Cannot read {path}: {e}") from e
        if not isinstance(data, dict):
            raise self.Error(f"{path} must contain a JSON object")
        return data

    def _write(self, path: Path, config: dict[str, Any]) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(config, f, indent=2)
            f.write("\n")

    def load_user_config(self) -> dict[str, Any]:
        """Load user-level configuration; empty when the file is absent."""
        if self._user_config is None:
            self._user_config = self._load(self.user_config_path)
        return self._user_config

    def save_user_config(self, config: dict[str, Any]) -> None:
        self._write(self.user_config_path, config)
        self._user_config = config

    def load_project_config(self) -> dict[str, Any]:
        """Load the project experiment file; empty when the file is absent."""
        if self._project_config is None:
            self._project_config = self._load(self.project_config_path)
        return self._project_config

    def save_project_config(self, config: dict[str, Any]) -> None:
        self._write(self.project_config_path, config)
        self._project_config = config

    def get(self, key: str, default: Any = None) -> Any:
        """Get a value by dot-separated key (e.g. ``"subset.fraction"``).

        The project file takes priority over the user file.
        """
        for layer in (self.load_project_config(), self.load_user_config()):
            value = self._get_nested(layer, key)
            if value is not None:
                return value
        return default

    def set(self, key: str, value: Any, *, user_level: bool = True) -> None:
        """Set a value by dot-separated key in the user or project file."""
        config = self.get_all(user_level=user_level)
        self._set_nested(config, key, value)
        if user_level:
            self.save_user_config(config)
        else:
            self.save_project_config(config)

    def unset(self, key: str, *, user_level: bool = True) -> bool:
        """Remove a value; returns True if the key was present."""
        config = self.get_all(user_level=user_level)
        if not self._unset_nested(config, key):
            return False
        if user_level:
            self.save_user_config(config)
        else:
            self.save_project_config(config)
        return True

    def get_all(self, *, user_level: bool = True) -> dict[str, Any]:
        if user_level:
            return self.load_user_config()
        return self.load_project_config()

    def get_merged(self) -> dict[str, Any]:
        """Return the user file overlaid with the project file."""
        return self._deep_merge(self.load_user_config(), self.load_project_config())

    def _deep_merge(self, base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
        result = base.copy()
        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value
        return result

    def _get_nested(self, data: dict[str, Any], key: str) -> Any:
        current: Any = data
        for part in key.split("."):
            if not isinstance(current, dict) or part not in current:
                return None
            current = current[part]
        return current

    def _set_nested(self, data: dict[str, Any], key: str, value: Any) -> None:
        parts = key.split(".")
        current = data
        for part in parts[:-1]:
            if part not in current or not isinstance(current[part], dict):
                current[part] = {}
            current = current[part]
        current[parts[-1]] = value

    def _unset_nested(self, data: dict[str, Any], key: str) -> bool:
        parts = key.split(".")
        current: Any = data
        for part in parts[:-1]:
            if not isinstance(current, dict) or part not in current:
                return False
            current = current[part]
        if not isinstance(current, dict) or parts[-1] not in current:
            return False
        del current[parts[-1]]
        return True
