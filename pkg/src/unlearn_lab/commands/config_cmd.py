##############################################################################
#
# Name: config_cmd.py
#
# Function:
#       ConfigCommand class for configuration management
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
from typing import Any

from unlearn_lab.commands.base import BaseCommand


class ConfigCommand(BaseCommand):
    """Get or set configuration values.

    Usage:
        config <key>                  Get a value (project file, then user file)
        config <key> <value>          Set a value in the user file
        config <key> <value> --project
                                      Set a value in the project experiment file
        config <key> --unset [--project]  Remove a value
        config --list                 Show the merged configuration
    """

    def execute(self) -> int:
        if getattr(self.args, "list", False):
            return self._list_config()
        key = getattr(self.args, "key", None)
        if not key:
            self._print_usage()
            return 0
        if getattr(self.args, "unset", False):
            return self._unset_value(key)
        value = getattr(self.args, "value", None)
        if value is None:
            return self._get_value(key)
        return self._set_value(key, value)

    def _get_value(self, key: str) -> int:
        value = self.app.config_manager.get(key)
        if value is None:
            self.app.log.warning(f"Key '{key}' is not set")
            return 0
        print(json.dumps(value, indent=2) if isinstance(value, (dict, list)) else value)
        return 0

    def _set_value(self, key: str, value: str) -> int:
        parsed = self._parse_value(value)
        project = bool(getattr(self.args, "project", False))
        self.app.config_manager.set(key, parsed, user_level=not project)
        where = "project" if project else "user"
        self.app.log.info(f"Set {key} = {parsed!r} ({where} config)")
        return 0

    def _unset_value(self, key: str) -> int:
        project = bool(getattr(self.args, "project", False))
        if not self.app.config_manager.unset(key, user_level=not project):
            self.app.log.warning(f"Key '{key}' is not set")
        return 0

    def _parse_value(self, value: str) -> Any:
        """Parse ``value`` as JSON, falling back to the plain string."""
        try:
            return json.loads(value)
        except json.JSONDecodeError:
            return value

    def _list_config(self) -> int:
        merged = self.app.config_manager.get_merged()
        if not merged:
            print("No configuration values set")
            return 0
        print(json.dumps(merged, indent=2))
        return 0

    def _print_usage(self) -> None:
        print(
            """Usage: unlearn-lab config [OPTIONS] [KEY] [VALUE]

Get or set configuration values.

Examples:
  unlearn-lab config subset.fraction                  # Get a value
  unlearn-lab config subset.fraction 0.1 --project    # Set in unlearn-lab.json
  unlearn-lab config store.root ~/lab-store           # Set in the user config
  unlearn-lab config store.root --unset              # Remove from the user config
  unlearn-lab config --list                           # Show merged values

Keys use dot notation for nested values (e.g., forget.budget.max_iterations)."""
        )
