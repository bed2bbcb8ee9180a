##############################################################################
#
# Name: init_cmd.py
#
# Function:
#       InitCommand class for experiment directory initialization
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
from typing import TYPE_CHECKING, Any

from unlearn_lab.commands.base import BaseCommand
from unlearn_lab.config.manager import ConfigManager
from unlearn_lab.config.validator import SchemaValidator
from unlearn_lab.data.toy import write_toy_archive

if TYPE_CHECKING:
    import argparse

    from unlearn_lab.app import App


class InitCommand(BaseCommand):
    """Initialize an experiment directory for unlearn-lab.

    Creates the following structure:
    - .unlearn-lab/schemas/   JSON schemas for editor validation
    - unlearn-lab.json        Starter experiment file
    - data/toy.npz            Toy 10-class archive (with --toy-dataset)
    - Updates .gitignore with the run and store directories
    """

    PROJECT_DIR = ".unlearn-lab"
    SCHEMAS_SUBDIR = "schemas"
    TOY_ARCHIVE = Path("data") / "toy.npz"

    GITIGNORE_PATTERNS = [
        "# unlearn-lab",
        ".unlearn-lab/",
        "runs/",
    ]

    def __init__(self, app: App, args: argparse.Namespace) -> None:
        super().__init__(app, args)
        self._project_dir: Path | None = None

    def execute(self) -> int:
        path_arg = getattr(self.args, "path", ".") or "."
        target_dir = Path(path_arg).resolve()
        if not target_dir.exists():
            target_dir.mkdir(parents=True)
            self.app.log.info(f"Created directory: {target_dir}")
        self._project_dir = target_dir
        force = bool(getattr(self.args, "force", False))

        self._copy_schemas(force=force)
        dataset_path = "data/your-dataset"
        if getattr(self.args, "toy_dataset", False):
            dataset_path = self._write_toy(force=force)
        self._create_project_config(dataset_path, force=force)
        self._update_gitignore()

        self.console.print(
            f"\n[bold green]Experiment initialized at:[/bold green] {target_dir}\n"
        )
        self.console.print("Next: edit unlearn-lab.json, then run [bold]unlearn-lab train[/bold]")
        return 0

    def starter_config(self, dataset_path: str) -> dict[str, Any]:
        """Return the starter experiment tree written to unlearn-lab.json."""
        schema = f"./{self.PROJECT_DIR}/{self.SCHEMAS_SUBDIR}/experiment.schema.json"
        return {
            "$schema": schema,
            "dataset": {
                "source_path": dataset_path,
                "split_ratios": {"train": 0.8, "val": 0.1, "test": 0.1},
                "seed": 0,
            },
            "model": {"preset": "desk"},
            "train": {
                "mode": "epochs_with_early_stop",
                "max_epochs": 10,
                "patience": 3,
                "learning_rate": 0.001,
            },
            "subset": {"fraction": 0.1, "strategy": "mix"},
            "forget": {
                "classes": [0],
                "method": "rl",
                "mode": "real",
                "budget": {
                    "mode": "fixed_iterations",
                    "max_iterations": 300,
                    "learning_rate": 0.0001,
                },
            },
            "sweep": {
                "methods": ["rt", "ft", "rl"],
                "strategies": ["random", "top", "bottom", "mix"],
                "modes": ["real"],
            },
            "seeds": [1, 2, 3],
            "output_dir": "runs",
        }

    def _copy_schemas(self, *, force: bool) -> None:
        assert self._project_dir is not None
        schemas_dir = self._project_dir / self.PROJECT_DIR / self.SCHEMAS_SUBDIR
        schemas_dir.mkdir(parents=True, exist_ok=True)
        validator = SchemaValidator()
        for name in validator.SCHEMAS:
            dest = schemas_dir / validator.schema_file_name(name)
            if dest.exists() and not force:
                self.app.log.debug(f"Schema already exists: {dest}")
                continue
            dest.write_text(validator.schema_text(name), encoding="utf-8")
            self.app.log.debug(f"Copied schema: {dest.name}")
        self.app.log.info(f"Copied {len(validator.SCHEMAS)} schema files")

    def _write_toy(self, *, force: bool) -> str:
        assert self._project_dir is not None
        archive = self._project_dir / self.TOY_ARCHIVE
        if archive.exists() and not force:
            self.app.log.info(f"Toy archive already exists: {archive}")
        else:
            write_toy_archive(archive)
            self.app.log.info(f"Wrote toy archive: {archive}")
        return self.TOY_ARCHIVE.as_posix()

    def _create_project_config(self, dataset_path: str, *, force: bool) -> None:
        assert self._project_dir is not None
        config_path = self._project_dir / ConfigManager.PROJECT_CONFIG_FILE
        if config_path.exists() and not force:
            self.app.log.info(
                f"Project config already exists: {config_path} (use --force to overwrite)"
            )
            return
        with open(config_path, "w", encoding="utf-8") as f:
            json.dump(self.starter_config(dataset_path), f, indent=2)
            f.write("\n")
        self.app.log.info(f"Created project config: {config_path}")

    def _update_gitignore(self) -> None:
        assert self._project_dir is not None
        gitignore_path = self._project_dir / ".gitignore"
        existing: set[str] = set()
        if gitignore_path.exists():
            existing = {line.rstrip() for line in gitignore_path.read_text().splitlines()}
        missing = [p for p in self.GITIGNORE_PATTERNS if p not in existing]
        if not missing:
            self.app.log.debug(".gitignore already has all required patterns")
            return
        with open(gitignore_path, "a", encoding="utf-8") as f:
            if existing:
                f.write("\n")
            for pattern in missing:
                f.write(f"{pattern}\n")
        self.app.log.info(f"Updated .gitignore with {len(missing)} patterns")
