##############################################################################
#
# Name: app.py
#
# Function:
#       Main application class for the unlearn-lab CLI
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

from unlearn_lab.__version__ import __version__
from unlearn_lab.commands.base import BaseCommand, CommandError
from unlearn_lab.commands.config_cmd import ConfigCommand
from unlearn_lab.commands.eval_cmd import EvalCommand
from unlearn_lab.commands.export_cmd import ExportFeaturesCommand
from unlearn_lab.commands.forget_cmd import ForgetCommand
from unlearn_lab.commands.init_cmd import InitCommand
from unlearn_lab.commands.report_cmd import ReportCommand
from unlearn_lab.commands.sweep_cmd import SweepCommand
from unlearn_lab.commands.train_cmd import TrainCommand
from unlearn_lab.config.experiment import ExperimentConfig, load_experiment, resolve_store_root
from unlearn_lab.config.manager import ConfigManager
from unlearn_lab.data.dataset import LabeledImageDataset, load_dataset
from unlearn_lab.errors import (
    ConfigError,
    StoreIntegrityError,
    TrainingDivergedError,
    UnlearnLabError,
)
from unlearn_lab.metadata import get_homepage_url, get_issues_url
from unlearn_lab.store.model_store import ModelStore

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_STORE = 4
EXIT_INTERRUPTED = 130


def exit_code_for(error: BaseException) -> int:
    """Map an error to the CLI exit code."""
    if isinstance(error, CommandError):
        return error.exit_code
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, TrainingDivergedError):
        return EXIT_DIVERGED
    if isinstance(error, StoreIntegrityError):
        return EXIT_STORE
    return EXIT_FAILURE


class App:
    """Main application class for unlearn-lab."""

    Error = UnlearnLabError

    COMMANDS: dict[str, type[BaseCommand]] = {
        "init": InitCommand,
        "config": ConfigCommand,
        "train": TrainCommand,
        "forget": ForgetCommand,
        "sweep": SweepCommand,
        "eval": EvalCommand,
        "export-features": ExportFeaturesCommand,
        "report": ReportCommand,
    }

    def __init__(self, args: Sequence[str] | None = None, *, _testing: bool = False) -> None:
        """Initialize the application.

        Args:
            args: Command-line arguments. If None, uses sys.argv[1:].
            _testing: If True, boolean options default to None instead of
                False, so tests can tell "not given" from "given as False".
        """
        self._raw_args = list(args) if args is not None else sys.argv[1:]
        self._testing = _testing
        self._args: argparse.Namespace | None = None
        self._logger: logging.Logger | None = None
        self._config_manager: ConfigManager | None = None
        self._experiment: ExperimentConfig | None = None
        self._store: ModelStore | None = None
        self._dataset: LabeledImageDataset | None = None

    @property
    def args(self) -> argparse.Namespace:
        if self._args is None:
            self._args = self._parse_arguments()
        return self._args

    @property
    def log(self) -> logging.Logger:
        if self._logger is None:
            self._logger = self._setup_logging()
        return self._logger

    @property
    def config_manager(self) -> ConfigManager:
        """Return the configuration manager (honouring ``--config``)."""
        if self._config_manager is None:
            config = getattr(self.args, "config", None)
            project_file = Path(config).expanduser().resolve() if config else None
            self._config_manager = ConfigManager(project_file=project_file)
        return self._config_manager

    @property
    def experiment(self) -> ExperimentConfig:
        """Return the validated experiment configuration, loading it on first use."""
        if self._experiment is None:
            self._experiment = load_experiment(self.config_manager)
        return self._experiment

    @property
    def store(self) -> ModelStore:
        """Return the model store at the resolved store root."""
        if self._store is None:
            cli_store = getattr(self.args, "store", None)
            root = resolve_store_root(
                self.experiment, Path(cli_store).expanduser() if cli_store else None
            )
            self.log.debug(f"Model store: {root}")
            self._store = ModelStore(root)
        return self._store

    @property
    def dataset(self) -> LabeledImageDataset:
        if self._dataset is None:
            self._dataset = load_dataset(self.experiment.dataset)
            self.log.info(
                f"Loaded dataset {self._dataset.dataset_id}: {len(self._dataset)} samples, "
                f"{self._dataset.num_classes} classes"
            )
        return self._dataset

    def _create_parser(self, *, _testing: bool = False) -> argparse.ArgumentParser:
        """Create the argument parser with all options."""
        links = [
            f"{label}: {url}"
            for label, url in (("Homepage", get_homepage_url()), ("Issues", get_issues_url()))
            if url
        ]
        parser = argparse.ArgumentParser(
            prog="unlearn-lab",
            description=(
                "Train an image classifier, keep a small confidence-ranked subset of "
                "its data, and forget classes on request"
            ),
            epilog="\n".join(links) or None,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        bool_default = None if _testing else False

        parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        parser.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="Increase verbosity (can repeat: -vv)",
        )
        parser.add_argument(
            "-q",
            "--quiet",
            action=argparse.BooleanOptionalAction,
            default=bool_default,
            help="Suppress non-error output",
        )
        parser.add_argument(
            "--debug",
            action=argparse.BooleanOptionalAction,
            default=bool_default,
            help="Enable debug mode (show stack traces)",
        )
        parser.add_argument(
            "--config",
            metavar="PATH",
            help=f"Experiment file (default: ./{ConfigManager.PROJECT_CONFIG_FILE})",
        )
        parser.add_argument(
            "--store",
            metavar="PATH",
            help="Model store directory (overrides UNLEARN_LAB_STORE and store.root)",
        )

        subparsers = parser.add_subparsers(
            dest="command", title="commands", description="Available commands"
        )

        init_parser = subparsers.add_parser("init", help="Initialize an experiment directory")
        init_parser.add_argument(
            "path",
            nargs="?",
            default=".",
            help="Directory to initialize (default: current directory)",
        )
        init_parser.add_argument(
            "--force",
            action=argparse.BooleanOptionalAction,
            default=bool_default,
            help="Overwrite existing files",
        )
        init_parser.add_argument(
            "--toy-dataset",
            action=argparse.BooleanOptionalAction,
            default=bool_default,
            help="Write a toy 10-class archive and point the experiment at it",
        )

        config_parser = subparsers.add_parser("config", help="Get or set configuration values")
        config_parser.add_argument("key", nargs="?", help="Key (e.g., subset.fraction)")
        config_parser.add_argument("value", nargs="?", help="Value to set (omit to get)")
        config_parser.add_argument(
            "--list",
            action=argparse.BooleanOptionalAction,
            default=bool_default,
            help="List all configuration values",
        )
        config_parser.add_argument(
            "--unset",
            action=argparse.BooleanOptionalAction,
            default=bool_default,
            help="Remove KEY instead of getting or setting it",
        )
        config_parser.add_argument(
            "--project",
            action=argparse.BooleanOptionalAction,
            default=bool_default,
            help="Write to the project experiment file instead of the user config",
        )

        subparsers.add_parser("train", help="Train the original model and fill the store")

        forget_parser = subparsers.add_parser("forget", help="Forget one or more classes")
        forget_parser.add_argument(
            "--classes", metavar="C[,C...]", help="Classes to forget (default: forget.classes)"
        )
        forget_parser.add_argument("--method", choices=["rt", "ft", "rl"], help="Method")
        forget_parser.add_argument(
            "--mode", choices=["real", "noise", "generated"], help="Source of forget data"
        )
        forget_parser.add_argument(
            "--iters", type=int, metavar="N", help="Fixed iteration budget"
        )
        forget_parser.add_argument("--seed", type=int, help="Seed (default: first of seeds)")

        subparsers.add_parser("sweep", help="Run the configured sweep grid")

        eval_parser = subparsers.add_parser("eval", help="Evaluate a stored checkpoint")
        eval_parser.add_argument(
            "--checkpoint", metavar="DIGEST", help="Checkpoint digest prefix (default: current)"
        )
        eval_parser.add_argument(
            "--scope", choices=["full_split", "stored_subset"], help="Train-split population"
        )

        export_parser = subparsers.add_parser(
            "export-features", help="Write penultimate-layer features to CSV"
        )
        export_parser.add_argument("path", help="Output CSV file")
        export_parser.add_argument(
            "--checkpoint", metavar="DIGEST", help="Checkpoint digest prefix (default: current)"
        )
        export_parser.add_argument(
            "--split", choices=["train", "val", "test"], default="test", help="Split to export"
        )

        report_parser = subparsers.add_parser(
            "report", help="Rebuild the comparison table from sweep records"
        )
        report_parser.add_argument(
            "records", nargs="?", help="records.jsonl (default: <output_dir>/sweep)"
        )
        report_parser.add_argument(
            "--format", choices=["text", "markdown", "csv"], default="text", help="Output format"
        )
        report_parser.add_argument("--title", default="", help="Table title")

        return parser

    def _parse_arguments(self) -> argparse.Namespace:
        parser = self._create_parser(_testing=self._testing)
        return parser.parse_args(self._raw_args)

    def _setup_logging(self) -> logging.Logger:
        """Configure and return the package logger."""
        logger = logging.getLogger("unlearn_lab")

        if self.args.debug:
            level = logging.DEBUG
        elif self.args.quiet:
            level = logging.ERROR
        elif self.args.verbose >= 2:
            level = logging.DEBUG
        elif self.args.verbose >= 1:
            level = logging.INFO
        else:
            level = logging.WARNING

        logger.setLevel(level)
        if not logger.handlers:
            handler = logging.StreamHandler()
            handler.setLevel(level)
            handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
            logger.addHandler(handler)
        return logger

    def run(self) -> int:
        """Run the application and return the exit code.

        Exit codes: 0 success, 1 other failure, 2 configuration error,
        3 training diverged, 4 store integrity error.
        """
        try:
            command_name = self.args.command
            if command_name is None:
                self._create_parser().print_help()
                return EXIT_OK
            command = self.COMMANDS[command_name](self, self.args)
            return command.execute()
        except UnlearnLabError as e:
            self.log.error(str(e))
            return exit_code_for(e)
        except Exception as e:
            if self.args.debug:
                raise
            self.log.error(f"Unexpected error: {e}")
            return EXIT_FAILURE
