##############################################################################
#
# Name: experiment.py
#
# Function:
#       Typed experiment configuration built from the validated JSON tree
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

import platformdirs

from unlearn_lab.config.manager import ConfigManager
from unlearn_lab.config.validator import SchemaValidator
from unlearn_lab.data.dataset import DatasetSpec
from unlearn_lab.data.subset import Strategy
from unlearn_lab.errors import ConfigError
from unlearn_lab.evalkit.metrics import Scope
from unlearn_lab.forge.projector import GeneratorConfig
from unlearn_lab.model.config import (
    FINETUNE_LEARNING_RATE,
    TRAIN_LEARNING_RATE,
    BudgetMode,
    ModelConfig,
    TrainBudget,
)
from unlearn_lab.unlearn.request import Method

logger = logging.getLogger(__name__)

STORE_ENV = "UNLEARN_LAB_STORE"
DEFAULT_OUTPUT_DIR = "runs"

DEFAULT_TRAIN_BUDGET = TrainBudget(
    mode=BudgetMode.EPOCHS_WITH_EARLY_STOP,
    max_epochs=10,
    patience=3,
    learning_rate=TRAIN_LEARNING_RATE,
)
DEFAULT_UNLEARN_BUDGET = TrainBudget.iterations(300, learning_rate=FINETUNE_LEARNING_RATE)


class ForgetMode(str, Enum):
    """Where the forget data of a request comes from."""

    REAL = "real"
    NOISE = "noise"
    GENERATED = "generated"

    @property
    def synthetic(self) -> bool:
        return self is not ForgetMode.REAL


class Preset(str, Enum):
    DESK = "desk"
    REFERENCE = "reference"


@dataclass(frozen=True)
class ModelSettings:
    """A model preset plus explicit overrides.

    The class count and (for ``desk``) the input geometry come from the
    dataset; everything else can be overridden key by key.
    """

    preset: Preset = Preset.DESK
    overrides: Mapping[str, Any] = field(default_factory=dict)

    def resolve(self, geometry: tuple[int, int, int], num_classes: int) -> ModelConfig:
        """Return the ModelConfig for a dataset of this geometry and K.

        Raises:
            ConfigError: If an override contradicts the dataset's K.
        """
        if self.preset is Preset.REFERENCE:
            base = ModelConfig.reference(num_classes)
        else:
            base = ModelConfig.desk(geometry, num_classes)
        config = ModelConfig.from_dict({**base.to_dict(), **self.overrides})
        config.check_classes(num_classes)
        return config

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ModelSettings:
        overrides = {k: v for k, v in data.items() if k != "preset"}
        return cls(preset=Preset(data.get("preset", Preset.DESK.value)), overrides=overrides)

    def to_dict(self) -> dict[str, Any]:
        return {"preset": self.preset.value, **self.overrides}


@dataclass(frozen=True)
class SubsetSettings:
    fraction: float = 0.1
    strategy: Strategy = Strategy.MIX

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigError(f"subset.fraction must lie in (0, 1], got {self.fraction}")


@dataclass(frozen=True)
class ForgetSettings:
    """Defaults for ``forget`` requests; the CLI can override each one.

    ``retrain_learning_rate`` replaces the budget's rate for RT, which
    trains from scratch. It is None when the forget budget names its own
    ``learning_rate`` and no ``retrain_learning_rate`` is given; RT then
    runs with the budget as written.
    """

    classes: tuple[int, ...] = (0,)
    method: Method = Method.RL
    mode: ForgetMode = ForgetMode.REAL
    budget: TrainBudget = DEFAULT_UNLEARN_BUDGET
    dump_samples: bool = False
    retrain_learning_rate: float | None = TRAIN_LEARNING_RATE


def _retrain_learning_rate(forget: Mapping[str, Any]) -> float | None:
    if "retrain_learning_rate" in forget:
        value = forget["retrain_learning_rate"]
        return None if value is None else float(value)
    if "learning_rate" in (forget.get("budget") or {}):
        return None
    return TRAIN_LEARNING_RATE


@dataclass(frozen=True)
class SweepGrid:
    """Cells of a sweep: every method x strategy x mode, once per seed.

    Cells whose method cannot consume the mode's data (RT/FT with a
    synthetic forget set) are left out of the grid.
    """

    methods: tuple[Method, ...] = (Method.RT, Method.FT, Method.RL)
    strategies: tuple[Strategy, ...] = (Strategy.MIX,)
    modes: tuple[ForgetMode, ...] = (ForgetMode.REAL,)
    parallel: bool = False
    max_workers: int | None = None

    def cells(self) -> list[tuple[Strategy, Method, ForgetMode]]:
        return [
            (strategy, method, mode)
            for strategy in self.strategies
            for mode in self.modes
            for method in self.methods
            if method is Method.RL or not mode.synthetic
        ]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, in typed form."""

    dataset: DatasetSpec
    model: ModelSettings = field(default_factory=ModelSettings)
    train_budget: TrainBudget = DEFAULT_TRAIN_BUDGET
    subset: SubsetSettings = field(default_factory=SubsetSettings)
    forget: ForgetSettings = field(default_factory=ForgetSettings)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    sweep: SweepGrid = field(default_factory=SweepGrid)
    scope: Scope = Scope.FULL_SPLIT
    seeds: tuple[int, ...] = (0,)
    output_dir: Path | None = None
    store_root: Path | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ConfigError("seeds must list at least one seed")

    @property
    def seed(self) -> int:
        """The primary seed (first entry of ``seeds``)."""
        return self.seeds[0]

    @property
    def run_dir(self) -> Path:
        return self.output_dir or self.base_dir / DEFAULT_OUTPUT_DIR

    def with_subset(self, strategy: Strategy) -> ExperimentConfig:
        return replace(self, subset=replace(self.subset, strategy=strategy))

    def with_seed(self, seed: int) -> ExperimentConfig:
        return replace(self, seeds=(seed,))

    @classmethod
    def from_dict(
        cls, data: Mapping[str, Any], *, base_dir: Path | None = None
    ) -> ExperimentConfig:
        """Build the typed config from a schema-validated tree.

        Args:
            data: The merged configuration tree.
            base_dir: Directory relative paths are resolved against.

        Raises:
            ConfigError: If a value is out of range or inconsistent.
        """
        base = base_dir or Path.cwd()

        def resolve(value: str | None) -> Path | None:
            if value is None:
                return None
            path = Path(value).expanduser()
            return path if path.is_absolute() else base / path

        train = data.get("train")
        subset = data.get("subset", {})
        forget = data.get("forget", {})
        sweep = data.get("sweep", {})
        forget_budget = forget.get("budget")
        try:
            return cls(
                dataset=DatasetSpec.from_dict(data["dataset"], base_dir=base),
                model=ModelSettings.from_dict(data.get("model", {})),
                train_budget=(
                    TrainBudget.from_dict({**DEFAULT_TRAIN_BUDGET.to_dict(), **train})
                    if train
                    else DEFAULT_TRAIN_BUDGET
                ),
                subset=SubsetSettings(
                    fraction=float(subset.get("fraction", 0.1)),
                    strategy=Strategy(subset.get("strategy", Strategy.MIX.value)),
                ),
                forget=ForgetSettings(
                    classes=tuple(int(c) for c in forget.get("classes", (0,))),
                    method=Method(forget.get("method", Method.RL.value)),
                    mode=ForgetMode(forget.get("mode", ForgetMode.REAL.value)),
                    budget=(
                        TrainBudget.from_dict(
                            {**DEFAULT_UNLEARN_BUDGET.to_dict(), **forget_budget}
                        )
                        if forget_budget
                        else DEFAULT_UNLEARN_BUDGET
                    ),
                    dump_samples=bool(forget.get("dump_samples", False)),
                    retrain_learning_rate=_retrain_learning_rate(forget),
                ),
                generator=GeneratorConfig.from_dict(data.get("generator", {})),
                sweep=SweepGrid(
                    methods=tuple(Method(m) for m in sweep.get("methods", ("rt", "ft", "rl"))),
                    strategies=tuple(Strategy(s) for s in sweep.get("strategies", ("mix",))),
                    modes=tuple(ForgetMode(m) for m in sweep.get("modes", ("real",))),
                    parallel=bool(sweep.get("parallel", False)),
                    max_workers=sweep.get("max_workers"),
                ),
                scope=Scope(data.get("evaluation", {}).get("scope", Scope.FULL_SPLIT.value)),
                seeds=tuple(int(s) for s in data.get("seeds", (0,))),
                output_dir=resolve(data.get("output_dir")),
                store_root=resolve(data.get("store", {}).get("root")),
                base_dir=base,
            )
        except KeyError as e:
            raise ConfigError(f"Missing configuration key: {e}") from e
        except ValueError as e:
            raise ConfigError(f"Invalid configuration value: {e}") from e

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON-compatible form (as recorded with sweep results)."""
        out: dict[str, Any] = {
            "dataset": self.dataset.to_dict(),
            "model": self.model.to_dict(),
            "train": self.train_budget.to_dict(),
            "subset": {"fraction": self.subset.fraction, "strategy": self.subset.strategy.value},
            "forget": {
                "classes": list(self.forget.classes),
                "method": self.forget.method.value,
                "mode": self.forget.mode.value,
                "budget": self.forget.budget.to_dict(),
                "dump_samples": self.forget.dump_samples,
                "retrain_learning_rate": self.forget.retrain_learning_rate,
            },
            "generator": {
                k: v for k, v in self.generator.to_dict().items() if v is not None
            },
            "sweep": {
                "methods": [m.value for m in self.sweep.methods],
                "strategies": [s.value for s in self.sweep.strategies],
                "modes": [m.value for m in self.sweep.modes],
                "parallel": self.sweep.parallel,
            },
            "evaluation": {"scope": self.scope.value},
            "seeds": list(self.seeds),
        }
        if self.sweep.max_workers is not None:
            out["sweep"]["max_workers"] = self.sweep.max_workers
        if self.output_dir is not None:
            out["output_dir"] = str(self.output_dir)
        if self.store_root is not None:
            out["store"] = {"root": str(self.store_root)}
        return out


def load_experiment(
    manager: ConfigManager, validator: SchemaValidator | None = None
) -> ExperimentConfig:
    """Load, validate and type the merged user + project configuration.

    Args:
        manager: Source of the configuration layers.
        validator: Schema validator; a fresh one when omitted.

    Returns:
        The experiment configuration.

    Raises:
        ConfigError: If the project file is missing, malformed or invalid.
    """
    validator = validator or SchemaValidator()
    source = manager.project_config_path
    data = manager.get_merged()
    if "dataset" not in data:
        raise ConfigError(f"No dataset configured; create {source} (see 'unlearn-lab init')")
    validator.check(data, SchemaValidator.EXPERIMENT_SCHEMA, source=str(source))
    validator.check(data["dataset"], SchemaValidator.DATASET_SCHEMA, source=f"{source} (dataset)")
    config = ExperimentConfig.from_dict(data, base_dir=source.parent)
    logger.debug("Loaded experiment configuration from %s", source)
    return config


def resolve_store_root(
    config: ExperimentConfig | None,
    cli_store: Path | None = None,
    *,
    environ: Mapping[str, str] | None = None,
) -> Path:
    """Decide where the model store lives.

    Order: ``--store`` on the command line, the ``UNLEARN_LAB_STORE``
    environment variable, ``store.root`` in the configuration,
    ``<output_dir>/store``, then the platform user-data directory.
    """
    env = os.environ if environ is None else environ
    if cli_store is not None:
        return cli_store
    if env.get(STORE_ENV):
        return Path(env[STORE_ENV]).expanduser()
    if config is not None:
        if config.store_root is not None:
            return config.store_root
        if config.output_dir is not None:
            return config.output_dir / "store"
    data_dir = platformdirs.user_data_dir(ConfigManager.APP_NAME, ConfigManager.APP_AUTHOR)
    return Path(data_dir) / "store"
