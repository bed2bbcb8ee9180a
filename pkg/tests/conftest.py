##############################################################################
#
# Name: conftest.py
#
# Function:
#       Pytest fixtures for unlearn-lab tests
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

import pytest

from unlearn_lab.config.experiment import STORE_ENV, ExperimentConfig
from unlearn_lab.data.dataset import DatasetSpec, LabeledImageDataset, Split, load_dataset
from unlearn_lab.data.toy import write_toy_archive
from unlearn_lab.model.config import BudgetMode, ModelConfig, TrainBudget
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import build_model, train

# Toy geometry used throughout: 4 classes of 40 12x12 grayscale images,
# split 32/4/4 per class by the default ratios.
TOY_CLASSES = 4
TOY_PER_CLASS = 40
TOY_SIZE = 12

TINY_MODEL = {
    "conv_channels": [4],
    "pooled_size": 2,
    "head_widths": [16, TOY_CLASSES],
    "dropout_rate": 0.0,
}


@pytest.fixture(autouse=True)
def isolated_user_dirs(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Keep the user config, user data dir and store env var out of every test."""
    user_dir = tmp_path / "user"
    monkeypatch.setattr(
        "platformdirs.user_config_dir",
        lambda appname, appauthor: str(user_dir / "config"),
    )
    monkeypatch.setattr(
        "platformdirs.user_data_dir",
        lambda appname, appauthor: str(user_dir / "data"),
    )
    monkeypatch.delenv(STORE_ENV, raising=False)
    return user_dir


@pytest.fixture
def tmp_project_dir(tmp_path: Path) -> Path:
    """Return a temporary project directory."""
    project_dir = tmp_path / "test-project"
    project_dir.mkdir()
    return project_dir


# =============================================================================
# Toy Dataset Fixtures
# =============================================================================


@pytest.fixture(scope="session")
def toy_archive(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Write the shared toy archive once per session."""
    path = tmp_path_factory.mktemp("toy") / "toy.npz"
    return write_toy_archive(
        path, num_classes=TOY_CLASSES, per_class=TOY_PER_CLASS, size=TOY_SIZE, seed=0
    )


@pytest.fixture(scope="session")
def toy_dataset(toy_archive: Path) -> LabeledImageDataset:
    return load_dataset(DatasetSpec(source_path=toy_archive))


@pytest.fixture
def tiny_config() -> ModelConfig:
    """A small conv classifier for the toy geometry."""
    return ModelConfig(
        input_geometry=(TOY_SIZE, TOY_SIZE, 1),
        head_widths=(16, TOY_CLASSES),
        conv_channels=(4,),
        pooled_size=2,
        dropout_rate=0.0,
    )


@pytest.fixture
def flat_config() -> ModelConfig:
    """A convolution-free classifier (pixels straight into the head)."""
    return ModelConfig(
        input_geometry=(TOY_SIZE, TOY_SIZE, 1),
        head_widths=(32, TOY_CLASSES),
        conv_channels=(),
        dropout_rate=0.0,
    )


@pytest.fixture
def tiny_budget() -> TrainBudget:
    """A short fixed-iteration budget."""
    return TrainBudget.iterations(20, learning_rate=1e-2, batch_size=16)


@pytest.fixture(scope="session")
def trained_model(toy_dataset: LabeledImageDataset) -> ModelState:
    """The tiny classifier trained for a few epochs on the toy train split."""
    config = ModelConfig(
        input_geometry=(TOY_SIZE, TOY_SIZE, 1),
        head_widths=(16, TOY_CLASSES),
        conv_channels=(4,),
        pooled_size=2,
        dropout_rate=0.0,
    )
    budget = TrainBudget(
        mode=BudgetMode.EPOCHS_WITH_EARLY_STOP,
        max_epochs=15,
        batch_size=16,
        learning_rate=1e-2,
    )
    return train(build_model(config, 0), toy_dataset.split_view(Split.TRAIN), budget)


# =============================================================================
# Experiment Fixtures
# =============================================================================


def experiment_tree(archive: Path, **sections: Any) -> dict[str, Any]:
    """Return a fast experiment file tree over ``archive``; ``sections`` override."""
    tree: dict[str, Any] = {
        "dataset": {"source_path": str(archive)},
        "model": {"preset": "desk", **TINY_MODEL},
        "train": {
            "mode": "epochs_with_early_stop",
            "max_epochs": 4,
            "patience": 0,
            "batch_size": 16,
            "learning_rate": 0.01,
        },
        "subset": {"fraction": 0.1, "strategy": "mix"},
        "forget": {
            "classes": [0],
            "method": "rl",
            "mode": "real",
            "budget": {
                "mode": "fixed_iterations",
                "max_iterations": 10,
                "batch_size": 16,
                "learning_rate": 0.001,
            },
        },
        "generator": {"noise_dim": 8, "steps": 20, "batch": 16, "probe_size": 16},
        "seeds": [1],
    }
    tree.update(sections)
    return tree


@pytest.fixture
def experiment_data(toy_archive: Path) -> dict[str, Any]:
    return experiment_tree(toy_archive)


@pytest.fixture
def experiment(experiment_data: dict[str, Any], tmp_path: Path) -> ExperimentConfig:
    """Typed experiment config writing its runs under tmp_path."""
    return ExperimentConfig.from_dict(
        {**experiment_data, "output_dir": str(tmp_path / "runs")}, base_dir=tmp_path
    )


@pytest.fixture
def project_dir(
    tmp_project_dir: Path, experiment_data: dict[str, Any], monkeypatch: pytest.MonkeyPatch
) -> Path:
    """A project directory with unlearn-lab.json, made the working directory."""
    (tmp_project_dir / "unlearn-lab.json").write_text(
        json.dumps({**experiment_data, "output_dir": "runs"}, indent=2), encoding="utf-8"
    )
    monkeypatch.chdir(tmp_project_dir)
    return tmp_project_dir
