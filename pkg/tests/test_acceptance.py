##############################################################################
#
# Name: test_acceptance.py
#
# Function:
#       Desk-scale acceptance runs on the 10-class toy archive: original
#       model quality, unlimited- and restricted-budget unlearning, and
#       generated forget sets. Run with ``pytest -m slow``.
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import pytest

from unlearn_lab.config.experiment import ExperimentConfig
from unlearn_lab.data.dataset import LabeledImageDataset, Split, load_dataset
from unlearn_lab.data.partition import ClassPartition, partition_classes
from unlearn_lab.data.subset import Strategy, SubsetHandle
from unlearn_lab.data.toy import write_toy_archive
from unlearn_lab.evalkit.metrics import evaluate
from unlearn_lab.forge.projector import GeneratorConfig, generate_samples, train_projector
from unlearn_lab.harness.runner import train_original
from unlearn_lab.harness.sweep import STATUS_OK, SweepOutcome, run_sweep
from unlearn_lab.model.config import TrainBudget
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import module_accuracy
from unlearn_lab.unlearn.methods import run_unlearning
from unlearn_lab.unlearn.request import Method, UnlearnProbe, UnlearnRequest

pytestmark = pytest.mark.slow

SEEDS = [1, 2, 3]
FORGET = [0]


def desk_tree(archive: Path) -> dict[str, Any]:
    return {
        "dataset": {"source_path": str(archive)},
        "model": {"preset": "desk"},
        "train": {
            "mode": "epochs_with_early_stop",
            "max_epochs": 20,
            "patience": 3,
            "batch_size": 64,
            "learning_rate": 0.001,
        },
        "subset": {"fraction": 0.1, "strategy": "mix"},
        "forget": {
            "classes": FORGET,
            "budget": {
                "mode": "fixed_iterations",
                "max_iterations": 300,
                "batch_size": 32,
                "learning_rate": 0.001,
            },
        },
        "sweep": {
            "methods": ["rt", "ft", "rl"],
            "strategies": ["top", "bottom", "mix"],
            "modes": ["real", "noise", "generated"],
        },
        "seeds": SEEDS,
    }


@pytest.fixture(scope="module")
def desk_root(tmp_path_factory: pytest.TempPathFactory) -> Path:
    return tmp_path_factory.mktemp("desk")


@pytest.fixture(scope="module")
def desk_config(desk_root: Path) -> ExperimentConfig:
    archive = write_toy_archive(desk_root / "toy.npz")
    return ExperimentConfig.from_dict(
        {**desk_tree(archive), "output_dir": str(desk_root / "runs")}, base_dir=desk_root
    )


@pytest.fixture(scope="module")
def desk_dataset(desk_config: ExperimentConfig) -> LabeledImageDataset:
    return load_dataset(desk_config.dataset)


@pytest.fixture(scope="module")
def original(desk_config: ExperimentConfig, desk_dataset: LabeledImageDataset) -> ModelState:
    model, _ = train_original(desk_config, desk_dataset, progress_store=None)
    return model


@pytest.fixture(scope="module")
def partition(desk_dataset: LabeledImageDataset) -> ClassPartition:
    return partition_classes(desk_dataset, FORGET)


@pytest.fixture(scope="module")
def sweep(desk_config: ExperimentConfig, desk_dataset: LabeledImageDataset) -> SweepOutcome:
    """The restricted-budget grid over three seeds."""
    return run_sweep(desk_config, dataset=desk_dataset)


def seed_mean(outcome: SweepOutcome, label: str, cell: str) -> float:
    """Mean of one report cell over the successful seeds of ``label``."""
    values = [
        getattr(r.report, cell)
        for r in outcome.records
        if r.label == label and r.status == STATUS_OK and r.report is not None
    ]
    assert len(values) == len(SEEDS), f"{label}: {len(values)} successful seed(s)"
    return float(np.mean(values))


class TestOriginalModel:
    """Original-model sanity."""

    def test_test_accuracy(
        self, original: ModelState, desk_dataset: LabeledImageDataset
    ) -> None:
        accuracy = module_accuracy(original.instantiate(), desk_dataset.split_view(Split.TEST))
        assert accuracy >= 0.90


class TestUnlimitedBudget:
    """Every method forgets with the whole train split and a stop condition."""

    def test_all_methods_forget(
        self,
        original: ModelState,
        desk_dataset: LabeledImageDataset,
        partition: ClassPartition,
    ) -> None:
        labels = desk_dataset.labels
        full = SubsetHandle(
            source_dataset_id=desk_dataset.dataset_id,
            indices=tuple(int(i) for i in desk_dataset.split_indices(Split.TRAIN)),
            strategy=Strategy.FULL,
            fraction=1.0,
        )
        retain_h, forget_h = partition.split_handle(full, labels)
        val_idx = desk_dataset.split_indices(Split.VAL)
        val_forget = partition.forget_mask(labels[val_idx]).numpy()
        val_retain = desk_dataset.view(val_idx[~val_forget])
        before = evaluate(original, desk_dataset, partition)
        assert before.acc_retain_test is not None

        val_acc = 100.0 * module_accuracy(original.instantiate(), val_retain)
        budget = TrainBudget(
            max_iterations=6000,
            batch_size=64,
            learning_rate=1e-3,
            stop_forget_acc=1.0,
            stop_retain_acc=val_acc - 2.0,
            check_every=25,
        )
        probe = UnlearnProbe(forget=desk_dataset.view(list(forget_h.indices)), retain=val_retain)

        steps: dict[Method, int] = {}
        for method in Method:
            request = UnlearnRequest(
                method=method,
                partition=partition,
                retain_data=retain_h,
                forget_data=forget_h if method is Method.RL else None,
                budget=budget,
                seed=1,
            )
            result = run_unlearning(request, desk_dataset, original, probe=probe)
            after = evaluate(result.model, desk_dataset, partition)
            assert after.acc_forget_train is not None
            assert after.acc_retain_test is not None
            assert after.acc_forget_train <= 1.0, method.label
            assert before.acc_retain_test - after.acc_retain_test <= 2.0, method.label
            steps[method] = result.iterations_used

        assert steps[Method.FT] < steps[Method.RT] / 4
        assert steps[Method.RL] < steps[Method.RT] / 4


class TestRestrictedBudget:
    """10% stored data and a fixed step budget, averaged over seeds."""

    def test_rl_mix_forgets_and_keeps_retain(self, sweep: SweepOutcome) -> None:
        assert seed_mean(sweep, "RL mix", "acc_forget_train") <= 2.0
        drop = seed_mean(sweep, "original", "acc_retain_test") - seed_mean(
            sweep, "RL mix", "acc_retain_test"
        )
        assert drop <= 6.0

    def test_finetune_forgets_less_than_random_label(self, sweep: SweepOutcome) -> None:
        assert seed_mean(sweep, "FT mix", "acc_forget_train") > seed_mean(
            sweep, "RL mix", "acc_forget_train"
        )

    def test_retrain_retains_less_than_random_label(self, sweep: SweepOutcome) -> None:
        assert seed_mean(sweep, "RT mix", "acc_retain_test") < seed_mean(
            sweep, "RL mix", "acc_retain_test"
        )

    def test_top_forgets_at_least_as_well_as_bottom(self, sweep: SweepOutcome) -> None:
        assert seed_mean(sweep, "RL top", "acc_forget_train") <= seed_mean(
            sweep, "RL bottom", "acc_forget_train"
        )

    def test_no_failed_cells(self, sweep: SweepOutcome) -> None:
        assert sweep.failed == []


class TestSyntheticForgetSet:
    """Generated and noise stand-ins for deleted forget data."""

    def test_generated_forgets(self, sweep: SweepOutcome) -> None:
        assert seed_mean(sweep, "RL mix generated", "acc_forget_train") <= 2.0

    def test_generated_retains_at_least_noise(self, sweep: SweepOutcome) -> None:
        assert seed_mean(sweep, "RL mix generated", "acc_retain_test") >= seed_mean(
            sweep, "RL mix noise", "acc_retain_test"
        )

    def test_generated_close_to_real(self, sweep: SweepOutcome) -> None:
        gap = seed_mean(sweep, "RL mix", "acc_retain_test") - seed_mean(
            sweep, "RL mix generated", "acc_retain_test"
        )
        assert gap <= 3.0


class TestGenerator:
    """Projector quality against the frozen original model."""

    def test_held_out_batch_classified_as_target(self, original: ModelState) -> None:
        digest = original.weight_digest
        projector = train_projector(original, [0, 5], GeneratorConfig(seed=3))
        module = original.instantiate()

        for cls in (0, 5):
            batch = generate_samples(projector, cls, 64, seed=cls)
            assert module_accuracy(module, batch.as_view()) >= 0.90

        assert original.weight_digest == digest
        assert original.verify()


def test_archive_matches_manifest(desk_dataset: LabeledImageDataset) -> None:
    assert desk_dataset.class_histogram() == [200] * 10
