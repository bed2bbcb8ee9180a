##############################################################################
#
# Name: runner.py
#
# Function:
#       Train the original model into a store and service forget requests
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
from collections.abc import Iterable
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np

from unlearn_lab.config.experiment import ExperimentConfig, ForgetMode
from unlearn_lab.data.dataset import LabeledImageDataset, Split, load_dataset
from unlearn_lab.data.partition import ClassPartition, partition_classes
from unlearn_lab.data.selection import ConfidenceRanking, rank_by_confidence, select_subset
from unlearn_lab.data.subset import Role, SubsetHandle
from unlearn_lab.errors import ConfigError, DomainError, StoreIntegrityError
from unlearn_lab.evalkit.metrics import MetricsReport, Scope, evaluate
from unlearn_lab.forge.batch import SyntheticBatch, dump_samples, make_noise_batch
from unlearn_lab.forge.projector import (
    GeneratorConfig,
    generate_samples,
    save_projector,
    train_projector,
)
from unlearn_lab.model.config import TRAIN_LEARNING_RATE, TrainBudget
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import build_model, train
from unlearn_lab.store.model_store import ModelStore
from unlearn_lab.unlearn.methods import default_probe, run_unlearning
from unlearn_lab.unlearn.request import Method, UnlearnRequest, UnlearnResult

logger = logging.getLogger(__name__)

ORIGINAL_PROGRESS = "original"


@dataclass(frozen=True, eq=False)
class TrainOutcome:
    """Result of ``run_train``: the original model, its stored subsets and report."""

    model: ModelState
    subsets: dict[int, SubsetHandle]
    report: MetricsReport
    store_root: Path

    def summary(self) -> dict[str, Any]:
        return {
            "digest": self.model.weight_digest,
            "iterations": self.model.iterations_total,
            "stored": {k: len(h) for k, h in sorted(self.subsets.items())},
            "report": self.report.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class ForgetOutcome:
    """Result of one forget request.

    ``skipped`` is set when every requested class was already forgotten;
    no model was trained and ``result`` is None.
    """

    classes: tuple[int, ...]
    mode: ForgetMode
    method: Method
    result: UnlearnResult | None
    report: MetricsReport | None
    deleted: int = 0
    synthetic: SyntheticBatch | None = None

    @property
    def skipped(self) -> bool:
        return self.result is None

    def summary(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "classes": list(self.classes),
            "mode": self.mode.value,
            "method": self.method.value,
            "skipped": self.skipped,
            "deleted": self.deleted,
        }
        if self.result is not None:
            out.update(self.result.summary())
        if self.report is not None:
            out["report"] = self.report.to_dict()
        return out


def train_original(
    config: ExperimentConfig, dataset: LabeledImageDataset, *, progress_store: ModelStore | None
) -> tuple[ModelState, ConfidenceRanking]:
    """Train the original classifier and rank its training split by confidence."""
    model_config = config.model.resolve(dataset.geometry, dataset.num_classes)
    fresh = build_model(model_config, config.seed)
    val = dataset.split_view(Split.VAL)
    sink = None
    if progress_store is not None:
        sink = progress_store.progress_sink(ORIGINAL_PROGRESS)
        sink.path.unlink(missing_ok=True)
    logger.info(
        "Training original model on %d sample(s), %d class(es)",
        len(dataset.split_indices(Split.TRAIN)),
        dataset.num_classes,
    )
    model = train(
        fresh,
        dataset.split_view(Split.TRAIN),
        config.train_budget.with_seed(config.seed),
        val=val if len(val) else None,
        progress=sink,
    )
    return model, rank_by_confidence(model, dataset, Split.TRAIN)


def per_class_subsets(
    handle: SubsetHandle, dataset: LabeledImageDataset
) -> dict[int, SubsetHandle]:
    """Split a selected subset into one handle per class."""
    labels = dataset.labels.numpy()
    idx = np.asarray(handle.indices, dtype=np.int64)
    return {
        k: handle.restrict(idx[labels[idx] == k].tolist(), Role.MIXED)
        for k in range(dataset.num_classes)
    }


def populate_store(
    store: ModelStore,
    config: ExperimentConfig,
    dataset: LabeledImageDataset,
    model: ModelState,
    ranking: ConfidenceRanking,
) -> dict[int, SubsetHandle]:
    """Select the stored subset and reset ``store`` to hold ``model`` and it."""
    selected = select_subset(ranking, config.subset.strategy, config.subset.fraction, config.seed)
    subsets = per_class_subsets(selected, dataset)
    store.initialize(
        model,
        subsets,
        dataset_id=dataset.dataset_id,
        num_classes=dataset.num_classes,
        settings=config.to_dict(),
        keep_progress=(ORIGINAL_PROGRESS,),
    )
    return subsets


def original_partition(config: ExperimentConfig, num_classes: int) -> ClassPartition:
    return partition_classes(num_classes, config.forget.classes)


def run_train(
    config: ExperimentConfig,
    store: ModelStore,
    *,
    dataset: LabeledImageDataset | None = None,
) -> TrainOutcome:
    """Train the original model and persist it with its stored subset.

    The train split is ranked by the trained model's confidence, the
    configured strategy keeps ``subset.fraction`` of every class, and the
    store is reset to hold the checkpoint plus one subset manifest per
    class. The returned report is measured against the configured forget
    classes.

    Args:
        config: Experiment configuration.
        store: Store to (re)initialize.
        dataset: Already loaded dataset; loaded from ``config`` if omitted.

    Returns:
        The original model, its per-class subsets and its report.
    """
    dataset = dataset or load_dataset(config.dataset)
    model, ranking = train_original(config, dataset, progress_store=store)
    subsets = populate_store(store, config, dataset, model, ranking)
    report = evaluate(
        model,
        dataset,
        original_partition(config, dataset.num_classes),
        config.scope,
        subset=store.stored_subset() if config.scope is Scope.STORED_SUBSET else None,
    )
    return TrainOutcome(model=model, subsets=subsets, report=report, store_root=store.root)


def _check_store(store: ModelStore, dataset: LabeledImageDataset) -> None:
    if store.dataset_id != dataset.dataset_id:
        raise StoreIntegrityError(
            f"store {store.root} indexes dataset {store.dataset_id}, "
            f"not the configured {dataset.dataset_id}"
        )


def _synthesize(
    mode: ForgetMode,
    parent: ModelState,
    counts: dict[int, int],
    seed: int,
    generator: GeneratorConfig,
    store: ModelStore,
) -> SyntheticBatch:
    classes = sorted(counts)
    if mode is ForgetMode.GENERATED:
        projector = train_projector(parent, classes, replace(generator, seed=seed))
        tag = "-".join(str(c) for c in classes)
        save_projector(projector, store.projectors_dir / f"{parent.short_digest}_{tag}.pt")
        batches = [generate_samples(projector, c, counts[c], seed + c) for c in classes]
    else:
        geometry = parent.config.input_geometry
        batches = [make_noise_batch(geometry, c, counts[c], seed + c) for c in classes]
    return SyntheticBatch.concat(batches, seed=seed)


def handle_forget_request(
    store: ModelStore,
    dataset: LabeledImageDataset,
    classes: Iterable[int],
    mode: ForgetMode | str,
    budget: TrainBudget,
    seed: int,
    *,
    method: Method | str = Method.RL,
    generator: GeneratorConfig | None = None,
    scope: Scope | str = Scope.FULL_SPLIT,
    dump_dir: Path | None = None,
    retrain_learning_rate: float | None = TRAIN_LEARNING_RATE,
) -> ForgetOutcome:
    """Service a request to forget ``classes``.

    Classes already forgotten are skipped; a request with nothing new is
    logged and leaves the model unchanged. Earlier forgotten classes stay
    on the forget side of the partition and the request starts from the
    current checkpoint.

    In ``real`` mode the stored subset is split into retain and forget
    parts and the method runs on them; the forget-class manifests are
    deleted afterwards. In ``noise`` and ``generated`` mode the forget
    manifests are deleted and logged first, then as many synthetic
    samples per class as were deleted stand in for them and RL runs.

    Args:
        store: Store holding the current model and subsets.
        dataset: Dataset the store indexes.
        classes: Classes to forget.
        mode: Source of forget data.
        budget: Unlearning budget.
        seed: Seed for shuffling, relabeling and synthesis.
        method: Unlearning method.
        generator: Projector settings for ``generated`` mode.
        scope: Evaluation scope for the returned report.
        dump_dir: Write synthetic samples as PNGs here when given.
        retrain_learning_rate: Learning rate RT trains with in place of
            the budget's; None keeps the budget as given.

    Returns:
        The outcome, with the evaluated report unless skipped.

    Raises:
        DomainError: If a class is outside 0..K-1 or would leave no
            retain class.
        ConfigError: If a synthetic mode is combined with RT or FT.
        StoreIntegrityError: If the store indexes another dataset or a
            forget-class index survives deletion.
    """
    mode = ForgetMode(mode)
    method = Method(method)
    scope = Scope(scope)
    requested = sorted({int(c) for c in classes})
    _check_store(store, dataset)
    num_classes = store.num_classes
    invalid = [c for c in requested if not 0 <= c < num_classes]
    if not requested or invalid:
        raise DomainError(f"forget classes {invalid or requested} are not in 0..{num_classes - 1}")
    if mode.synthetic and method is not Method.RL:
        raise ConfigError(f"{mode.value} forget data can only be used with RL, not {method.label}")

    forgotten = store.forgotten_classes()
    fresh = [c for c in requested if c not in forgotten]
    if not fresh:
        store.record_skip(requested, note="already forgotten")
        logger.warning("Classes %s are already forgotten; nothing to do", requested)
        return ForgetOutcome(tuple(requested), mode, method, result=None, report=None)

    partition = partition_classes(num_classes, forgotten | set(fresh))
    parent = store.checkpoint()
    labels = dataset.labels
    deleted = 0
    synthetic: SyntheticBatch | None = None
    real_forget: SubsetHandle | None = None
    if method is Method.RT and retrain_learning_rate is not None:
        budget = replace(budget, learning_rate=retrain_learning_rate)

    if mode.synthetic:
        deleted = store.delete_classes(fresh, mode=mode.value)
        retain_h, leftover = partition.split_handle(store.stored_subset(), labels)
        if len(leftover):
            raise StoreIntegrityError(f"{len(leftover)} forget-class index(es) survived deletion")
        counts = {c: store.deleted_count([c]) for c in fresh}
        synthetic = _synthesize(mode, parent, counts, seed, generator or GeneratorConfig(), store)
        if dump_dir is not None:
            dump_samples(synthetic, dump_dir)
        forget_data: SubsetHandle | SyntheticBatch | None = synthetic
    else:
        retain_h, forget_h = partition.split_handle(store.stored_subset(), labels)
        forget_data = forget_h if method is Method.RL else None
        real_forget = forget_h

    request = UnlearnRequest(
        method=method,
        partition=partition,
        retain_data=retain_h,
        forget_data=forget_data,
        budget=budget,
        seed=seed,
    )
    tag = "-".join(str(c) for c in fresh)
    progress = store.progress_sink(f"{method.value}_{mode.value}_{tag}_{parent.short_digest}")
    probe = default_probe(request, dataset, real_forget) if budget.has_stop_condition else None
    result = run_unlearning(request, dataset, parent, progress=progress, probe=probe)

    if not mode.synthetic:
        deleted = store.delete_classes(fresh, mode=mode.value)
    store.record_unlearn(
        result.model,
        classes=fresh,
        mode=mode.value,
        method=method.value,
        parent=parent.weight_digest,
        iterations=result.iterations_used,
    )
    report = evaluate(
        result.model,
        dataset,
        partition,
        scope,
        subset=store.stored_subset() if scope is Scope.STORED_SUBSET else None,
    )
    return ForgetOutcome(
        classes=tuple(fresh),
        mode=mode,
        method=method,
        result=result,
        report=report,
        deleted=deleted,
        synthetic=synthetic,
    )
