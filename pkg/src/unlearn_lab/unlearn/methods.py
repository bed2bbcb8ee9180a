##############################################################################
#
# Name: methods.py
#
# Function:
#       Retrain (RT), Fine-tune (FT) and Random Label (RL) unlearning
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
import time

import torch
from torch import nn

from unlearn_lab.data.dataset import LabeledImageDataset, SampleView, Split
from unlearn_lab.data.partition import ClassPartition, draw_retain_labels, relabel_random
from unlearn_lab.data.subset import SubsetHandle
from unlearn_lab.errors import DomainError, InvariantViolationError
from unlearn_lab.forge.batch import SyntheticBatch
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import ProgressSink, StopCheck, build_model, module_accuracy, train
from unlearn_lab.unlearn.request import Method, UnlearnProbe, UnlearnRequest, UnlearnResult

logger = logging.getLogger(__name__)


def _retain_view(request: UnlearnRequest, dataset: LabeledImageDataset) -> SampleView:
    view = dataset.view(list(request.retain_data.indices))
    leaked = request.partition.forget_mask(view.labels)
    if bool(leaked.any()):
        classes = sorted(set(view.labels[leaked].tolist()))
        raise DomainError(
            f"retain data holds {int(leaked.sum())} sample(s) of forget classes {classes}"
        )
    return view


def _audit_exposure(model: ModelState, since: int, partition: ClassPartition, what: str) -> None:
    exposure = model.class_exposure(since)
    seen = {k: exposure[k] for k in sorted(partition.forget_classes) if exposure[k]}
    if seen:
        raise InvariantViolationError(
            f"{what} presented forget-class samples to the optimizer: {seen}"
        )


def _val_views(
    partition: ClassPartition, dataset: LabeledImageDataset
) -> tuple[SampleView, SampleView]:
    """Forget-class and retain-class samples of the validation split."""
    idx = dataset.split_indices(Split.VAL)
    forget = partition.forget_mask(dataset.labels[torch.from_numpy(idx)]).numpy()
    return dataset.view(idx[forget]), dataset.view(idx[~forget])


def default_probe(
    request: UnlearnRequest,
    dataset: LabeledImageDataset,
    real_forget: SubsetHandle | None = None,
) -> UnlearnProbe:
    """Build the stop-condition probe for any method.

    The forget side is, in order of preference: ``real_forget`` (the
    stored forget subset RT and FT never train on), the request's own
    forget data (synthetic samples are probed with the class they stand
    in for), or the forget-class samples of the validation split. The
    retain side is the retain-class validation split, or the retain data
    when that split is empty.
    """
    val_forget, val_retain = _val_views(request.partition, dataset)
    source = real_forget if real_forget is not None else request.forget_data
    if isinstance(source, SubsetHandle) and len(source):
        forget = dataset.view(list(source.indices))
    elif isinstance(source, SyntheticBatch) and len(source):
        forget = source.as_view()
    else:
        forget = val_forget
    retain = val_retain if len(val_retain) else dataset.view(list(request.retain_data.indices))
    return UnlearnProbe(forget=forget, retain=retain)


def _stop_check(request: UnlearnRequest, probe: UnlearnProbe | None) -> StopCheck | None:
    budget = request.budget
    if not budget.has_stop_condition:
        return None
    if probe is None or len(probe.forget) == 0:
        raise DomainError("a stop condition needs a non-empty forget probe")
    forget_max = budget.stop_forget_acc
    retain_min = budget.stop_retain_acc
    retain_probe = probe.retain

    def check(module: nn.Module) -> bool:
        if forget_max is not None and 100.0 * module_accuracy(module, probe.forget) > forget_max:
            return False
        if retain_min is not None and retain_probe is not None and len(retain_probe):
            return 100.0 * module_accuracy(module, retain_probe) >= retain_min
        return True

    return check


def _finish(
    request: UnlearnRequest,
    model: ModelState,
    start: ModelState | None,
    started_at: float,
    parent: ModelState | None,
) -> UnlearnResult:
    base = start.iterations_total if start is not None else 0
    result = UnlearnResult(
        model=model,
        method=request.method,
        iterations_used=model.iterations_total - base,
        wall_time=time.perf_counter() - started_at,
        parent_digest=parent.weight_digest if parent is not None else None,
        request=request,
    )
    logger.info(
        "%s unlearning: %d iteration(s) in %.2fs -> %s",
        request.method.label,
        result.iterations_used,
        result.wall_time,
        model.short_digest,
    )
    return result


def unlearn_retrain(
    request: UnlearnRequest,
    dataset: LabeledImageDataset,
    parent: ModelState | None = None,
    *,
    progress: ProgressSink | None = None,
    probe: UnlearnProbe | None = None,
) -> UnlearnResult:
    """Retrain a freshly initialized model on the retain data only.

    Args:
        request: An RT request.
        dataset: Dataset the request's subsets index.
        parent: Optional parent; only its architecture is used and only
            when the request carries no ``model_config``.
        progress: Optional sink for training progress lines.
        probe: Samples for the optional stop condition.

    Returns:
        The result; its model still has K outputs.

    Raises:
        DomainError: If the retain data holds forget-class samples (checked
            before any training) or no architecture is known.
        InvariantViolationError: If the training log shows forget-class
            exposure.
    """
    if request.method is not Method.RT:
        raise DomainError(f"unlearn_retrain got a {request.method.label} request")
    started_at = time.perf_counter()
    retain = _retain_view(request, dataset)
    config = request.model_config or (parent.config if parent is not None else None)
    if config is None:
        raise DomainError("RT needs a model config or a parent to copy the architecture from")

    fresh = build_model(config, request.seed, num_classes=dataset.num_classes)
    model = train(
        fresh,
        retain,
        request.budget.with_seed(request.seed),
        progress=progress,
        stop_check=_stop_check(request, probe),
    )
    _audit_exposure(model, 0, request.partition, "RT")
    return _finish(request, model, fresh, started_at, parent)


def unlearn_finetune(
    request: UnlearnRequest,
    dataset: LabeledImageDataset,
    parent: ModelState | None,
    *,
    progress: ProgressSink | None = None,
    probe: UnlearnProbe | None = None,
) -> UnlearnResult:
    """Continue training the parent on the retain data only.

    Raises:
        DomainError: If no parent is given or the retain data holds
            forget-class samples.
        InvariantViolationError: If the training log shows forget-class
            exposure.
    """
    if request.method is not Method.FT:
        raise DomainError(f"unlearn_finetune got a {request.method.label} request")
    if parent is None:
        raise DomainError("FT needs a parent checkpoint")
    started_at = time.perf_counter()
    retain = _retain_view(request, dataset)
    model = train(
        parent,
        retain,
        request.budget.with_seed(request.seed),
        progress=progress,
        stop_check=_stop_check(request, probe),
    )
    _audit_exposure(model, len(parent.train_log), request.partition, "FT")
    return _finish(request, model, parent, started_at, parent)


def _relabeled_forget(request: UnlearnRequest, dataset: LabeledImageDataset) -> SampleView:
    forget = request.forget_data
    partition = request.partition
    if isinstance(forget, SubsetHandle):
        batch = relabel_random(forget, partition, request.seed, dataset.labels)
        view = dataset.view(list(batch.indices))
        return view.with_labels(torch.tensor(batch.new_labels, dtype=torch.int64))

    if not isinstance(forget, SyntheticBatch):
        raise DomainError("RL needs forget data (a real subset or a synthetic batch)")
    if forget.geometry != dataset.geometry:
        raise DomainError(
            f"synthetic geometry {forget.geometry} does not match dataset {dataset.geometry}"
        )
    labels = torch.from_numpy(draw_retain_labels(len(forget), partition, request.seed))
    return forget.as_view(labels)


def unlearn_random_label(
    request: UnlearnRequest,
    dataset: LabeledImageDataset,
    parent: ModelState | None,
    *,
    progress: ProgressSink | None = None,
    probe: UnlearnProbe | None = None,
) -> UnlearnResult:
    """Fine-tune the parent on retain data merged with randomly relabeled forget data.

    Every forget sample (real or synthetic) gets a label drawn uniformly
    from the retain classes. The two sources are pooled and shuffled
    together each epoch.

    Raises:
        DomainError: If no parent is given or the retain data holds
            forget-class samples.
        InvariantViolationError: If any training label is a forget class.
    """
    if request.method is not Method.RL:
        raise DomainError(f"unlearn_random_label got a {request.method.label} request")
    if parent is None:
        raise DomainError("RL needs a parent checkpoint")
    started_at = time.perf_counter()
    retain = _retain_view(request, dataset)
    relabeled = _relabeled_forget(request, dataset)
    union = retain.concat(relabeled)

    leaked = request.partition.forget_mask(union.labels)
    if bool(leaked.any()):
        raise InvariantViolationError(
            f"{int(leaked.sum())} RL training label(s) name a forget class"
        )
    logger.debug("RL stream: %d retain + %d relabeled forget", len(retain), len(relabeled))

    model = train(
        parent,
        union,
        request.budget.with_seed(request.seed),
        progress=progress,
        stop_check=_stop_check(request, probe),
    )
    _audit_exposure(model, len(parent.train_log), request.partition, "RL")
    return _finish(request, model, parent, started_at, parent)


def run_unlearning(
    request: UnlearnRequest,
    dataset: LabeledImageDataset,
    parent: ModelState | None,
    *,
    progress: ProgressSink | None = None,
    probe: UnlearnProbe | None = None,
) -> UnlearnResult:
    """Dispatch a request to its method.

    When the budget has a stop condition and no probe is given, the probe
    comes from ``default_probe``.
    """
    if probe is None and request.budget.has_stop_condition:
        probe = default_probe(request, dataset)
    if request.method is Method.RT:
        return unlearn_retrain(request, dataset, parent, progress=progress, probe=probe)
    if request.method is Method.FT:
        return unlearn_finetune(request, dataset, parent, progress=progress, probe=probe)
    return unlearn_random_label(request, dataset, parent, progress=progress, probe=probe)
