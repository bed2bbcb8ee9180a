##############################################################################
#
# Name: trainer.py
#
# Function:
#       build_model, train, predict_probs and extract_features
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
import math
from collections.abc import Callable

import torch
from torch import nn

from unlearn_lab.data.dataset import SampleView
from unlearn_lab.errors import DomainError, ShapeError, TrainingDivergedError
from unlearn_lab.model.config import BudgetMode, ModelConfig, TrainBudget
from unlearn_lab.model.network import Classifier, training_loss
from unlearn_lab.model.state import EpochRecord, ModelState

logger = logging.getLogger(__name__)

INFERENCE_BATCH_SIZE = 256

ProgressSink = Callable[[str], None]
StopCheck = Callable[[nn.Module], bool]


def build_model(config: ModelConfig, seed: int, *, num_classes: int | None = None) -> ModelState:
    """Create a freshly initialized model.

    The same ``(config, seed)`` always yields bit-identical weights; the
    global torch RNG is left as it was.

    Args:
        config: Architecture to build.
        seed: Initialization seed.
        num_classes: Class count of the target dataset, checked against
            the last head width when given.

    Returns:
        The initial ModelState with an empty training log.

    Raises:
        ConfigError: If ``num_classes`` disagrees with the head.
    """
    if num_classes is not None:
        config.check_classes(num_classes)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        module = Classifier(config)
    state = ModelState.from_module(config, module)
    logger.debug(
        "Built %s model, seed %d, digest %s", config.backbone.value, seed, state.short_digest
    )
    return state


def expected_image_shape(config: ModelConfig) -> tuple[int, int, int]:
    """Return the (C, H, W) shape a model built from ``config`` consumes."""
    height, width, channels = config.input_geometry
    return (channels, height, width)


def _check_images(config: ModelConfig, images: torch.Tensor) -> None:
    want = expected_image_shape(config)
    if images.ndim != 4 or tuple(images.shape[1:]) != want:
        raise ShapeError(
            f"images of shape {tuple(images.shape)} do not match model geometry (N, *{want})"
        )


def train(
    model: ModelState,
    data: SampleView,
    budget: TrainBudget,
    *,
    val: SampleView | None = None,
    progress: ProgressSink | None = None,
    stop_check: StopCheck | None = None,
) -> ModelState:
    """Train a copy of ``model`` on ``data`` with Adam and cross-entropy.

    Sample order comes from a generator seeded with ``budget.seed``, so a
    run is reproducible. Every pass over the data appends an
    :class:`EpochRecord` to the log and emits an ``epoch,iter,loss,val_acc``
    line to the logger and to ``progress``.

    With ``epochs_with_early_stop`` and validation data the returned
    weights are those of the best validation epoch.

    Args:
        model: Starting point; left untouched.
        data: Training samples.
        budget: Bounds and optimizer settings.
        val: Optional validation samples.
        progress: Optional sink for progress lines.
        stop_check: Called every ``budget.check_every`` steps with the
            module in eval mode; returning True ends the run.

    Returns:
        The trained ModelState. A zero budget returns ``model`` itself.

    Raises:
        DomainError: If ``data`` is empty or holds labels outside 0..K-1.
        ShapeError: If the images do not match the model geometry.
        TrainingDivergedError: If the loss becomes non-finite.
    """
    if len(data) == 0:
        raise DomainError("training data is empty")
    num_classes = model.config.num_classes
    if int(data.labels.min()) < 0 or int(data.labels.max()) >= num_classes:
        raise DomainError(f"training labels must lie in 0..{num_classes - 1}")
    _check_images(model.config, data.images)

    if budget.limit == 0:
        logger.info("Zero training budget; model %s returned unchanged", model.short_digest)
        return model

    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(budget.seed)
        return _fit(model, data, budget, val, progress, stop_check)


def _fit(
    model: ModelState,
    data: SampleView,
    budget: TrainBudget,
    val: SampleView | None,
    progress: ProgressSink | None,
    stop_check: StopCheck | None,
) -> ModelState:
    config = model.config
    num_classes = config.num_classes
    module = model.instantiate(train=True)
    optimizer = torch.optim.Adam(module.parameters(), lr=budget.learning_rate)
    generator = torch.Generator().manual_seed(budget.seed)

    fixed = budget.mode is BudgetMode.FIXED_ITERATIONS
    steps_left = budget.max_iterations
    log = list(model.train_log)
    epoch = log[-1].epoch if log else 0
    step = model.iterations_total
    run_steps = 0
    passes = 0
    best_acc = -math.inf
    best_weights: dict[str, torch.Tensor] | None = None
    stale = 0
    stopped = False

    while not stopped:
        if (fixed and steps_left == 0) or (not fixed and passes == budget.max_epochs):
            break
        epoch += 1
        passes += 1
        order = torch.randperm(len(data), generator=generator)
        counts = torch.zeros(num_classes, dtype=torch.int64)
        losses: list[float] = []

        for start in range(0, len(data), budget.batch_size):
            if fixed and steps_left == 0:
                break
            batch = order[start : start + budget.batch_size]
            images, labels = data.images[batch], data.labels[batch]
            loss = training_loss(module, images, labels)
            if not torch.isfinite(loss):
                last = ModelState.from_module(config, module, tuple(log))
                raise TrainingDivergedError(
                    f"non-finite loss {loss.item()} at iteration {step + 1}", last
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

            counts += torch.bincount(labels, minlength=num_classes)
            losses.append(loss.item())
            step += 1
            run_steps += 1
            steps_left -= 1
            if stop_check is not None and run_steps % budget.check_every == 0:
                module.eval()
                stopped = stop_check(module)
                module.train()
                if stopped:
                    logger.info("Stop condition met after %d iteration(s)", run_steps)
                    break

        val_acc = module_accuracy(module, val) if val is not None and len(val) else None
        record = EpochRecord(
            epoch=epoch,
            iterations=len(losses),
            loss=sum(losses) / len(losses),
            val_acc=val_acc,
            class_counts=tuple(int(c) for c in counts.tolist()),
        )
        log.append(record)
        _emit(progress, record, step)

        if not fixed and val_acc is not None:
            if val_acc > best_acc:
                best_acc = val_acc
                best_weights = {k: v.detach().clone() for k, v in module.state_dict().items()}
                stale = 0
            else:
                stale += 1
                if budget.patience and stale >= budget.patience:
                    logger.info(
                        "Early stop at epoch %d; best val_acc %.4f", epoch, best_acc
                    )
                    break

    if best_weights is not None:
        return ModelState.from_weights(config, best_weights, tuple(log))
    return ModelState.from_module(config, module, tuple(log))


def _emit(progress: ProgressSink | None, record: EpochRecord, step: int) -> None:
    val = "" if record.val_acc is None else f"{record.val_acc:.6f}"
    line = f"{record.epoch},{step},{record.loss:.6f},{val}"
    logger.debug("progress %s", line)
    if progress is not None:
        progress(line)


def module_accuracy(module: nn.Module, view: SampleView) -> float:
    """Top-1 accuracy of a live module on a view, evaluated in eval mode."""
    if len(view) == 0:
        raise DomainError("cannot compute accuracy on an empty view")
    was_training = module.training
    module.eval()
    correct = 0
    with torch.no_grad():
        for start in range(0, len(view), INFERENCE_BATCH_SIZE):
            logits = module(view.images[start : start + INFERENCE_BATCH_SIZE])
            labels = view.labels[start : start + INFERENCE_BATCH_SIZE]
            correct += int((logits.argmax(dim=1) == labels).sum())
    module.train(was_training)
    return correct / len(view)


def _batched(
    fn: Callable[[torch.Tensor], torch.Tensor], images: torch.Tensor, width: int
) -> torch.Tensor:
    outputs = [
        fn(images[start : start + INFERENCE_BATCH_SIZE])
        for start in range(0, images.shape[0], INFERENCE_BATCH_SIZE)
    ]
    if not outputs:
        return torch.zeros((0, width), dtype=torch.float32)
    return torch.cat(outputs)


def predict_probs(model: ModelState, images: torch.Tensor) -> torch.Tensor:
    """Return the softmax class probabilities, shape (N, K).

    Raises:
        ShapeError: If the images do not match the model geometry.
    """
    _check_images(model.config, images)
    module = model.instantiate()
    with torch.no_grad():
        return _batched(lambda x: torch.softmax(module(x), dim=1), images, model.config.num_classes)


def extract_features(model: ModelState, images: torch.Tensor) -> torch.Tensor:
    """Return penultimate-layer activations, shape (N, F).

    Raises:
        ShapeError: If the images do not match the model geometry.
    """
    _check_images(model.config, images)
    module = model.instantiate()
    with torch.no_grad():
        return _batched(module.features, images, module.feature_dim)
