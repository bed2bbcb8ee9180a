##############################################################################
#
# Name: features.py
#
# Function:
#       Penultimate-layer feature export for external embedding tools
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import csv
import logging
from pathlib import Path

from unlearn_lab.data.dataset import SampleView
from unlearn_lab.data.partition import ClassPartition
from unlearn_lab.errors import ExportError
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import extract_features

logger = logging.getLogger(__name__)

UNASSIGNED_ROLE = "unassigned"


def export_features(
    model: ModelState,
    view: SampleView,
    path: Path,
    partition: ClassPartition | None = None,
) -> Path:
    """Write one CSV row per sample: id, label, role, then the features.

    The header is ``sample_id,true_label,role,f0,...,f{d-1}``. Feature
    values are written with ``repr`` so they parse back exactly.

    Args:
        model: Model whose penultimate activations are exported.
        view: Samples to export.
        path: Output file.
        partition: Gives each row its ``retain``/``forget`` role; without
            it every row is ``unassigned``.

    Returns:
        ``path``.

    Raises:
        ExportError: If the file cannot be written.
    """
    features = extract_features(model, view.images)
    width = features.shape[1]
    ids = view.ids.tolist()
    labels = view.labels.tolist()
    rows = features.tolist()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["sample_id", "true_label", "role", *(f"f{i}" for i in range(width))])
            for sample_id, label, row in zip(ids, labels, rows, strict=True):
                role = partition.role_of(label).value if partition else UNASSIGNED_ROLE
                writer.writerow([sample_id, label, role, *(repr(v) for v in row)])
    except OSError as e:
        raise ExportError(f"Cannot write features to {path}: {e}") from e
    logger.info("Exported %d x %d features to %s", len(ids), width, path)
    return path
