##############################################################################
#
# Name: test_forge.py
#
# Function:
#       Unit tests for noise batches, the class-conditional projector and
#       synthetic sample dumps
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

import pytest
import torch
from PIL import Image

from unlearn_lab.errors import ConfigError, DomainError
from unlearn_lab.forge.batch import Origin, SyntheticBatch, dump_samples, make_noise_batch
from unlearn_lab.forge.projector import (
    GeneratorConfig,
    Projector,
    ProjectorState,
    generate_samples,
    load_projector,
    projector_loss,
    save_projector,
    smoothed_targets,
    train_projector,
)
from unlearn_lab.model.config import ModelConfig
from unlearn_lab.model.state import ModelState
from unlearn_lab.model.trainer import build_model, predict_probs

FAST_GENERATOR = GeneratorConfig(
    noise_dim=8, steps=200, learning_rate=1e-2, batch=32, seed=0, probe_size=32
)


@pytest.fixture(scope="module")
def projector(trained_model: ModelState) -> ProjectorState:
    """A projector for class 1 of the trained toy classifier."""
    return train_projector(trained_model, [1], FAST_GENERATOR)


class TestNoiseBatch:
    """Test make_noise_batch."""

    def test_uniform_pixels(self) -> None:
        """Test the mean of 1e5 pixels lies in [0.49, 0.51]."""
        batch = make_noise_batch((10, 10, 1), 2, 1000, seed=0)

        assert batch.images.shape == (1000, 1, 10, 10)
        assert 0.49 <= float(batch.images.mean()) <= 0.51
        assert float(batch.images.min()) >= 0.0
        assert float(batch.images.max()) < 1.0
        assert batch.source_class.unique().tolist() == [2]
        assert batch.origin is Origin.NOISE

    def test_deterministic_per_seed(self) -> None:
        first = make_noise_batch((4, 4, 3), 0, 5, seed=9)
        second = make_noise_batch((4, 4, 3), 0, 5, seed=9)

        assert torch.equal(first.images, second.images)
        assert not torch.equal(first.images, make_noise_batch((4, 4, 3), 0, 5, seed=10).images)

    def test_negative_count_rejected(self) -> None:
        with pytest.raises(DomainError, match="non-negative"):
            make_noise_batch((4, 4, 1), 0, -1, seed=0)

    def test_zero_count(self) -> None:
        assert len(make_noise_batch((4, 4, 1), 0, 0, seed=0)) == 0

    def test_view_uses_negative_ids(self) -> None:
        view = make_noise_batch((4, 4, 1), 3, 3, seed=0).as_view()

        assert view.ids.tolist() == [-1, -2, -3]
        assert view.labels.tolist() == [3, 3, 3]


class TestSmoothedTargets:
    """Test label-smoothed target rows."""

    def test_rows(self) -> None:
        targets = smoothed_targets(torch.tensor([2, 0]), 4, 0.3)

        assert targets[0].tolist() == pytest.approx([0.1, 0.1, 0.7, 0.1])
        assert targets[1].tolist() == pytest.approx([0.7, 0.1, 0.1, 0.1])
        assert torch.allclose(targets.sum(dim=1), torch.ones(2))

    def test_eps_bound(self) -> None:
        """Test eps must stay below (K-1)/K so the argmax survives."""
        with pytest.raises(ConfigError, match="below"):
            GeneratorConfig(smoothing_eps=0.5).check_eps(2)
        GeneratorConfig(smoothing_eps=0.4).check_eps(2)

    @pytest.mark.parametrize("eps", [0.0, 1.0])
    def test_eps_range(self, eps: float) -> None:
        with pytest.raises(ConfigError, match="smoothing_eps"):
            GeneratorConfig(smoothing_eps=eps)

    def test_hidden_width_default(self) -> None:
        assert GeneratorConfig(noise_dim=8).hidden == 32
        assert GeneratorConfig(noise_dim=8, hidden_width=5).hidden == 5


class TestTrainProjector:
    """Test projector training against a frozen classifier."""

    def test_frozen_classifier_untouched(
        self, trained_model: ModelState, projector: ProjectorState
    ) -> None:
        assert trained_model.verify()
        assert projector.frozen_model_digest == trained_model.weight_digest

    def test_held_out_loss_drops(self, projector: ProjectorState) -> None:
        assert projector.loss_after < projector.loss_before

    def test_generated_beats_noise(
        self, trained_model: ModelState, projector: ProjectorState
    ) -> None:
        """Test the classifier is more confident in class 1 on generated images."""
        generated = generate_samples(projector, 1, 64, seed=3)
        noise = make_noise_batch(trained_model.config.input_geometry, 1, 64, seed=3)

        gen_conf = predict_probs(trained_model, generated.images)[:, 1].mean()
        noise_conf = predict_probs(trained_model, noise.images)[:, 1].mean()

        assert float(gen_conf) > float(noise_conf)

    def test_generation_deterministic(self, projector: ProjectorState) -> None:
        first = generate_samples(projector, 1, 4, seed=5)
        second = generate_samples(projector, 1, 4, seed=5)

        assert torch.equal(first.images, second.images)
        assert first.origin is Origin.GENERATED
        assert first.geometry == (12, 12, 1)

    def test_zero_count(self, projector: ProjectorState) -> None:
        assert len(generate_samples(projector, 1, 0, seed=0)) == 0

    def test_untrained_class_rejected(self, projector: ProjectorState) -> None:
        with pytest.raises(DomainError, match="not 0"):
            generate_samples(projector, 0, 4, seed=0)

    def test_empty_targets_rejected(self, trained_model: ModelState) -> None:
        with pytest.raises(DomainError, match="empty"):
            train_projector(trained_model, [], FAST_GENERATOR)

    def test_out_of_range_target_rejected(self, trained_model: ModelState) -> None:
        with pytest.raises(DomainError, match="outside"):
            train_projector(trained_model, [4], FAST_GENERATOR)

    def test_same_seed_same_projector(self, trained_model: ModelState) -> None:
        config = GeneratorConfig(noise_dim=4, steps=3, batch=8, probe_size=8, seed=2)
        first = train_projector(trained_model, [0, 2], config)
        second = train_projector(trained_model, [0, 2], config)

        assert first.weight_digest == second.weight_digest
        assert first.target_classes == (0, 2)

    def test_save_and_load(self, projector: ProjectorState, tmp_path: Path) -> None:
        path = save_projector(projector, tmp_path / "projector.pt")
        loaded = load_projector(path)

        assert loaded.weight_digest == projector.weight_digest
        assert loaded.frozen_model_digest == projector.frozen_model_digest
        assert loaded.loss_after == projector.loss_after
        assert torch.equal(
            generate_samples(loaded, 1, 3, seed=1).images,
            generate_samples(projector, 1, 3, seed=1).images,
        )


class TestSyntheticBatch:
    """Test SyntheticBatch invariants and dumps."""

    def test_generated_needs_digest(self) -> None:
        with pytest.raises(DomainError, match="digest"):
            SyntheticBatch(
                images=torch.zeros((1, 1, 2, 2)),
                source_class=torch.zeros(1, dtype=torch.int64),
                origin=Origin.GENERATED,
                seed=0,
            )

    def test_concat(self) -> None:
        joined = SyntheticBatch.concat(
            [make_noise_batch((3, 3, 1), 0, 2, 1), make_noise_batch((3, 3, 1), 2, 3, 2)], seed=1
        )
        assert joined.source_class.tolist() == [0, 0, 2, 2, 2]

    def test_concat_of_mixed_origins_rejected(self, projector: ProjectorState) -> None:
        generated = generate_samples(projector, 1, 1, seed=0)
        noise = make_noise_batch(generated.geometry, 1, 1, seed=0)

        with pytest.raises(DomainError, match="mix"):
            SyntheticBatch.concat([generated, noise], seed=0)

    def test_dump_file_names(self, tmp_path: Path) -> None:
        """Test dumps are named class_seed_index.png and load back as images."""
        batch = make_noise_batch((5, 6, 1), 3, 2, seed=7)
        paths = dump_samples(batch, tmp_path / "dump")

        assert [p.name for p in paths] == ["3_7_0.png", "3_7_1.png"]
        with Image.open(paths[0]) as image:
            assert image.size == (6, 5)

    def test_dump_rgb(self, tmp_path: Path) -> None:
        paths = dump_samples(make_noise_batch((4, 4, 3), 0, 1, seed=0), tmp_path)
        with Image.open(paths[0]) as image:
            assert image.mode == "RGB"


class TestProjectorGradient:
    """Test projector gradients against central differences."""

    def test_float64_gradients_match_numeric(self) -> None:
        config = ModelConfig(
            input_geometry=(4, 4, 1), head_widths=(8, 3), conv_channels=(), dropout_rate=0.0
        )
        classifier = build_model(config, 0).instantiate().double()
        classifier.eval()
        for param in classifier.parameters():
            param.requires_grad_(False)
        torch.manual_seed(0)
        projector = Projector(3, noise_dim=2, hidden=4, geometry=(4, 4, 1)).double()
        generator = torch.Generator().manual_seed(1)
        classes = torch.tensor([0, 1, 2, 1])
        z = torch.randn((4, 2), generator=generator, dtype=torch.float64)

        projector.zero_grad()
        projector_loss(projector, classifier, classes, z, 0.1).backward()

        h = 1e-6
        good = total = 0
        with torch.no_grad():
            for param in projector.parameters():
                flat = param.view(-1)
                analytic = param.grad.view(-1).clone()
                for i in range(flat.numel()):
                    saved = float(flat[i])
                    flat[i] = saved + h
                    plus = float(projector_loss(projector, classifier, classes, z, 0.1))
                    flat[i] = saved - h
                    minus = float(projector_loss(projector, classifier, classes, z, 0.1))
                    flat[i] = saved
                    numeric = (plus - minus) / (2 * h)
                    a = float(analytic[i])
                    rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-5)
                    good += rel < 1e-4
                    total += 1

        assert good / total >= 0.95
        assert all(p.grad is None for p in classifier.parameters())
