##############################################################################
#
# Name: network.py
#
# Function:
#       The classifier nn.Module: backbone, fully connected head, init
#
# Copyright notice and license:
#       See LICENSE.md
#
# Author:
#       unlearn-lab developers
#
##############################################################################

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn
from torchvision.models import resnet34

from unlearn_lab.model.config import Backbone, InitScheme, ModelConfig


def _small_conv(config: ModelConfig) -> tuple[nn.Module, int]:
    height, width, channels = config.input_geometry
    if not config.conv_channels:
        return nn.Flatten(), height * width * channels

    layers: list[nn.Module] = []
    prev = channels
    for out in config.conv_channels:
        layers += [nn.Conv2d(prev, out, kernel_size=3, padding=1), nn.ReLU(inplace=True)]
        if min(height, width) >= 2:
            layers.append(nn.MaxPool2d(2))
            height, width = height // 2, width // 2
        prev = out
    layers += [nn.AdaptiveAvgPool2d(config.pooled_size), nn.Flatten()]
    return nn.Sequential(*layers), prev * config.pooled_size**2


def _residual(config: ModelConfig) -> tuple[nn.Module, int]:
    net = resnet34(weights=None)
    net.conv1 = nn.Conv2d(
        config.input_geometry[2], 64, kernel_size=7, stride=2, padding=3, bias=False
    )
    feature_dim = net.fc.in_features
    net.fc = nn.Identity()
    return net, feature_dim


class Classifier(nn.Module):
    """Backbone followed by a ReLU/dropout head ending in K logits."""

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        if config.backbone is Backbone.RESIDUAL_34_LIKE:
            self.backbone, prev = _residual(config)
        else:
            self.backbone, prev = _small_conv(config)

        hidden: list[nn.Module] = []
        for width in config.head_widths[:-1]:
            hidden += [
                nn.Linear(prev, width),
                nn.ReLU(inplace=True),
                nn.Dropout(config.dropout_rate),
            ]
            prev = width
        self.hidden = nn.Sequential(*hidden)
        self.output = nn.Linear(prev, config.num_classes)
        self.feature_dim = prev

        if config.init_scheme is InitScheme.KAIMING_LIKE:
            self.apply(_kaiming_init)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        """Return penultimate-layer activations."""
        return self.hidden(self.backbone(x))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.output(self.features(x))


def _kaiming_init(module: nn.Module) -> None:
    if isinstance(module, (nn.Conv2d, nn.Linear)):
        nn.init.kaiming_normal_(module.weight, mode="fan_in", nonlinearity="relu")
        if module.bias is not None:
            nn.init.zeros_(module.bias)


def training_loss(module: nn.Module, images: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Cross-entropy of the module's logits against integer labels."""
    return F.cross_entropy(module(images), labels)
