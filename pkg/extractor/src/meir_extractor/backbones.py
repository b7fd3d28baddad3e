"""Pretrained CNN backbones truncated to penultimate-layer features."""

from __future__ import annotations

import torch
from torch import nn
from torchvision import models

FEATURE_DIMS = {"densenet121": 1024, "resnet50": 2048, "vgg16": 4096}


class WeightDownloadFailure(Exception):
    pass


class _DenseNetFeatures(nn.Module):
    def __init__(self, net):
        super().__init__()
        self.features = net.features

    def forward(self, x):
        out = torch.relu(self.features(x))
        out = torch.nn.functional.adaptive_avg_pool2d(out, 1)
        return torch.flatten(out, 1)


def build_backbone(name: str, weights: str = "pretrained") -> nn.Module:
    """Feature extractor for one of the supported backbones.

    weights: "pretrained" downloads ImageNet weights, "none" keeps the
    seeded random initialization (dims and wiring unchanged), or a path
    to a state-dict checkpoint.
    """
    if name not in FEATURE_DIMS:
        raise ValueError(f"unknown backbone {name!r}; choose from {sorted(FEATURE_DIMS)}")
    torch.manual_seed(42)  # reproducible init for weights="none"
    pretrained = weights == "pretrained"
    try:
        if name == "densenet121":
            net = models.densenet121(
                weights=models.DenseNet121_Weights.IMAGENET1K_V1 if pretrained else None)
            model = _DenseNetFeatures(net)
        elif name == "resnet50":
            net = models.resnet50(
                weights=models.ResNet50_Weights.IMAGENET1K_V1 if pretrained else None)
            modules = list(net.children())[:-1]  # drop the fc head
            model = nn.Sequential(*modules, nn.Flatten(1))
        else:
            net = models.vgg16(
                weights=models.VGG16_Weights.IMAGENET1K_V1 if pretrained else None)
            head = nn.Sequential(*list(net.classifier.children())[:-1])  # keep fc7
            model = nn.Sequential(net.features, net.avgpool, nn.Flatten(1), head)
    except Exception as exc:
        if pretrained:
            raise WeightDownloadFailure(
                f"could not obtain pretrained weights for {name}: {exc}"
            ) from exc
        raise
    if weights not in ("pretrained", "none"):
        state = torch.load(weights, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return model
