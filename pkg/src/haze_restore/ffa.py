"""Feature Fusion Attention generator.

Pixel/channel attention layers composed into residual blocks, blocks into
groups, and groups into a head/body/tail network with a global residual
connection. With every learnable parameter at zero the network is an exact
identity, which anchors several tests and the closed-form GAN loss values.
"""

import math
from dataclasses import dataclass

import torch
import torch.nn as nn

from .errors import ConfigurationError, InputError

MIN_SPATIAL = 16


@dataclass(frozen=True)
class FFAConfig:
    num_groups: int = 3
    blocks_per_group: int = 6
    feature_dim: int = 64
    kernel_size: int = 3
    ca_reduction: int = 8

    def __post_init__(self):
        if self.num_groups < 1 or self.blocks_per_group < 1 or self.feature_dim < 1:
            raise ConfigurationError("num_groups, blocks_per_group and feature_dim must be positive")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigurationError(f"kernel_size must be odd and positive, got {self.kernel_size}")
        if self.ca_reduction < 1 or self.feature_dim % self.ca_reduction != 0:
            raise ConfigurationError(
                f"ca_reduction ({self.ca_reduction}) must divide feature_dim ({self.feature_dim})"
            )


def default_conv(in_channels, out_channels, kernel_size, bias=True):
    return nn.Conv2d(in_channels, out_channels, kernel_size, padding=kernel_size // 2, bias=bias)


class PALayer(nn.Module):
    """Pixel attention: one spatial gate map in (0,1) shared across channels."""

    def __init__(self, channel, reduction=8):
        super().__init__()
        self.channel = channel
        self.pa = nn.Sequential(
            nn.Conv2d(channel, max(channel // reduction, 1), 1, padding=0, bias=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(max(channel // reduction, 1), 1, 1, padding=0, bias=True),
            nn.Sigmoid(),
        )

    def forward(self, x):
        if x.size(1) != self.channel:
            raise ConfigurationError(f"PALayer expects {self.channel} channels, got {x.size(1)}")
        return x * self.pa(x)


class CALayer(nn.Module):
    """Channel attention: per-channel gates in (0,1) from globally pooled features."""

    def __init__(self, channel, reduction=8):
        super().__init__()
        self.channel = channel
        self.avg_pool = nn.AdaptiveAvgPool2d(1)
        self.ca = nn.Sequential(
            nn.Conv2d(channel, max(channel // reduction, 1), 1, padding=0, bias=True),
            nn.ReLU(inplace=True),
            nn.Conv2d(max(channel // reduction, 1), channel, 1, padding=0, bias=True),
            nn.Sigmoid(),
        )

    def forward(self, x):
        if x.size(1) != self.channel:
            raise ConfigurationError(f"CALayer expects {self.channel} channels, got {x.size(1)}")
        return x * self.ca(self.avg_pool(x))


class Block(nn.Module):
    """Residual block: conv-ReLU-conv, channel then pixel attention, skip from input."""

    def __init__(self, dim, kernel_size, reduction=8):
        super().__init__()
        self.conv1 = default_conv(dim, dim, kernel_size)
        self.act = nn.ReLU(inplace=True)
        self.conv2 = default_conv(dim, dim, kernel_size)
        self.calayer = CALayer(dim, reduction)
        self.palayer = PALayer(dim, reduction)

    def forward(self, x):
        res = self.conv2(self.act(self.conv1(x)))
        res = self.calayer(res)
        res = self.palayer(res)
        return x + res


class Group(nn.Module):
    """Several blocks plus a trailing conv, wrapped in a long skip connection."""

    def __init__(self, dim, kernel_size, blocks, reduction=8):
        super().__init__()
        self.blocks = nn.Sequential(*[Block(dim, kernel_size, reduction) for _ in range(blocks)])
        self.conv = default_conv(dim, dim, kernel_size)

    def forward(self, x):
        return x + self.conv(self.blocks(x))


class FFA(nn.Module):
    """Full generator: head conv, residual groups, fused-feature attention, tail conv,
    global residual add of the input image."""

    def __init__(self, cfg: FFAConfig = FFAConfig(), seed=None):
        super().__init__()
        self.cfg = cfg
        dim, k, r = cfg.feature_dim, cfg.kernel_size, cfg.ca_reduction
        fused_dim = dim * cfg.num_groups
        self.head = default_conv(3, dim, k)
        self.groups = nn.ModuleList(
            [Group(dim, k, cfg.blocks_per_group, r) for _ in range(cfg.num_groups)]
        )
        # attention over the concatenated group outputs, then a 1x1 reduction
        self.fusion_ca = CALayer(fused_dim, r)
        self.fusion_pa = PALayer(fused_dim, r)
        self.fusion_conv = nn.Conv2d(fused_dim, dim, 1, padding=0, bias=True)
        self.tail = default_conv(dim, 3, k)
        if seed is not None:
            init_weights(self, seed)

    def forward(self, x):
        if x.dim() != 4 or x.size(1) != 3:
            raise InputError(f"expected a (batch, 3, h, w) image tensor, got shape {tuple(x.shape)}")
        if x.size(2) < MIN_SPATIAL or x.size(3) < MIN_SPATIAL:
            raise InputError(
                f"spatial dims must be at least {MIN_SPATIAL}x{MIN_SPATIAL}, got {x.size(2)}x{x.size(3)}"
            )
        f = self.head(x)
        group_outs = []
        for group in self.groups:
            f = group(f)
            group_outs.append(f)
        fused = torch.cat(group_outs, dim=1)
        fused = self.fusion_pa(self.fusion_ca(fused))
        out = self.tail(self.fusion_conv(fused))
        return out + x

    @torch.no_grad()
    def restore(self, x):
        """Inference boundary: forward pass with the output clamped to [0,1]."""
        training = self.training
        self.eval()
        try:
            return self.forward(x).clamp(0.0, 1.0)
        finally:
            self.train(training)


def init_weights(module: nn.Module, seed: int):
    """Scaled uniform fan-in init for conv weights, zero biases, seeded."""
    gen = torch.Generator().manual_seed(seed)
    for m in module.modules():
        if isinstance(m, nn.Conv2d):
            fan_in = m.in_channels * m.kernel_size[0] * m.kernel_size[1]
            bound = 1.0 / math.sqrt(fan_in)
            with torch.no_grad():
                m.weight.uniform_(-bound, bound, generator=gen)
                if m.bias is not None:
                    m.bias.zero_()
        elif isinstance(m, nn.BatchNorm2d):
            with torch.no_grad():
                m.weight.fill_(1.0)
                m.bias.zero_()
    return module


def zero_weights(module: nn.Module):
    """Set every learnable parameter to zero (identity FFA, zero-score discriminator)."""
    with torch.no_grad():
        for p in module.parameters():
            p.zero_()
    return module
