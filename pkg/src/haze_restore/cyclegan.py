"""Adversarial wrapper around two FFA generators.

Least-squares GAN scores from PatchGAN-style discriminators, plus the
cycle-consistency term weighted by lambda_cycle. The generator loss treats
discriminator parameters as constants; the discriminator loss sees detached
fakes, so the two optimization steps are gradient-isolated.
"""

from contextlib import contextmanager
from dataclasses import dataclass

import torch
import torch.nn as nn

from .errors import ConfigurationError, InputError
from .ffa import FFA, FFAConfig, init_weights

DISC_MAX_CHANNELS = 512


@dataclass(frozen=True)
class LossConfig:
    lambda_cycle: float = 10.0
    gan_loss_mode: str = "least-squares"

    def __post_init__(self):
        if self.lambda_cycle < 0:
            raise ConfigurationError(f"lambda_cycle must be nonnegative, got {self.lambda_cycle}")
        if self.gan_loss_mode != "least-squares":
            raise ConfigurationError(f"unsupported gan_loss_mode {self.gan_loss_mode!r}")


@dataclass(frozen=True)
class DiscriminatorConfig:
    base_channels: int = 64
    num_layers: int = 4
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.base_channels < 1:
            raise ConfigurationError("base_channels must be positive")
        if self.num_layers < 2:
            raise ConfigurationError(f"num_layers must be at least 2, got {self.num_layers}")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ConfigurationError(f"leaky_slope must lie in (0,1), got {self.leaky_slope}")


class Discriminator(nn.Module):
    """Patch classifier: num_layers stride-2 convs (channels doubling, capped at 512),
    BatchNorm on all but the first, LeakyReLU throughout, then a stride-1
    projection to one unbounded score channel."""

    def __init__(self, cfg: DiscriminatorConfig = DiscriminatorConfig(), seed=None):
        super().__init__()
        self.cfg = cfg
        layers = [
            nn.Conv2d(3, cfg.base_channels, 4, stride=2, padding=1),
            nn.LeakyReLU(cfg.leaky_slope, inplace=True),
        ]
        ch = cfg.base_channels
        for _ in range(cfg.num_layers - 1):
            nxt = min(ch * 2, DISC_MAX_CHANNELS)
            layers += [
                nn.Conv2d(ch, nxt, 4, stride=2, padding=1),
                nn.BatchNorm2d(nxt),
                nn.LeakyReLU(cfg.leaky_slope, inplace=True),
            ]
            ch = nxt
        layers.append(nn.Conv2d(ch, 1, 4, stride=1, padding=1))
        self.model = nn.Sequential(*layers)
        if seed is not None:
            init_weights(self, seed)

    def forward(self, x):
        if x.dim() != 4 or x.size(1) != 3:
            raise InputError(f"expected a (batch, 3, h, w) image tensor, got shape {tuple(x.shape)}")
        minimum = 2 ** self.cfg.num_layers
        if x.size(2) < minimum or x.size(3) < minimum:
            raise InputError(
                f"input {x.size(2)}x{x.size(3)} too small for {self.cfg.num_layers} stride-2 layers "
                f"(needs at least {minimum}x{minimum})"
            )
        return self.model(x)


class CycleGANState(nn.Module):
    """Two FFA generators (hazy<->clean) and one discriminator per domain."""

    def __init__(self, ffa_cfg: FFAConfig = FFAConfig(),
                 disc_cfg: DiscriminatorConfig = DiscriminatorConfig(), seed=None):
        super().__init__()
        self.generator_xy = FFA(ffa_cfg)   # hazy -> clean
        self.generator_yx = FFA(ffa_cfg)   # clean -> hazy
        self.discriminator_x = Discriminator(disc_cfg)  # hazy domain
        self.discriminator_y = Discriminator(disc_cfg)  # clean domain
        if seed is not None:
            for offset, net in enumerate(
                (self.generator_xy, self.generator_yx, self.discriminator_x, self.discriminator_y)
            ):
                init_weights(net, seed + offset)

    def generator_parameters(self):
        yield from self.generator_xy.parameters()
        yield from self.generator_yx.parameters()

    def discriminator_parameters(self):
        yield from self.discriminator_x.parameters()
        yield from self.discriminator_y.parameters()


def gan_loss(scores, target_is_real):
    """Least-squares GAN loss: MSE against a constant 1.0 (real) or 0.0 (fake) map."""
    target = torch.ones_like(scores) if target_is_real else torch.zeros_like(scores)
    return torch.mean((scores - target) ** 2)


def cycle_consistency_loss(original, reconstructed, cfg: LossConfig):
    """lambda_cycle times the mean absolute difference."""
    if original.shape != reconstructed.shape:
        raise InputError(
            f"shape mismatch: original {tuple(original.shape)} vs reconstructed {tuple(reconstructed.shape)}"
        )
    return cfg.lambda_cycle * torch.mean(torch.abs(original - reconstructed))


@dataclass
class GeneratorLosses:
    adv_xy: torch.Tensor
    adv_yx: torch.Tensor
    cyc_forward: torch.Tensor
    cyc_backward: torch.Tensor
    total: torch.Tensor
    fake_clean: torch.Tensor
    fake_hazy: torch.Tensor


@dataclass
class DiscriminatorLosses:
    loss_x: torch.Tensor
    loss_y: torch.Tensor
    total: torch.Tensor


@contextmanager
def frozen(*modules):
    """Mark parameters as constants so backward leaves their gradients untouched."""
    params = [p for m in modules for p in m.parameters()]
    prior = [p.requires_grad for p in params]
    for p in params:
        p.requires_grad_(False)
    try:
        yield
    finally:
        for p, r in zip(params, prior):
            p.requires_grad_(r)


def generator_step_losses(state: CycleGANState, hazy_batch, clean_batch, cfg: LossConfig):
    """Adversarial terms for both generators plus both cycle reconstructions.

    Discriminator parameters are frozen for the whole computation, so a
    backward pass on `total` leaves them without gradients.
    """
    with frozen(state.discriminator_x, state.discriminator_y):
        fake_clean = state.generator_xy(hazy_batch)
        fake_hazy = state.generator_yx(clean_batch)
        adv_xy = gan_loss(state.discriminator_y(fake_clean), target_is_real=True)
        adv_yx = gan_loss(state.discriminator_x(fake_hazy), target_is_real=True)
        rec_hazy = state.generator_yx(fake_clean)
        rec_clean = state.generator_xy(fake_hazy)
        cyc_forward = cycle_consistency_loss(hazy_batch, rec_hazy, cfg)
        cyc_backward = cycle_consistency_loss(clean_batch, rec_clean, cfg)
        total = adv_xy + adv_yx + cyc_forward + cyc_backward
    return GeneratorLosses(adv_xy, adv_yx, cyc_forward, cyc_backward, total, fake_clean, fake_hazy)


def discriminator_step_losses(state: CycleGANState, hazy_batch, clean_batch, fake_hazy, fake_clean):
    """Per-discriminator 0.5 * (MSE(D(real), 1) + MSE(D(fake), 0)); fakes are detached."""
    loss_x = 0.5 * (
        gan_loss(state.discriminator_x(hazy_batch), target_is_real=True)
        + gan_loss(state.discriminator_x(fake_hazy.detach()), target_is_real=False)
    )
    loss_y = 0.5 * (
        gan_loss(state.discriminator_y(clean_batch), target_is_real=True)
        + gan_loss(state.discriminator_y(fake_clean.detach()), target_is_real=False)
    )
    return DiscriminatorLosses(loss_x, loss_y, loss_x + loss_y)
