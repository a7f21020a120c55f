"""Hybrid FFA + CycleGAN image restoration.

A feature-fusion attention generator trained in three phases: supervised
pretraining on paired data, unpaired cycle-consistent adversarial training,
and K-shot paired fine-tuning producing selectable model variants.
"""

from .errors import CheckpointError, ConfigurationError, InputError
from .ffa import FFA, FFAConfig, CALayer, PALayer, Block, Group, init_weights, zero_weights
from .cyclegan import (
    CycleGANState,
    Discriminator,
    DiscriminatorConfig,
    LossConfig,
    cycle_consistency_loss,
    discriminator_step_losses,
    gan_loss,
    generator_step_losses,
)
from .metrics import MetricReport, psnr, ssim
from .data import (
    AugmentationConfig,
    PairedDatasetSpec,
    UnpairedDatasetSpec,
    load_paired,
    load_unpaired,
    synthesize_degradation,
)
from .training import (
    Checkpoint,
    TrainConfig,
    build_generator,
    evaluate,
    finetune,
    load_checkpoint,
    save_checkpoint,
    train_cyclegan,
    train_ffa,
)

__version__ = "0.1.0"
