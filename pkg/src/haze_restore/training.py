"""Three-phase training protocol, checkpointing, evaluation, and experiment grids.

Phase 1: supervised FFA pretraining with L1 loss on paired data.
Phase 2: unpaired CycleGAN training with the pretrained FFA as the
         hazy-to-clean generator.
Phase 3: K-shot paired fine-tuning (K in {0, 5, 10, 20, 25}) producing the
         selectable variants.

Batch order and per-item randomness are pure functions of (seed, epoch), so a
run checkpointed at step k and resumed reproduces the uninterrupted run
exactly: no hidden global RNG state needs to survive the round trip.
"""

import copy
import logging
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
from torchvision.utils import save_image as save_image_grid

from .cyclegan import (
    CycleGANState,
    DiscriminatorConfig,
    LossConfig,
    discriminator_step_losses,
    generator_step_losses,
)
from .data import denormalize
from .errors import CheckpointError, ConfigurationError, InputError
from .ffa import FFA, FFAConfig
from .metrics import MetricReport, mean_report, psnr, ssim, write_report_csv, write_report_json

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
PHASES = ("ffa_pretrain", "cyclegan", "finetune")
ALLOWED_K = (0, 5, 10, 20, 25)

# paper-reported fine-tuning results, surfaced by the service as reference numbers
REPORTED_VARIANT_METRICS = {
    25: {"ssim": 0.9084, "psnr_db": 19.16},
    20: {"ssim": 0.8976, "psnr_db": 18.93},
    10: {"ssim": 0.8760, "psnr_db": 18.47},
    5: {"ssim": 0.8652, "psnr_db": 18.25},
    0: {"ssim": 0.8544, "psnr_db": 18.02},
}


@dataclass(frozen=True)
class TrainConfig:
    phase: str = "ffa_pretrain"
    lr: float = 0.001
    adam_betas: tuple = (0.9, 0.999)
    epochs: int = 50
    batch_size: int = 1
    grad_accum_steps: int = 1
    k_paired: int = 0
    seed: int = 0
    checkpoint_dir: str | None = None
    max_steps: int | None = None      # optional cap on optimizer steps (smoke profiles)
    checkpoint_every: int = 0         # steps between periodic checkpoints, 0 = final only
    sample_every: int = 0             # steps between sample-image dumps, 0 = off
    lambda_supervised: float = 5.0    # weight of the K-shot L1 term in finetune
    mixed_precision: bool = False
    device: str = "cpu"
    ffa: FFAConfig = field(default_factory=FFAConfig)
    disc: DiscriminatorConfig = field(default_factory=DiscriminatorConfig)
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ConfigurationError(f"phase must be one of {PHASES}, got {self.phase!r}")
        if self.lr <= 0:
            raise ConfigurationError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 1 or self.grad_accum_steps < 1:
            raise ConfigurationError("batch_size and grad_accum_steps must be at least 1")
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be nonnegative, got {self.epochs}")

    @classmethod
    def for_phase(cls, phase, **overrides):
        """Phase defaults: FFA at lr 0.001 betas (0.9, 0.999); GAN phases at
        lr 0.0002 betas (0.5, 0.999)."""
        defaults = {"phase": phase}
        if phase == "ffa_pretrain":
            defaults.update(lr=0.001, adam_betas=(0.9, 0.999))
        else:
            defaults.update(lr=0.0002, adam_betas=(0.5, 0.999))
        defaults.update(overrides)
        return cls(**defaults)


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


@dataclass
class Checkpoint:
    phase: str
    variant: str
    epoch: int
    step: int
    config: dict
    weights: dict
    optimizers: dict
    history: list
    version: int = CHECKPOINT_VERSION

    def filename(self):
        return f"{self.phase}_{self.variant}_{self.epoch}.ckpt"


def config_snapshot(cfg: TrainConfig):
    snap = asdict(cfg)
    snap["adam_betas"] = list(snap["adam_betas"])
    snap["checkpoint_dir"] = str(cfg.checkpoint_dir) if cfg.checkpoint_dir else None
    return snap


def ffa_config_from(snapshot):
    return FFAConfig(**snapshot["ffa"])


def disc_config_from(snapshot):
    return DiscriminatorConfig(**snapshot["disc"])


def save_checkpoint(ckpt: Checkpoint, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "version": ckpt.version,
            "phase": ckpt.phase,
            "variant": ckpt.variant,
            "epoch": ckpt.epoch,
            "step": ckpt.step,
            "config": ckpt.config,
            "weights": ckpt.weights,
            "optimizers": ckpt.optimizers,
            "history": ckpt.history,
        },
        path,
    )
    return path


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    required = {"version", "phase", "epoch", "step", "config", "weights", "optimizers", "history"}
    if not isinstance(payload, dict) or not required.issubset(payload):
        raise CheckpointError(f"checkpoint {path} is missing required fields")
    if payload["version"] > CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has version {payload['version']}, newer than supported {CHECKPOINT_VERSION}"
        )
    return Checkpoint(
        phase=payload["phase"],
        variant=payload.get("variant", "base"),
        epoch=payload["epoch"],
        step=payload["step"],
        config=payload["config"],
        weights=payload["weights"],
        optimizers=payload["optimizers"],
        history=payload["history"],
        version=payload["version"],
    )


def _as_checkpoint(source) -> Checkpoint:
    return source if isinstance(source, Checkpoint) else load_checkpoint(source)


def _snapshot(state_dict):
    """Detached copy: torch state_dicts alias live tensors, and an optimizer
    resumed from a dict keeps mutating it, so checkpoints must own their data."""
    return copy.deepcopy({k: v.detach() if torch.is_tensor(v) else v for k, v in state_dict.items()})


def build_generator(ckpt: Checkpoint, device="cpu") -> FFA:
    """Rebuild the hazy-to-clean generator from any phase's checkpoint."""
    model = FFA(ffa_config_from(ckpt.config)).to(device)
    key = "generator_xy" if "generator_xy" in ckpt.weights else "ffa"
    if key not in ckpt.weights:
        raise CheckpointError(f"checkpoint holds no generator weights (keys: {list(ckpt.weights)})")
    try:
        model.load_state_dict(ckpt.weights[key])
    except RuntimeError as exc:
        raise CheckpointError(f"generator weights do not match config: {exc}") from exc
    model.eval()
    return model


# ---------------------------------------------------------------------------
# Deterministic batching
# ---------------------------------------------------------------------------


def _epoch_rng(seed, epoch, stream=0):
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(epoch), int(stream)]))
    )


def _epoch_batches(n, batch_size, seed, epoch, stream=0):
    perm = _epoch_rng(seed, epoch, stream).permutation(n)
    return [perm[i : i + batch_size] for i in range(0, n, batch_size)]


def _cycled_order(n, length, seed, epoch, stream):
    perm = _epoch_rng(seed, epoch, stream).permutation(n)
    return [int(perm[i % n]) for i in range(length)]


def _stack(data, idxs, device, member=None):
    if member is None:
        return torch.stack([data[int(i)] for i in idxs]).to(device)
    return torch.stack([data[int(i)][member] for i in idxs]).to(device)


def _check_finite(loss, what, epoch, step):
    if not torch.isfinite(loss):
        raise RuntimeError(
            f"non-finite {what} loss {loss.item()} at epoch {epoch}, step {step}; "
            "lower the learning rate or inspect the input data"
        )


def _image_space(x, aug):
    """Undo normalization (if the pipeline applied it) and clamp for metrics."""
    if aug is not None and aug.normalize:
        x = denormalize(x, aug.mean, aug.std)
    return x.clamp(0.0, 1.0)


def _split_metrics(model, data, prefix):
    aug = getattr(data, "aug", None)
    was_training = model.training
    model.eval()
    psnrs, ssims = [], []
    with torch.no_grad():
        for hazy, clean in data:
            pred = _image_space(model(hazy[None]), aug)
            ref = _image_space(clean[None], aug)
            psnrs.append(psnr(pred, ref))
            ssims.append(ssim(pred, ref))
    model.train(was_training)
    return {f"{prefix}_psnr": float(np.mean(psnrs)), f"{prefix}_ssim": float(np.mean(ssims))}


def write_history_csv(history, path):
    import csv

    if not history:
        return
    fields = list(history[0].keys())
    for row in history[1:]:  # later phases may add columns (e.g. the K-shot L1 term)
        fields += [k for k in row if k not in fields]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, restval="")
        writer.writeheader()
        for row in history:
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Phase 1: supervised FFA pretraining
# ---------------------------------------------------------------------------


def train_ffa(cfg: TrainConfig, train_data, val_data=None, resume_from=None) -> Checkpoint:
    """L1-supervised pretraining with Adam and gradient accumulation.

    Records train (and validation) SSIM/PSNR each epoch. Aborts on a
    non-finite loss. Returns the final checkpoint; writes periodic and final
    checkpoints plus a metric-history CSV when cfg.checkpoint_dir is set.
    """
    if len(train_data) == 0:
        raise InputError("training loader is empty")
    device = torch.device(cfg.device)
    model = FFA(cfg.ffa, seed=cfg.seed).to(device)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr, betas=tuple(cfg.adam_betas))
    criterion = nn.L1Loss()

    micro_per_epoch = math.ceil(len(train_data) / cfg.batch_size)
    updates_per_epoch = math.ceil(micro_per_epoch / cfg.grad_accum_steps)

    history = []
    global_step = 0
    start_epoch = 0
    skip_updates = 0
    if resume_from is not None:
        ck = _as_checkpoint(resume_from)
        model.load_state_dict(ck.weights["ffa"])
        # the optimizer adopts (and then mutates) the dict it loads, so feed it a copy
        opt.load_state_dict(_snapshot(ck.optimizers["ffa"]))
        history = list(ck.history)
        global_step = ck.step
        start_epoch = ck.step // updates_per_epoch
        skip_updates = ck.step % updates_per_epoch

    aug = getattr(train_data, "aug", None)
    done = cfg.epochs == 0
    epoch = start_epoch
    while not done and epoch < cfg.epochs:
        batches = _epoch_batches(len(train_data), cfg.batch_size, cfg.seed, epoch)
        if skip_updates:
            batches = batches[skip_updates * cfg.grad_accum_steps :]
            skip_updates = 0
        epoch_loss, seen, accumulated = 0.0, 0, 0
        opt.zero_grad()
        for idxs in batches:
            hazy = _stack(train_data, idxs, device, member=0)
            clean = _stack(train_data, idxs, device, member=1)
            with torch.autocast(device.type, enabled=cfg.mixed_precision):
                loss = criterion(model(hazy), clean)
            _check_finite(loss, "L1", epoch, global_step)
            (loss / cfg.grad_accum_steps).backward()
            epoch_loss += loss.item()
            seen += 1
            accumulated += 1
            if accumulated == cfg.grad_accum_steps:
                opt.step()
                opt.zero_grad()
                accumulated = 0
                global_step += 1
                if cfg.max_steps is not None and global_step >= cfg.max_steps:
                    done = True
                    break
        if accumulated and not done:
            opt.step()  # flush a leftover partial accumulation window
            opt.zero_grad()
            global_step += 1
            if cfg.max_steps is not None and global_step >= cfg.max_steps:
                done = True

        row = {"epoch": epoch + 1, "step": global_step, "l1": epoch_loss / max(seen, 1)}
        row.update(_split_metrics(model, train_data, "train"))
        if val_data is not None and len(val_data):
            row.update(_split_metrics(model, val_data, "val"))
        history.append(row)
        log.info("ffa epoch %d: %s", epoch + 1, row)

        epoch += 1
        if cfg.checkpoint_dir and cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
            ckpt = _ffa_checkpoint(epoch, global_step, cfg, model, opt, history)
            save_checkpoint(ckpt, Path(cfg.checkpoint_dir) / ckpt.filename())

    final = _ffa_checkpoint(epoch, global_step, cfg, model, opt, history)
    if cfg.checkpoint_dir:
        out = Path(cfg.checkpoint_dir)
        save_checkpoint(final, out / final.filename())
        write_history_csv(history, out / "ffa_pretrain_history.csv")
    return final


def _ffa_checkpoint(epoch, step, cfg, model, opt, history):
    return Checkpoint(
        phase="ffa_pretrain", variant="base", epoch=epoch, step=step,
        config=config_snapshot(cfg), weights={"ffa": _snapshot(model.state_dict())},
        optimizers={"ffa": _snapshot(opt.state_dict())}, history=list(history),
    )


# ---------------------------------------------------------------------------
# Phases 2 and 3: CycleGAN training and K-shot fine-tuning
# ---------------------------------------------------------------------------


def _load_gan_state(state: CycleGANState, opt_g, opt_d, ck: Checkpoint):
    for name, net in (
        ("generator_xy", state.generator_xy),
        ("generator_yx", state.generator_yx),
        ("discriminator_x", state.discriminator_x),
        ("discriminator_y", state.discriminator_y),
    ):
        net.load_state_dict(ck.weights[name])
    # optimizers adopt (and then mutate) the dicts they load, so feed them copies
    opt_g.load_state_dict(_snapshot(ck.optimizers["generators"]))
    opt_d.load_state_dict(_snapshot(ck.optimizers["discriminators"]))


def _gan_checkpoint(phase, variant, epoch, step, cfg, state, opt_g, opt_d, history):
    return Checkpoint(
        phase=phase, variant=variant, epoch=epoch, step=step, config=config_snapshot(cfg),
        weights={
            "generator_xy": _snapshot(state.generator_xy.state_dict()),
            "generator_yx": _snapshot(state.generator_yx.state_dict()),
            "discriminator_x": _snapshot(state.discriminator_x.state_dict()),
            "discriminator_y": _snapshot(state.discriminator_y.state_dict()),
        },
        optimizers={"generators": _snapshot(opt_g.state_dict()),
                    "discriminators": _snapshot(opt_d.state_dict())},
        history=list(history),
    )


def _dump_samples(state, hazy, clean, fake_clean, fake_hazy, out_dir, phase, step):
    out_dir = Path(out_dir) / "samples"
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = torch.cat([hazy[:1], fake_clean[:1], clean[:1], fake_hazy[:1]]).clamp(0, 1)
    save_image_grid(panel, out_dir / f"{phase}_{step:06d}.png", nrow=panel.size(0))


def _run_gan_phase(cfg, phase, variant, state, hazy_data, clean_data, paired=None,
                   resume_from=None):
    """Shared alternating-update loop for the cyclegan and finetune phases.

    Per iteration: generator losses (plus the K-shot supervised L1 term when
    paired data is given) -> generator Adam step -> discriminator losses on
    detached fakes -> discriminator Adam step.
    """
    if len(hazy_data) == 0 or len(clean_data) == 0:
        raise InputError("both unpaired loaders must be non-empty")
    device = torch.device(cfg.device)
    state = state.to(device)
    opt_g = torch.optim.Adam(state.generator_parameters(), lr=cfg.lr, betas=tuple(cfg.adam_betas))
    opt_d = torch.optim.Adam(state.discriminator_parameters(), lr=cfg.lr, betas=tuple(cfg.adam_betas))
    criterion = nn.L1Loss()

    iters_per_epoch = math.ceil(max(len(hazy_data), len(clean_data)) / cfg.batch_size)

    history = []
    global_step = 0
    start_epoch = 0
    skip_iters = 0
    if resume_from is not None:
        ck = _as_checkpoint(resume_from)
        _load_gan_state(state, opt_g, opt_d, ck)
        history = list(ck.history)
        global_step = ck.step
        start_epoch = ck.step // iters_per_epoch
        skip_iters = ck.step % iters_per_epoch

    done = cfg.epochs == 0
    epoch = start_epoch
    while not done and epoch < cfg.epochs:
        length = iters_per_epoch * cfg.batch_size
        order_h = _cycled_order(len(hazy_data), length, cfg.seed, epoch, stream=1)
        order_c = _cycled_order(len(clean_data), length, cfg.seed, epoch, stream=2)
        order_p = (
            _cycled_order(len(paired), iters_per_epoch, cfg.seed, epoch, stream=3)
            if paired is not None and len(paired) > 0
            else None
        )
        sums = {}
        counted = 0
        for it in range(skip_iters, iters_per_epoch):
            lo = it * cfg.batch_size
            hazy = _stack(hazy_data, order_h[lo : lo + cfg.batch_size], device)
            clean = _stack(clean_data, order_c[lo : lo + cfg.batch_size], device)

            gen = generator_step_losses(state, hazy, clean, cfg.loss)
            gen_total = gen.total
            supervised = None
            if order_p is not None:
                p_hazy, p_clean = paired[order_p[it]]
                supervised = cfg.lambda_supervised * criterion(
                    state.generator_xy(p_hazy[None].to(device)), p_clean[None].to(device)
                )
                gen_total = gen_total + supervised
            _check_finite(gen_total, "generator", epoch, global_step)
            opt_g.zero_grad()
            gen_total.backward()
            opt_g.step()

            disc = discriminator_step_losses(state, hazy, clean, gen.fake_hazy, gen.fake_clean)
            _check_finite(disc.total, "discriminator", epoch, global_step)
            opt_d.zero_grad()
            disc.total.backward()
            opt_d.step()

            global_step += 1
            counted += 1
            parts = {
                "g_total": gen_total.item(), "adv_xy": gen.adv_xy.item(),
                "adv_yx": gen.adv_yx.item(), "cyc_forward": gen.cyc_forward.item(),
                "cyc_backward": gen.cyc_backward.item(),
                "d_x": disc.loss_x.item(), "d_y": disc.loss_y.item(),
            }
            if supervised is not None:
                parts["supervised_l1"] = supervised.item()
            for key, val in parts.items():
                sums[key] = sums.get(key, 0.0) + val

            if cfg.checkpoint_dir and cfg.sample_every and global_step % cfg.sample_every == 0:
                _dump_samples(state, hazy, clean, gen.fake_clean, gen.fake_hazy,
                              cfg.checkpoint_dir, phase, global_step)
            if cfg.checkpoint_dir and cfg.checkpoint_every and global_step % cfg.checkpoint_every == 0:
                ck = _gan_checkpoint(phase, variant, epoch, global_step, cfg, state, opt_g, opt_d, history)
                save_checkpoint(ck, Path(cfg.checkpoint_dir) / f"{phase}_{variant}_step{global_step}.ckpt")
            if cfg.max_steps is not None and global_step >= cfg.max_steps:
                done = True
                break
        skip_iters = 0
        if counted:
            row = {"epoch": epoch + 1, "step": global_step}
            row.update({k: v / counted for k, v in sums.items()})
            history.append(row)
            log.info("%s epoch %d: %s", phase, epoch + 1, row)
        epoch += 1

    final = _gan_checkpoint(phase, variant, epoch, global_step, cfg, state, opt_g, opt_d, history)
    if cfg.checkpoint_dir:
        out = Path(cfg.checkpoint_dir)
        save_checkpoint(final, out / final.filename())
        write_history_csv(history, out / f"{phase}_{variant}_history.csv")
    return final


def train_cyclegan(cfg: TrainConfig, ffa_init, unpaired_hazy, unpaired_clean,
                   resume_from=None) -> Checkpoint:
    """Unpaired adversarial training; generator_xy starts from the pretrained FFA,
    generator_yx and both discriminators start fresh."""
    state = CycleGANState(cfg.ffa, cfg.disc, seed=cfg.seed)
    if ffa_init is not None:
        ck = _as_checkpoint(ffa_init)
        key = "generator_xy" if "generator_xy" in ck.weights else "ffa"
        try:
            state.generator_xy.load_state_dict(ck.weights[key])
        except RuntimeError as exc:
            raise CheckpointError(f"FFA init weights do not match config: {exc}") from exc
    return _run_gan_phase(cfg, "cyclegan", "base", state, unpaired_hazy, unpaired_clean,
                          paired=None, resume_from=resume_from)


def finetune(cfg: TrainConfig, gan_init, paired_data, unpaired_hazy, unpaired_clean,
             strict_k=True) -> Checkpoint:
    """Continue adversarial training with a supervised L1 term over K pairs.

    K = 0 degenerates to a plain continuation of unpaired training. The
    returned checkpoint is the variant named by K.
    """
    k = cfg.k_paired
    if strict_k and k not in ALLOWED_K:
        raise ConfigurationError(f"k_paired must be one of {ALLOWED_K}, got {k}")
    if k > 0 and (paired_data is None or len(paired_data) < k):
        raise InputError(f"fine-tuning requires {k} pairs, got {0 if paired_data is None else len(paired_data)}")
    state = CycleGANState(cfg.ffa, cfg.disc, seed=cfg.seed)
    paired = None
    if k > 0:
        paired = [paired_data[i] for i in range(k)]
    return _run_gan_phase(cfg, "finetune", f"k{k}", state, unpaired_hazy, unpaired_clean,
                          paired=paired, resume_from=gan_init)


# ---------------------------------------------------------------------------
# Evaluation and experiment grids
# ---------------------------------------------------------------------------


def evaluate(ckpt, eval_data, variant=None, out_dir=None, device="cpu"):
    """Run the hazy-to-clean generator over an evaluation split.

    Returns (per-image MetricReport rows, mean row or None). Items without a
    clean reference still get a restored image but no metric row. Writes
    restored PNGs, CSV/JSON reports, and a metric figure under out_dir.
    """
    ckpt = _as_checkpoint(ckpt)
    if variant is None:
        variant = ckpt.variant
    model = build_generator(ckpt, device=device)
    aug = getattr(eval_data, "aug", None)
    ids = getattr(eval_data, "ids", None) or [f"img{i:04d}" for i in range(len(eval_data))]

    rows = []
    restored_images = []
    for i, item in enumerate(eval_data):
        hazy, clean = item if isinstance(item, tuple) else (item, None)
        restored = model.restore(_image_space(hazy[None].to(device), aug))
        restored_images.append((ids[i], restored))
        if clean is not None:
            ref = _image_space(clean[None].to(device), aug)
            rows.append(MetricReport(ids[i], str(variant), psnr(restored, ref), ssim(restored, ref)))
    mean_row = mean_report(rows) if rows else None

    if out_dir is not None:
        out_dir = Path(out_dir)
        (out_dir / "restored").mkdir(parents=True, exist_ok=True)
        from .data import save_image

        for image_id, restored in restored_images:
            save_image(restored, out_dir / "restored" / f"{image_id}.png")
        table = rows + ([mean_row] if mean_row else [])
        write_report_csv(table, out_dir / "report.csv")
        write_report_json(table, out_dir / "report.json")
        if rows:
            from .reporting import save_per_image_metrics_plot

            save_per_image_metrics_plot(rows, out_dir / "report.png")
    return rows, mean_row


def run_lr_grid(base_cfg: TrainConfig, lrs, train_data, val_data=None, out_dir=None):
    """Pretrain once per learning rate and tabulate final SSIM/PSNR per run."""
    rows = []
    for lr in lrs:
        cfg = TrainConfig(**{**asdict_plain(base_cfg), "lr": lr, "checkpoint_dir": None})
        ckpt = train_ffa(cfg, train_data, val_data)
        last = ckpt.history[-1] if ckpt.history else {}
        prefix = "val" if val_data is not None and len(val_data) else "train"
        rows.append({
            "Learning Rate": lr,
            "SSIM": round(last.get(f"{prefix}_ssim", float("nan")), 4),
            "PSNR (dB)": round(last.get(f"{prefix}_psnr", float("nan")), 2),
        })
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_table_csv(rows, out_dir / "lr_grid.csv")
        from .reporting import save_lr_grid_plot

        save_lr_grid_plot(rows, out_dir / "lr_grid.png")
    return rows


def asdict_plain(cfg: TrainConfig):
    d = asdict(cfg)
    d["ffa"] = FFAConfig(**d["ffa"])
    d["disc"] = DiscriminatorConfig(**d["disc"])
    d["loss"] = LossConfig(**d["loss"])
    d["adam_betas"] = tuple(d["adam_betas"])
    return d


def _write_table_csv(rows, path):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
