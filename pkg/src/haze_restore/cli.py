"""Command-line front door for the full pipeline.

Subcommands: synthesize, pretrain, train-gan, finetune, grid, evaluate,
restore. Flag precedence is CLI flag > config file > profile default >
builtin default; the config file is a flat `key = value` text format.
"""

import json
import os
import sys
from pathlib import Path

import click

from .data import (
    DEGRADATION_KINDS,
    PAIRED_CLEAN,
    PAIRED_HAZY,
    UNPAIRED_CLEAN,
    UNPAIRED_HAZY,
    AugmentationConfig,
    PairedDatasetSpec,
    UnpairedDatasetSpec,
    list_images,
    load_image,
    load_paired,
    load_unpaired,
    make_synthetic_dataset,
    save_image,
    synthesize_degradation,
)
from .errors import CheckpointError, ConfigurationError
from .ffa import FFAConfig
from .cyclegan import DiscriminatorConfig
from .metrics import psnr, ssim
from .training import (
    ALLOWED_K,
    REPORTED_VARIANT_METRICS,
    TrainConfig,
    build_generator,
    evaluate,
    finetune,
    load_checkpoint,
    run_lr_grid,
    train_cyclegan,
    train_ffa,
    _write_table_csv,
)

GRID_HEADERS = ["Number of Images", "SSIM", "PSNR (dB)"]

# named bundles of defaults; any flag or config-file key overrides them
PROFILES = {
    "full": dict(groups=3, blocks=6, features=64, ca_reduction=8, disc_base=64, disc_layers=4,
                 size=256, epochs=50, gan_epochs=50, finetune_epochs=5, max_steps=None),
    "smoke": dict(groups=1, blocks=1, features=16, ca_reduction=4, disc_base=8, disc_layers=3,
                  size=64, epochs=10, gan_epochs=2, finetune_epochs=1, max_steps=60),
}


def read_config_file(path):
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


class Resolver:
    """CLI flag > config file > profile default > builtin default."""

    def __init__(self, config_path=None, profile=None):
        self.file_values = read_config_file(config_path) if config_path else {}
        self.profile_values = PROFILES[profile] if profile else {}

    def get(self, key, cli_value, default=None, cast=str):
        if cli_value is not None:
            return cli_value
        if key in self.file_values:
            raw = self.file_values[key]
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        if key in self.profile_values:
            return self.profile_values[key]
        return default


def default_checkpoint_dir():
    return Path(os.environ.get("HAZE_RESTORE_HOME", "checkpoints"))


def _ffa_config(res, groups, blocks, features, ca_reduction):
    return FFAConfig(
        num_groups=res.get("groups", groups, 3, int),
        blocks_per_group=res.get("blocks", blocks, 6, int),
        feature_dim=res.get("features", features, 64, int),
        ca_reduction=res.get("ca_reduction", ca_reduction, 8, int),
    )


def _disc_config(res):
    return DiscriminatorConfig(
        base_channels=res.get("disc_base", None, 64, int),
        num_layers=res.get("disc_layers", None, 4, int),
    )


_shared = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                 help="Flat key = value config file; CLI flags take precedence."),
    click.option("--profile", type=click.Choice(sorted(PROFILES)), default=None,
                 help="Named bundle of size/duration defaults (smoke = desk-scale)."),
    click.option("--seed", type=int, default=None, help="Deterministic seed (default 0)."),
    click.option("--device", default=None, help="Compute device (default cpu)."),
]

_net_flags = [
    click.option("--groups", type=int, default=None, help="Residual groups in the FFA body."),
    click.option("--blocks", type=int, default=None, help="Residual blocks per group."),
    click.option("--features", type=int, default=None, help="Feature channel width."),
    click.option("--ca-reduction", type=int, default=None, help="Attention bottleneck reduction."),
]


def _apply(decorators):
    def wrap(fn):
        for dec in reversed(decorators):
            fn = dec(fn)
        return fn
    return wrap


@click.group()
@click.version_option(package_name="haze-restore")
def main():
    """FFA + CycleGAN restoration: train, fine-tune, evaluate, and restore images."""


# ---------------------------------------------------------------------------
# synthesize
# ---------------------------------------------------------------------------


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Dataset root to create.")
@click.option("--source", type=click.Path(exists=True), default=None,
              help="Directory of clean images to degrade (default: generate synthetic ones).")
@click.option("--count", type=int, default=12, help="Clean images to generate per split.")
@click.option("--pairs", type=int, default=8, help="Paired images to emit.")
@click.option("--size", type=int, default=64, help="Square image size when generating.")
@click.option("--kind", type=click.Choice(DEGRADATION_KINDS), default="haze")
@click.option("--severity", type=float, default=0.5)
@click.option("--seed", type=int, default=0)
def synthesize(out_dir, source, count, pairs, size, kind, severity, seed):
    """Create the dataset_root layout with synthetic weather degradation."""
    out_dir = Path(out_dir)
    if source is None:
        make_synthetic_dataset(out_dir, n_paired=pairs, n_unpaired=count, size=(size, size),
                               kind=kind, severity=severity, seed=seed)
    else:
        files = list_images(source)
        if not files:
            raise click.ClickException(f"no images in {source}")
        for sub in (PAIRED_HAZY, PAIRED_CLEAN, UNPAIRED_HAZY, UNPAIRED_CLEAN):
            (out_dir / sub).mkdir(parents=True, exist_ok=True)
        for i, path in enumerate(files):
            clean = load_image(path)
            hazy = synthesize_degradation(clean, kind, severity, seed=seed + i)
            if i < pairs:
                save_image(clean, out_dir / PAIRED_CLEAN / f"{path.stem}.png")
                save_image(hazy, out_dir / PAIRED_HAZY / f"{path.stem}.png")
            elif i % 2 == 0:
                save_image(hazy, out_dir / UNPAIRED_HAZY / f"{path.stem}.png")
            else:
                save_image(clean, out_dir / UNPAIRED_CLEAN / f"{path.stem}.png")
    click.echo(f"dataset written to {out_dir}")


# ---------------------------------------------------------------------------
# pretrain
# ---------------------------------------------------------------------------


@main.command()
@click.option("--data-root", required=True, type=click.Path(exists=True))
@click.option("--lr", type=float, default=None, help="Learning rate (default 0.001).")
@click.option("--lr-grid", default=None, help="Comma-separated learning rates; emits a table instead.")
@click.option("--epochs", type=int, default=None)
@click.option("--max-steps", type=int, default=None, help="Stop after this many optimizer steps.")
@click.option("--batch-size", type=int, default=None)
@click.option("--grad-accum", type=int, default=None, help="Gradient accumulation steps.")
@click.option("--val-count", type=int, default=0, help="Trailing pairs held out for validation.")
@click.option("--normalize/--no-normalize", default=True,
              help="Mean/std normalization (supervised phase default: on).")
@click.option("--size", type=int, default=None, help="Training resolution.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Checkpoint directory (default $HAZE_RESTORE_HOME or ./checkpoints).")
@click.option("--resume", type=click.Path(exists=True), default=None)
@_apply(_net_flags)
@_apply(_shared)
def pretrain(data_root, lr, lr_grid, epochs, max_steps, batch_size, grad_accum, val_count,
             normalize, size, out_dir, resume, groups, blocks, features, ca_reduction,
             config_path, profile, seed, device):
    """Phase 1: supervised FFA pretraining with L1 loss on paired data."""
    res = Resolver(config_path, profile)
    seed = res.get("seed", seed, 0, int)
    size = res.get("size", size, 256, int)
    out_dir = Path(res.get("out", out_dir, default_checkpoint_dir()))
    cfg = TrainConfig.for_phase(
        "ffa_pretrain",
        lr=res.get("lr", lr, 0.001, float),
        epochs=res.get("epochs", epochs, 50, int),
        max_steps=res.get("max_steps", max_steps, None, int),
        batch_size=res.get("batch_size", batch_size, 1, int),
        grad_accum_steps=res.get("grad_accum", grad_accum, 1, int),
        seed=seed,
        device=res.get("device", device, "cpu"),
        checkpoint_dir=str(out_dir),
        ffa=_ffa_config(res, groups, blocks, features, ca_reduction),
    )
    aug = AugmentationConfig(resize=(size, size), normalize=normalize)
    root = Path(data_root)
    pairs = load_paired(PairedDatasetSpec(root / PAIRED_HAZY, root / PAIRED_CLEAN), aug, seed)
    val = None
    if val_count > 0 and len(pairs) > val_count:
        val = type(pairs)(items=pairs.items[-val_count:], ids=pairs.ids[-val_count:], aug=aug)
        pairs = type(pairs)(items=pairs.items[:-val_count], ids=pairs.ids[:-val_count], aug=aug)

    if lr_grid:
        lrs = [float(v) for v in lr_grid.split(",")]
        rows = run_lr_grid(cfg, lrs, pairs, val, out_dir=out_dir)
        _echo_table(GRID_HEADERS[1:], rows, first_col="Learning Rate")
        click.echo(f"lr grid written to {out_dir / 'lr_grid.csv'}")
        return

    ckpt = train_ffa(cfg, pairs, val, resume_from=resume)
    if ckpt.history:
        from .reporting import save_training_curves

        save_training_curves(ckpt.history, out_dir / "ffa_pretrain_history.png")
    click.echo(f"checkpoint written to {out_dir / ckpt.filename()}")


def _echo_table(metric_cols, rows, first_col):
    cols = [first_col] + metric_cols
    click.echo(" | ".join(cols))
    for row in rows:
        click.echo(" | ".join(str(row[c]) for c in cols))


# ---------------------------------------------------------------------------
# train-gan
# ---------------------------------------------------------------------------


@main.command("train-gan")
@click.option("--data-root", required=True, type=click.Path(exists=True))
@click.option("--init", "init_ckpt", type=click.Path(exists=True), default=None,
              help="Pretrained FFA checkpoint for generator_xy.")
@click.option("--lr", type=float, default=None, help="Learning rate (default 0.0002).")
@click.option("--epochs", type=int, default=None)
@click.option("--max-steps", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--sample-every", type=int, default=None, help="Iterations between sample dumps.")
@click.option("--checkpoint-every", type=int, default=None, help="Iterations between checkpoints.")
@click.option("--size", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--resume", type=click.Path(exists=True), default=None)
@_apply(_net_flags)
@_apply(_shared)
def train_gan(data_root, init_ckpt, lr, epochs, max_steps, batch_size, sample_every,
              checkpoint_every, size, out_dir, resume, groups, blocks, features, ca_reduction,
              config_path, profile, seed, device):
    """Phase 2: unpaired CycleGAN training with the pretrained FFA as generator."""
    res = Resolver(config_path, profile)
    seed = res.get("seed", seed, 0, int)
    size = res.get("size", size, 256, int)
    out_dir = Path(res.get("out", out_dir, default_checkpoint_dir()))
    cfg = TrainConfig.for_phase(
        "cyclegan",
        lr=res.get("lr", lr, 0.0002, float),
        epochs=res.get("gan_epochs", epochs, 50, int),
        max_steps=res.get("max_steps", max_steps, None, int),
        batch_size=res.get("batch_size", batch_size, 1, int),
        seed=seed,
        device=res.get("device", device, "cpu"),
        checkpoint_dir=str(out_dir),
        sample_every=res.get("sample_every", sample_every, 0, int),
        checkpoint_every=res.get("checkpoint_every", checkpoint_every, 0, int),
        ffa=_ffa_config(res, groups, blocks, features, ca_reduction),
        disc=_disc_config(res),
    )
    aug = AugmentationConfig.gan((size, size))
    root = Path(data_root)
    hazy = load_unpaired(UnpairedDatasetSpec(root / UNPAIRED_HAZY), aug, seed)
    clean = load_unpaired(UnpairedDatasetSpec(root / UNPAIRED_CLEAN), aug, seed + 1)
    ckpt = train_cyclegan(cfg, init_ckpt, hazy, clean, resume_from=resume)
    if ckpt.history:
        from .reporting import save_training_curves

        save_training_curves(ckpt.history, out_dir / "cyclegan_history.png")
    click.echo(f"checkpoint written to {out_dir / ckpt.filename()}")


# ---------------------------------------------------------------------------
# finetune
# ---------------------------------------------------------------------------


@main.command("finetune")
@click.option("--data-root", required=True, type=click.Path(exists=True))
@click.option("--init", "init_ckpt", required=True, type=click.Path(exists=True),
              help="CycleGAN checkpoint to continue from.")
@click.option("--k-paired", type=int, required=True, help=f"Paired images to use {ALLOWED_K}.")
@click.option("--lr", type=float, default=None)
@click.option("--epochs", type=int, default=None, help="Total epochs including the GAN phase's.")
@click.option("--extra-epochs", type=int, default=None, help="Epochs beyond the init checkpoint.")
@click.option("--max-steps", type=int, default=None)
@click.option("--size", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@_apply(_net_flags)
@_apply(_shared)
def finetune_cmd(data_root, init_ckpt, k_paired, lr, epochs, extra_epochs, max_steps, size,
                 out_dir, groups, blocks, features, ca_reduction, config_path, profile, seed,
                 device):
    """Phase 3: K-shot paired fine-tuning, emitting the variant checkpoint for K."""
    res = Resolver(config_path, profile)
    seed = res.get("seed", seed, 0, int)
    size = res.get("size", size, 256, int)
    out_dir = Path(res.get("out", out_dir, default_checkpoint_dir()))
    if k_paired not in ALLOWED_K:
        click.echo(f"warning: k={k_paired} is outside the standard set {ALLOWED_K}", err=True)
    init = load_checkpoint(init_ckpt)
    total_epochs = epochs
    if total_epochs is None:
        total_epochs = init.epoch + res.get("finetune_epochs", extra_epochs, 5, int)
    cfg = TrainConfig.for_phase(
        "finetune",
        lr=res.get("lr", lr, 0.0002, float),
        epochs=total_epochs,
        max_steps=res.get("max_steps", max_steps, None, int),
        k_paired=k_paired,
        seed=seed,
        device=res.get("device", device, "cpu"),
        checkpoint_dir=str(out_dir),
        ffa=_ffa_config(res, groups, blocks, features, ca_reduction),
        disc=_disc_config(res),
    )
    root = Path(data_root)
    aug = AugmentationConfig.gan((size, size))
    hazy = load_unpaired(UnpairedDatasetSpec(root / UNPAIRED_HAZY), aug, seed)
    clean = load_unpaired(UnpairedDatasetSpec(root / UNPAIRED_CLEAN), aug, seed + 1)
    paired = load_paired(
        PairedDatasetSpec(root / PAIRED_HAZY, root / PAIRED_CLEAN, limit=k_paired), aug, seed
    )
    if k_paired > 0 and len(paired) < k_paired:
        click.echo(f"warning: only {len(paired)} pairs available for k={k_paired}", err=True)
    ckpt = finetune(cfg, init, paired, hazy, clean, strict_k=False)
    click.echo(f"checkpoint written to {out_dir / ckpt.filename()}")


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------


def run_grid(data_root, out_dir, seed=0, profile="smoke", init_ckpt=None, device="cpu",
             config_path=None):
    """Fine-tune and evaluate every K variant; returns (table rows, failures)."""
    res = Resolver(config_path, profile)
    size = res.get("size", None, 64, int)
    root = Path(data_root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ffa_cfg = _ffa_config(res, None, None, None, None)
    disc_cfg = _disc_config(res)
    aug = AugmentationConfig.gan((size, size))

    hazy = load_unpaired(UnpairedDatasetSpec(root / UNPAIRED_HAZY), aug, seed)
    clean = load_unpaired(UnpairedDatasetSpec(root / UNPAIRED_CLEAN), aug, seed + 1)
    eval_pairs = load_paired(PairedDatasetSpec(root / PAIRED_HAZY, root / PAIRED_CLEAN), aug, seed)

    if init_ckpt is None:
        sup_aug = AugmentationConfig(resize=(size, size), normalize=True)
        sup_pairs = load_paired(PairedDatasetSpec(root / PAIRED_HAZY, root / PAIRED_CLEAN), sup_aug, seed)
        ffa_ck = train_ffa(
            TrainConfig.for_phase("ffa_pretrain", epochs=res.get("epochs", None, 10, int),
                                  max_steps=res.get("max_steps", None, None, int), seed=seed,
                                  device=device, ffa=ffa_cfg),
            sup_pairs,
        )
        gan_ck = train_cyclegan(
            TrainConfig.for_phase("cyclegan", epochs=res.get("gan_epochs", None, 2, int),
                                  seed=seed, device=device, ffa=ffa_cfg, disc=disc_cfg,
                                  checkpoint_dir=str(out_dir)),
            ffa_ck, hazy, clean,
        )
    else:
        gan_ck = load_checkpoint(init_ckpt)

    extra = res.get("finetune_epochs", None, 1, int)
    rows, failures = [], []
    for k in sorted(ALLOWED_K, reverse=True):
        try:
            paired = load_paired(
                PairedDatasetSpec(root / PAIRED_HAZY, root / PAIRED_CLEAN, limit=k), aug, seed
            )
            k_effective = min(k, len(paired))
            if k_effective < k:
                click.echo(f"warning: k={k} capped to {k_effective} available pairs", err=True)
            cfg = TrainConfig.for_phase(
                "finetune", epochs=gan_ck.epoch + extra, k_paired=k_effective, seed=seed,
                device=device, checkpoint_dir=str(out_dir), ffa=ffa_cfg, disc=disc_cfg,
            )
            ck = finetune(cfg, gan_ck, paired, hazy, clean, strict_k=False)
            if ck.variant != f"k{k}":  # keep the requested K in the artifact name
                ck.variant = f"k{k}"
                from .training import save_checkpoint

                save_checkpoint(ck, out_dir / ck.filename())
            _, mean_row = evaluate(ck, eval_pairs, variant=f"k{k}", out_dir=out_dir / f"eval_k{k}",
                                   device=device)
            rows.append({
                "Number of Images": k,
                "SSIM": round(mean_row.ssim, 4),
                "PSNR (dB)": round(mean_row.psnr_db, 2),
            })
        except Exception as exc:  # noqa: BLE001 - partial failure continues the grid
            failures.append((k, f"{type(exc).__name__}: {exc}"))

    if rows:
        _write_table_csv(rows, out_dir / "grid.csv")
        from .reporting import save_finetune_grid_plot

        save_finetune_grid_plot(rows, out_dir / "grid.png")
    manifest = {str(k): dict(v) for k, v in REPORTED_VARIANT_METRICS.items()}
    manifest["source"] = "paper-reported"
    (out_dir / "variants_manifest.json").write_text(json.dumps(manifest, indent=2))
    return rows, failures


@main.command("grid")
@click.option("--data-root", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--init", "init_ckpt", type=click.Path(exists=True), default=None,
              help="Existing CycleGAN checkpoint (default: train one at the chosen profile).")
@_apply(_shared)
def grid(data_root, out_dir, init_ckpt, config_path, profile, seed, device):
    """Run the K in {25,20,10,5,0} fine-tuning grid and tabulate SSIM/PSNR."""
    res = Resolver(config_path, None)
    rows, failures = run_grid(
        data_root, out_dir,
        seed=res.get("seed", seed, 0, int),
        profile=profile or "smoke",
        init_ckpt=init_ckpt,
        device=res.get("device", device, "cpu"),
        config_path=config_path,
    )
    click.echo(" | ".join(GRID_HEADERS))
    for row in rows:
        click.echo(" | ".join(str(row[h]) for h in GRID_HEADERS))
    for k, message in failures:
        click.echo(f"FAILED k={k}: {message}", err=True)
    if failures:
        sys.exit(1)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


@main.command("evaluate")
@click.option("--data-root", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--variant", default=None, help="Variant label for the report rows.")
@click.option("--limit", type=int, default=None)
@click.option("--size", type=int, default=None)
@_apply(_shared)
def evaluate_cmd(data_root, ckpt_path, out_dir, variant, limit, size, config_path, profile,
                 seed, device):
    """Restore the paired evaluation split and write CSV/JSON/PNG reports."""
    res = Resolver(config_path, profile)
    seed = res.get("seed", seed, 0, int)
    size = res.get("size", size, 256, int)
    root = Path(data_root)
    aug = AugmentationConfig.gan((size, size))
    pairs = load_paired(
        PairedDatasetSpec(root / PAIRED_HAZY, root / PAIRED_CLEAN, limit=limit), aug, seed
    )
    try:
        ckpt = load_checkpoint(ckpt_path)
    except CheckpointError as exc:
        raise click.ClickException(str(exc))
    rows, mean_row = evaluate(ckpt, pairs, variant=variant, out_dir=out_dir,
                              device=res.get("device", device, "cpu"))
    for row in rows:
        click.echo(f"{row.image_id}: PSNR {row.psnr_db:.2f} dB, SSIM {row.ssim:.4f}")
    if mean_row:
        click.echo(f"mean: PSNR {mean_row.psnr_db:.2f} dB, SSIM {mean_row.ssim:.4f}")


# ---------------------------------------------------------------------------
# restore
# ---------------------------------------------------------------------------


@main.command("restore")
@click.argument("input_path", type=click.Path())
@click.option("--checkpoint", "ckpt_path", default=None, type=click.Path(),
              help="Checkpoint file (default: newest in $HAZE_RESTORE_HOME).")
@click.option("--out", "output_path", required=True, type=click.Path())
@click.option("--reference", type=click.Path(), default=None,
              help="Clean reference; prints SSIM/PSNR when given.")
@click.option("--device", default="cpu")
def restore(input_path, ckpt_path, output_path, reference, device):
    """Restore one degraded image through a checkpointed generator.

    Exit codes: 0 success, 2 unreadable input, 3 checkpoint/config mismatch.
    """
    try:
        image = load_image(input_path)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"error: cannot read input image {input_path}: {exc}", err=True)
        sys.exit(2)

    if ckpt_path is None:
        candidates = sorted(default_checkpoint_dir().glob("*.ckpt"))
        if not candidates:
            click.echo(f"error: no checkpoint given and none found in {default_checkpoint_dir()}", err=True)
            sys.exit(3)
        ckpt_path = candidates[-1]
    try:
        generator = build_generator(load_checkpoint(ckpt_path), device=device)
    except CheckpointError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)

    restored = generator.restore(image[None].to(device))
    Path(output_path).parent.mkdir(parents=True, exist_ok=True)
    save_image(restored, output_path)
    click.echo(f"restored image written to {output_path}")

    if reference is not None:
        try:
            ref = load_image(reference)
        except Exception as exc:  # noqa: BLE001
            click.echo(f"error: cannot read reference image {reference}: {exc}", err=True)
            sys.exit(2)
        if ref.shape != image.shape:
            click.echo("error: reference dimensions do not match input", err=True)
            sys.exit(2)
        click.echo(f"PSNR: {psnr(restored, ref[None]):.2f} dB")
        click.echo(f"SSIM: {ssim(restored, ref[None]):.4f}")


if __name__ == "__main__":
    main()
