"""Matplotlib figures rendered next to the delimited report files.

Every figure-writing helper takes the same rows its CSV twin consumes, so a
report directory always carries both machine-readable and visual forms.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_training_curves(history, path):
    """Loss plus any recorded PSNR/SSIM series against epoch."""
    if not history:
        return
    epochs = [row["epoch"] for row in history]
    loss_keys = [k for k in history[0] if k in ("l1", "g_total", "d_x", "d_y")]
    metric_keys = [k for k in history[0] if k.endswith("_psnr") or k.endswith("_ssim")]

    ncols = 2 if metric_keys else 1
    fig, axes = plt.subplots(1, ncols, figsize=(6 * ncols, 4))
    axes = [axes] if ncols == 1 else list(axes)
    for key in loss_keys:
        axes[0].plot(epochs, [row.get(key) for row in history], label=key)
    axes[0].set_xlabel("epoch")
    axes[0].set_ylabel("loss")
    axes[0].legend()
    axes[0].grid(True, alpha=0.3)
    if metric_keys:
        for key in metric_keys:
            axes[1].plot(epochs, [row.get(key) for row in history], label=key)
        axes[1].set_xlabel("epoch")
        axes[1].legend()
        axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_per_image_metrics_plot(rows, path):
    """PSNR and SSIM across evaluated images with their mean lines."""
    idx = range(1, len(rows) + 1)
    psnrs = [r.psnr_db for r in rows]
    ssims = [r.ssim for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 4))
    ax1.plot(idx, psnrs, marker="o")
    ax1.axhline(sum(psnrs) / len(psnrs), color="r", linestyle="--",
                label=f"mean {sum(psnrs) / len(psnrs):.2f} dB")
    ax1.set_xlabel("image")
    ax1.set_ylabel("PSNR (dB)")
    ax1.legend()
    ax1.grid(True, alpha=0.3)
    ax2.plot(idx, ssims, marker="o", color="tab:green")
    ax2.axhline(sum(ssims) / len(ssims), color="r", linestyle="--",
                label=f"mean {sum(ssims) / len(ssims):.4f}")
    ax2.set_xlabel("image")
    ax2.set_ylabel("SSIM")
    ax2.legend()
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_finetune_grid_plot(rows, path):
    """SSIM and PSNR against the number of fine-tuning pairs (twin axes)."""
    ks = [row["Number of Images"] for row in rows]
    ssims = [row["SSIM"] for row in rows]
    psnrs = [row["PSNR (dB)"] for row in rows]
    fig, ax1 = plt.subplots(figsize=(6, 4))
    ax1.plot(ks, ssims, marker="o", color="tab:blue", label="SSIM")
    ax1.set_xlabel("number of paired fine-tuning images")
    ax1.set_ylabel("SSIM", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(ks, psnrs, marker="s", color="tab:red", label="PSNR (dB)")
    ax2.set_ylabel("PSNR (dB)", color="tab:red")
    ax1.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_lr_grid_plot(rows, path):
    """SSIM and PSNR against learning rate on a log axis."""
    lrs = [row["Learning Rate"] for row in rows]
    ssims = [row["SSIM"] for row in rows]
    psnrs = [row["PSNR (dB)"] for row in rows]
    fig, ax1 = plt.subplots(figsize=(6, 4))
    ax1.semilogx(lrs, ssims, marker="o", color="tab:blue")
    ax1.set_xlabel("learning rate")
    ax1.set_ylabel("SSIM", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.semilogx(lrs, psnrs, marker="s", color="tab:red")
    ax2.set_ylabel("PSNR (dB)", color="tab:red")
    ax1.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
