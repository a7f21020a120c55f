"""Reference PSNR and SSIM plus the report rows written by evaluation.

Both metrics run in float64 regardless of the model's precision. SSIM uses
the standard 11x11 Gaussian window (sigma 1.5, K1 0.01, K2 0.03) over valid
window positions, averaged over channels then space.
"""

import csv
import json
import math
from dataclasses import dataclass, asdict

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InputError

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _as_batched(x, name):
    """Coerce (h,w), (c,h,w) or (b,c,h,w) array-likes to float64 (b,c,h,w)."""
    if hasattr(x, "detach"):
        x = x.detach().cpu().numpy()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[None, None]
    elif x.ndim == 3:
        x = x[None]
    if x.ndim != 4:
        raise InputError(f"{name} must have 2 to 4 dims, got shape {x.shape}")
    return x


def _check_pair(pred, ref):
    pred = _as_batched(pred, "pred")
    ref = _as_batched(ref, "ref")
    if pred.shape != ref.shape:
        raise InputError(f"shape mismatch: pred {pred.shape} vs ref {ref.shape}")
    return pred, ref


def psnr(pred, ref, data_range=1.0):
    """Peak signal-to-noise ratio in dB, capped at 100.0 (identical images)."""
    if data_range <= 0:
        raise InputError(f"data_range must be positive, got {data_range}")
    pred, ref = _check_pair(pred, ref)
    mse = np.mean((pred - ref) ** 2)
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(data_range ** 2 / mse))


def _gaussian_kernel(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    coords = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _windowed_mean(x, kernel):
    # separable Gaussian filter over the last two axes, valid positions only
    y = sliding_window_view(x, len(kernel), axis=-1) @ kernel
    return sliding_window_view(y, len(kernel), axis=-2) @ kernel


def ssim(pred, ref, data_range=1.0):
    """Mean local structural similarity over an 11x11 Gaussian window."""
    if data_range <= 0:
        raise InputError(f"data_range must be positive, got {data_range}")
    pred, ref = _check_pair(pred, ref)
    if pred.shape[-2] < SSIM_WINDOW or pred.shape[-1] < SSIM_WINDOW:
        raise InputError(
            f"image {pred.shape[-2]}x{pred.shape[-1]} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    kernel = _gaussian_kernel()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    mu1 = _windowed_mean(pred, kernel)
    mu2 = _windowed_mean(ref, kernel)
    sigma1_sq = _windowed_mean(pred * pred, kernel) - mu1 * mu1
    sigma2_sq = _windowed_mean(ref * ref, kernel) - mu2 * mu2
    sigma12 = _windowed_mean(pred * ref, kernel) - mu1 * mu2

    ssim_map = ((2 * mu1 * mu2 + c1) * (2 * sigma12 + c2)) / (
        (mu1 * mu1 + mu2 * mu2 + c1) * (sigma1_sq + sigma2_sq + c2)
    )
    return float(ssim_map.mean())


@dataclass
class MetricReport:
    image_id: str
    variant: str
    psnr_db: float
    ssim: float


REPORT_FIELDS = ["image_id", "variant", "psnr_db", "ssim"]


def mean_report(rows, variant=None, image_id="mean"):
    """Aggregate row: arithmetic mean of per-image PSNR/SSIM."""
    if not rows:
        raise InputError("cannot aggregate an empty report")
    if variant is None:
        variant = rows[0].variant
    return MetricReport(
        image_id=image_id,
        variant=variant,
        psnr_db=float(np.mean([r.psnr_db for r in rows])),
        ssim=float(np.mean([r.ssim for r in rows])),
    )


def write_report_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(asdict(row))


def write_report_json(rows, path):
    with open(path, "w") as fh:
        json.dump([asdict(r) for r in rows], fh, indent=2)


def read_report_csv(path):
    with open(path, newline="") as fh:
        return [
            MetricReport(r["image_id"], r["variant"], float(r["psnr_db"]), float(r["ssim"]))
            for r in csv.DictReader(fh)
        ]
