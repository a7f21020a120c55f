"""Dataset loading, augmentation, and synthetic weather degradation.

Directory layout contract:

    dataset_root/
        paired/hazy/       degraded images, paired by filename stem
        paired/clean/      their clean counterparts
        unpaired_hazy/     degraded images without references
        unpaired_clean/    clean images without degraded counterparts

All loaders are deterministic given a seed: per-item randomness is derived
from (seed, item index) so two runs, or a resumed run, see identical tensors.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torchvision.transforms.functional as TF
from PIL import Image

from .errors import ConfigurationError, InputError

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg"}

PAIRED_HAZY = "paired/hazy"
PAIRED_CLEAN = "paired/clean"
UNPAIRED_HAZY = "unpaired_hazy"
UNPAIRED_CLEAN = "unpaired_clean"


@dataclass(frozen=True)
class AugmentationConfig:
    resize: tuple = (256, 256)
    random_crop: tuple | None = None
    hflip_prob: float = 0.5
    rotation_degrees: float = 10.0
    normalize: bool = False
    mean: tuple = (0.64, 0.60, 0.58)
    std: tuple = (0.14, 0.15, 0.152)

    def __post_init__(self):
        if any(s <= 0 for s in self.std):
            raise ConfigurationError(f"std components must be positive, got {self.std}")
        if not 0.0 <= self.hflip_prob <= 1.0:
            raise ConfigurationError(f"hflip_prob must lie in [0,1], got {self.hflip_prob}")

    @classmethod
    def supervised(cls, size=(256, 256)):
        """Flips/rotations plus mean/std normalization, used for FFA pretraining."""
        return cls(resize=size, normalize=True)

    @classmethod
    def gan(cls, size=(256, 256)):
        """Resize-only geometry on [0,1] tensors, used for the CycleGAN phases."""
        return cls(resize=size, hflip_prob=0.0, rotation_degrees=0.0, normalize=False)


@dataclass(frozen=True)
class PairedDatasetSpec:
    hazy_dir: Path
    clean_dir: Path
    limit: int | None = None


@dataclass(frozen=True)
class UnpairedDatasetSpec:
    image_dir: Path
    sample_count: int | None = None


@dataclass
class PairedImages:
    """Loaded (hazy, clean) pairs; each tensor is (3,h,w) in [0,1] or normalized."""

    items: list = field(default_factory=list)
    ids: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    aug: AugmentationConfig | None = None

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)


@dataclass
class UnpairedImages:
    items: list = field(default_factory=list)
    ids: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    aug: AugmentationConfig | None = None

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __iter__(self):
        return iter(self.items)


def _item_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, index])))


def list_images(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_EXTENSIONS)


def load_image(path):
    """Decode an 8-bit PNG/JPEG to a (3,h,w) float tensor in [0,1]."""
    with Image.open(path) as img:
        img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.float32) / 255.0
    return torch.from_numpy(arr.transpose(2, 0, 1)).contiguous()


def save_image(tensor, path):
    """Write a (3,h,w) or (1,3,h,w) tensor in [0,1] as an 8-bit PNG."""
    t = tensor.detach().cpu()
    if t.dim() == 4:
        t = t[0]
    arr = (t.clamp(0, 1).numpy().transpose(1, 2, 0) * 255.0).round().astype(np.uint8)
    Image.fromarray(arr).save(path)


def normalize(x, mean=(0.64, 0.60, 0.58), std=(0.14, 0.15, 0.152)):
    mean = torch.as_tensor(mean, dtype=x.dtype).view(-1, 1, 1)
    std = torch.as_tensor(std, dtype=x.dtype).view(-1, 1, 1)
    return (x - mean) / std


def denormalize(x, mean=(0.64, 0.60, 0.58), std=(0.14, 0.15, 0.152)):
    mean = torch.as_tensor(mean, dtype=x.dtype).view(-1, 1, 1)
    std = torch.as_tensor(std, dtype=x.dtype).view(-1, 1, 1)
    return x * std + mean


def _geometry_params(aug, source_size, rng):
    """Draw the random geometric parameters once; both pair members reuse them."""
    h, w = source_size
    params = {"crop": None, "hflip": False, "angle": 0.0}
    if aug.random_crop is not None:
        ch, cw = aug.random_crop
        if h > ch and w > cw:
            top = int(rng.integers(0, h - ch + 1))
            left = int(rng.integers(0, w - cw + 1))
            params["crop"] = (top, left, ch, cw)
    if aug.hflip_prob > 0:
        params["hflip"] = bool(rng.random() < aug.hflip_prob)
    if aug.rotation_degrees > 0:
        params["angle"] = float(rng.uniform(-aug.rotation_degrees, aug.rotation_degrees))
    return params


def _apply_geometry(img, aug, params):
    if params["crop"] is not None:
        img = TF.crop(img, *params["crop"])
    if tuple(img.shape[-2:]) != tuple(aug.resize):
        img = TF.resize(img, list(aug.resize), antialias=True)
    if params["hflip"]:
        img = TF.hflip(img)
    if params["angle"] != 0.0:
        img = TF.rotate(img, params["angle"], fill=[0.0])
    return img


def augment(img, aug, rng, params=None):
    """Apply geometry (optionally with pre-drawn params) and normalization."""
    if params is None:
        params = _geometry_params(aug, img.shape[-2:], rng)
    img = _apply_geometry(img, aug, params)
    if aug.normalize:
        img = normalize(img, aug.mean, aug.std)
    return img


def load_paired(spec: PairedDatasetSpec, aug: AugmentationConfig, seed: int) -> PairedImages:
    """Load (hazy, clean) pairs matched by filename stem, in sorted-filename order.

    The same geometric parameters are applied to both members of a pair.
    A selected hazy file without a clean counterpart is an error; an
    unreadable file is skipped with a warning and recorded.
    """
    if spec.limit == 0:
        return PairedImages(aug=aug)
    hazy_files = list_images(spec.hazy_dir)
    if not hazy_files:
        raise InputError(f"no images found in {spec.hazy_dir}")
    clean_by_stem = {p.stem: p for p in list_images(spec.clean_dir)}
    if spec.limit is not None:
        hazy_files = hazy_files[: min(spec.limit, len(hazy_files))]

    out = PairedImages(aug=aug)
    for index, hazy_path in enumerate(hazy_files):
        clean_path = clean_by_stem.get(hazy_path.stem)
        if clean_path is None:
            raise InputError(
                f"hazy image {hazy_path.name} has no clean counterpart in {spec.clean_dir}"
            )
        try:
            hazy = load_image(hazy_path)
            clean = load_image(clean_path)
        except Exception as exc:  # noqa: BLE001 - decoding failures vary by format
            log.warning("skipping unreadable pair %s: %s", hazy_path.name, exc)
            out.skipped.append(hazy_path.name)
            continue
        rng = _item_rng(seed, index)
        params = _geometry_params(aug, hazy.shape[-2:], rng)
        out.items.append((augment(hazy, aug, rng, params), augment(clean, aug, rng, params)))
        out.ids.append(hazy_path.stem)
    return out


def load_unpaired(spec: UnpairedDatasetSpec, aug: AugmentationConfig, seed: int) -> UnpairedImages:
    """Load a seeded without-replacement sample of images from one directory."""
    files = list_images(spec.image_dir)
    if not files:
        raise InputError(f"no images found in {spec.image_dir}")
    if spec.sample_count is not None:
        if spec.sample_count > len(files):
            log.warning(
                "requested %d images but only %d available in %s; using all",
                spec.sample_count, len(files), spec.image_dir,
            )
        else:
            rng = _item_rng(seed, len(files) + 1)
            picked = rng.choice(len(files), size=spec.sample_count, replace=False)
            files = [files[i] for i in sorted(picked)]

    out = UnpairedImages(aug=aug)
    for index, path in enumerate(files):
        try:
            img = load_image(path)
        except Exception as exc:  # noqa: BLE001
            log.warning("skipping unreadable image %s: %s", path.name, exc)
            out.skipped.append(path.name)
            continue
        out.items.append(augment(img, aug, _item_rng(seed, index)))
        out.ids.append(path.stem)
    return out


# ---------------------------------------------------------------------------
# Synthetic degradation: desk-scale stand-in for the restricted haze datasets
# ---------------------------------------------------------------------------

HAZE_AIRLIGHT = 0.9
HAZE_MAX_ATTENUATION = 0.8
DEGRADATION_KINDS = ("haze", "rain", "snow")


def synthesize_degradation(clean, kind, severity, seed=0):
    """Degrade a clean [0,1] image tensor; output is clipped to [0,1].

    haze: uniform scattering, clean*t + A*(1-t) with t = 1 - 0.8*severity, A = 0.9
    rain: additive seeded diagonal streaks
    snow: additive seeded soft blobs
    """
    if kind not in DEGRADATION_KINDS:
        raise ConfigurationError(f"unknown degradation kind {kind!r}; choose from {DEGRADATION_KINDS}")
    if not 0.0 < severity <= 1.0:
        raise ConfigurationError(f"severity must lie in (0,1], got {severity}")
    if kind == "haze":
        t = 1.0 - HAZE_MAX_ATTENUATION * severity
        out = clean * t + HAZE_AIRLIGHT * (1.0 - t)
    else:
        h, w = clean.shape[-2:]
        rng = _item_rng(seed, DEGRADATION_KINDS.index(kind))
        mask = _rain_mask(h, w, rng) if kind == "rain" else _snow_mask(h, w, rng)
        mask = torch.from_numpy(mask).to(clean.dtype) * severity
        out = clean + mask
    return out.clamp(0.0, 1.0)


def _rain_mask(h, w, rng, streaks_per_kpx=12.0):
    """Diagonal bright streaks rendered into a (h,w) float mask."""
    mask = np.zeros((h, w), dtype=np.float32)
    n = max(1, int(streaks_per_kpx * h * w / 1000.0))
    angle = rng.uniform(math.radians(60), math.radians(80))
    dy, dx = math.sin(angle), math.cos(angle)
    for _ in range(n):
        y, x = rng.uniform(0, h), rng.uniform(0, w)
        length = rng.integers(6, max(7, h // 6))
        intensity = rng.uniform(0.25, 0.6)
        for step in range(int(length)):
            yi, xi = int(y + dy * step), int(x + dx * step)
            if 0 <= yi < h and 0 <= xi < w:
                mask[yi, xi] = max(mask[yi, xi], intensity)
    return mask


def _snow_mask(h, w, rng, flakes_per_kpx=4.0):
    """Soft Gaussian blobs rendered into a (h,w) float mask."""
    mask = np.zeros((h, w), dtype=np.float32)
    n = max(1, int(flakes_per_kpx * h * w / 1000.0))
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float32)
    for _ in range(n):
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        radius = rng.uniform(0.8, 2.5)
        intensity = rng.uniform(0.4, 0.9)
        blob = intensity * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * radius ** 2))
        np.maximum(mask, blob, out=mask)
    return mask


def generate_clean_image(size=(64, 64), seed=0):
    """Smooth random test image: low-frequency RGB noise upsampled bilinearly."""
    rng = _item_rng(seed, 0)
    h, w = size
    coarse = rng.uniform(0.1, 0.9, size=(3, max(2, h // 8), max(2, w // 8))).astype(np.float32)
    img = torch.from_numpy(coarse)[None]
    img = torch.nn.functional.interpolate(img, size=(h, w), mode="bilinear", align_corners=False)
    return img[0].clamp(0.0, 1.0)


def make_synthetic_dataset(root, n_paired=8, n_unpaired=12, size=(64, 64), kind="haze",
                           severity=0.5, seed=0):
    """Write the full dataset_root layout from generated clean images."""
    root = Path(root)
    for sub in (PAIRED_HAZY, PAIRED_CLEAN, UNPAIRED_HAZY, UNPAIRED_CLEAN):
        (root / sub).mkdir(parents=True, exist_ok=True)
    for i in range(n_paired):
        clean = generate_clean_image(size, seed=seed + i)
        hazy = synthesize_degradation(clean, kind, severity, seed=seed + i)
        save_image(clean, root / PAIRED_CLEAN / f"img{i:04d}.png")
        save_image(hazy, root / PAIRED_HAZY / f"img{i:04d}.png")
    for i in range(n_unpaired):
        clean = generate_clean_image(size, seed=seed + 1000 + i)
        hazy = synthesize_degradation(clean, kind, severity, seed=seed + 2000 + i)
        save_image(clean, root / UNPAIRED_CLEAN / f"clean{i:04d}.png")
        save_image(hazy, root / UNPAIRED_HAZY / f"hazy{i:04d}.png")
    return root
