"""HTTP inference backend for the comparison web UI.

Loads the five K-variant checkpoints lazily, restores uploads through the
selected generator, stores results content-addressed on disk, and reports
SSIM/PSNR when a clean reference accompanies the upload.

Environment: HAZE_RESTORE_CKPT_DIR, HAZE_RESTORE_DEVICE, HAZE_RESTORE_PORT.
"""

import hashlib
import io
import json
import logging
import os
import threading
import time
from pathlib import Path

import numpy as np
import torch
from fastapi import FastAPI, File, Form, UploadFile
from fastapi.responses import FileResponse, JSONResponse

from .data import AugmentationConfig, augment
from .errors import CheckpointError
from .metrics import psnr, ssim
from .training import ALLOWED_K, build_generator, load_checkpoint

log = logging.getLogger(__name__)

DEFAULT_MAX_UPLOAD = 16 * 1024 * 1024
DEFAULT_TTL_SECONDS = 24 * 3600
SERVICE_RESIZE = (256, 256)
MANIFEST_NAME = "variants_manifest.json"


def _error(status, code, message):
    return JSONResponse(status_code=status, content={"code": code, "message": message})


class VariantRegistry:
    """Lazily loaded generator per fine-tuning variant K.

    A missing or unreadable checkpoint yields status 'unavailable'; loading is
    guarded by a per-variant latch so concurrent first requests share one load.
    """

    def __init__(self, ckpt_dir, device="cpu"):
        self.ckpt_dir = Path(ckpt_dir)
        self.device = device
        self._generators = {}
        self._failed = set()
        self._locks = {k: threading.Lock() for k in ALLOWED_K}

    def checkpoint_path(self, k):
        candidates = list(self.ckpt_dir.glob(f"*_k{k}_*.ckpt")) + list(
            self.ckpt_dir.glob(f"*_k{k}.ckpt")
        )
        if not candidates:
            return None

        def epoch_key(path):
            token = path.stem.rsplit("_", 1)[-1].removeprefix("step")
            return int(token) if token.isdigit() else -1

        return max(candidates, key=lambda p: (epoch_key(p), p.name))

    def status(self, k):
        if k in self._generators:
            return "ready"
        if k in self._failed or self.checkpoint_path(k) is None:
            return "unavailable"
        return "ready"

    def get(self, k):
        """Return the loaded generator for K, or None if unavailable."""
        if k in self._generators:
            return self._generators[k]
        with self._locks[k]:
            if k in self._generators:
                return self._generators[k]
            path = self.checkpoint_path(k)
            if path is None or k in self._failed:
                return None
            try:
                gen = build_generator(load_checkpoint(path), device=self.device)
            except CheckpointError as exc:
                log.warning("variant %d failed to load from %s: %s", k, path, exc)
                self._failed.add(k)
                return None
            self._generators[k] = gen
            return gen


def _load_manifest(ckpt_dir):
    path = Path(ckpt_dir) / MANIFEST_NAME
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None


def _decode_upload(data):
    from PIL import Image

    with Image.open(io.BytesIO(data)) as img:
        img = img.convert("RGB")
        arr = np.asarray(img, dtype=np.float32) / 255.0
    return torch.from_numpy(arr.transpose(2, 0, 1)).contiguous()


def _purge_expired(artifact_dir, ttl_seconds):
    cutoff = time.time() - ttl_seconds
    for path in Path(artifact_dir).glob("*.png"):
        try:
            if path.stat().st_mtime < cutoff:
                path.unlink(missing_ok=True)
        except OSError:
            pass


def create_app(ckpt_dir=None, artifact_dir=None, device=None,
               max_upload_bytes=DEFAULT_MAX_UPLOAD, ttl_seconds=DEFAULT_TTL_SECONDS,
               ui_dir=None) -> FastAPI:
    ckpt_dir = Path(ckpt_dir or os.environ.get("HAZE_RESTORE_CKPT_DIR", "checkpoints"))
    device = device or os.environ.get("HAZE_RESTORE_DEVICE", "cpu")
    artifact_dir = Path(artifact_dir or ckpt_dir / "artifacts")
    artifact_dir.mkdir(parents=True, exist_ok=True)
    ui_dir = ui_dir or os.environ.get("HAZE_RESTORE_UI_DIR")

    app = FastAPI(title="haze-restore inference service")
    registry = VariantRegistry(ckpt_dir, device=device)
    app.state.registry = registry
    aug = AugmentationConfig.gan(SERVICE_RESIZE)
    rng_unused = np.random.default_rng(0)  # resize-only pipeline draws nothing

    @app.get("/api/variants")
    def variants():
        manifest = _load_manifest(ckpt_dir)
        entries = []
        for k in sorted(ALLOWED_K, reverse=True):
            reported = (manifest or {}).get(str(k)) or {}
            entries.append({
                "k": k,
                "status": registry.status(k),
                "ssim_reported": reported.get("ssim"),
                "psnr_reported": reported.get("psnr_db"),
                "reported_source": "paper-reported" if reported else None,
            })
        return entries

    @app.post("/api/restore")
    async def restore(image: UploadFile = File(...), variant: str = Form(...),
                      reference: UploadFile | None = File(None)):
        try:
            k = int(variant)
        except ValueError:
            k = None
        if k not in ALLOWED_K:
            return _error(404, "unknown_variant",
                          f"variant {variant!r} not recognized; allowed K values: {sorted(ALLOWED_K)}")

        data = await image.read()
        if len(data) > max_upload_bytes:
            return _error(400, "oversize",
                          f"upload of {len(data)} bytes exceeds the {max_upload_bytes} byte cap")
        try:
            tensor = _decode_upload(data)
        except Exception:  # noqa: BLE001 - PIL raises various decode errors
            return _error(400, "unsupported_format",
                          "could not decode the uploaded image (PNG or JPEG expected)")

        generator = registry.get(k)
        if generator is None:
            return _error(503, "variant_unavailable",
                          f"no loadable checkpoint for variant K={k} in {ckpt_dir}")

        tensor = augment(tensor, aug, rng_unused)
        restored = generator.restore(tensor[None].to(device))

        job_id = hashlib.sha256(data + str(k).encode()).hexdigest()[:16]
        artifact_path = artifact_dir / f"{job_id}.png"
        from .data import save_image

        save_image(restored, artifact_path)
        _purge_expired(artifact_dir, ttl_seconds)

        payload = {"job_id": job_id, "restored_image_url": f"/api/artifacts/{job_id}"}
        if reference is not None:
            ref_data = await reference.read()
            if len(ref_data) > max_upload_bytes:
                return _error(400, "oversize", "reference image exceeds the upload cap")
            try:
                ref = augment(_decode_upload(ref_data), aug, rng_unused)
            except Exception:  # noqa: BLE001
                return _error(400, "unsupported_format", "could not decode the reference image")
            payload["psnr_db"] = psnr(restored, ref[None])
            payload["ssim"] = ssim(restored, ref[None])
        return payload

    @app.get("/api/artifacts/{job_id}")
    def artifact(job_id: str):
        if not job_id.isalnum():
            return _error(404, "unknown_artifact", f"no artifact {job_id}")
        path = artifact_dir / f"{job_id}.png"
        if not path.is_file():
            return _error(404, "unknown_artifact", f"no artifact {job_id}")
        return FileResponse(path, media_type="image/png")

    if ui_dir and Path(ui_dir).is_dir():
        # mounted after the API routes so /api/* keeps precedence
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def main():
    import uvicorn

    port = int(os.environ.get("HAZE_RESTORE_PORT", "8000"))
    uvicorn.run(create_app(), host="0.0.0.0", port=port)


if __name__ == "__main__":
    main()
