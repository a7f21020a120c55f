import io
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from haze_restore.ffa import FFA, zero_weights
from haze_restore.service import create_app
from haze_restore.training import (
    ALLOWED_K,
    Checkpoint,
    REPORTED_VARIANT_METRICS,
    TrainConfig,
    config_snapshot,
    save_checkpoint,
)


def png_bytes(seed=0, size=(40, 40)):
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(size[0], size[1], 3), dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture(scope="module")
def ckpt_dir(tmp_path_factory, tiny_ffa_cfg):
    directory = tmp_path_factory.mktemp("service_ckpts")
    for k in ALLOWED_K:
        net = FFA(tiny_ffa_cfg, seed=k)
        if k == 0:
            zero_weights(net)
        ckpt = Checkpoint(
            phase="finetune", variant=f"k{k}", epoch=1, step=4,
            config=config_snapshot(TrainConfig(ffa=tiny_ffa_cfg)),
            weights={"generator_xy": net.state_dict()}, optimizers={}, history=[],
        )
        save_checkpoint(ckpt, directory / ckpt.filename())
    manifest = {str(k): dict(v) for k, v in REPORTED_VARIANT_METRICS.items()}
    manifest["source"] = "paper-reported"
    (directory / "variants_manifest.json").write_text(json.dumps(manifest))
    return directory


@pytest.fixture()
def client(ckpt_dir, tmp_path):
    app = create_app(ckpt_dir=ckpt_dir, artifact_dir=tmp_path / "artifacts")
    return TestClient(app)


class TestVariants:
    def test_all_five_ready_with_reported_numbers(self, client):
        entries = client.get("/api/variants").json()
        assert [e["k"] for e in entries] == [25, 20, 10, 5, 0]
        assert all(e["status"] == "ready" for e in entries)
        by_k = {e["k"]: e for e in entries}
        assert by_k[25]["ssim_reported"] == 0.9084
        assert by_k[25]["psnr_reported"] == 19.16
        assert by_k[0]["psnr_reported"] == 18.02
        assert all(e["reported_source"] == "paper-reported" for e in entries)

    def test_missing_checkpoint_marked_unavailable(self, ckpt_dir, tmp_path):
        removed = ckpt_dir / "finetune_k10_1.ckpt"
        backup = removed.read_bytes()
        removed.unlink()
        try:
            app = create_app(ckpt_dir=ckpt_dir, artifact_dir=tmp_path / "a")
            entries = {e["k"]: e for e in TestClient(app).get("/api/variants").json()}
            assert entries[10]["status"] == "unavailable"
            assert entries[25]["status"] == "ready"
        finally:
            removed.write_bytes(backup)

    def test_absent_manifest_gives_null_reported_fields(self, tmp_path, ckpt_dir):
        bare = tmp_path / "bare_ckpts"
        bare.mkdir()
        for f in ckpt_dir.glob("*.ckpt"):
            (bare / f.name).write_bytes(f.read_bytes())
        app = create_app(ckpt_dir=bare, artifact_dir=tmp_path / "b")
        entries = TestClient(app).get("/api/variants").json()
        assert all(e["ssim_reported"] is None and e["psnr_reported"] is None for e in entries)


class TestRestore:
    def test_metrics_present_iff_reference_uploaded(self, client):
        image = png_bytes(seed=1)
        with_ref = client.post(
            "/api/restore",
            files={"image": ("in.png", image, "image/png"),
                   "reference": ("ref.png", png_bytes(seed=2), "image/png")},
            data={"variant": "25"},
        )
        assert with_ref.status_code == 200, with_ref.text
        body = with_ref.json()
        assert "psnr_db" in body and "ssim" in body
        assert body["restored_image_url"].startswith("/api/artifacts/")

        without_ref = client.post(
            "/api/restore",
            files={"image": ("in.png", image, "image/png")},
            data={"variant": "25"},
        )
        assert without_ref.status_code == 200
        assert "psnr_db" not in without_ref.json() and "ssim" not in without_ref.json()

    def test_identity_variant_with_same_reference_scores_perfectly(self, client):
        # K=0 checkpoint is the zero-weight identity; the restored image equals
        # the (resized) upload, so comparing against the upload itself caps PSNR
        image = png_bytes(seed=3, size=(256, 256))
        body = client.post(
            "/api/restore",
            files={"image": ("in.png", image, "image/png"),
                   "reference": ("ref.png", image, "image/png")},
            data={"variant": "0"},
        ).json()
        assert body["ssim"] == pytest.approx(1.0, abs=1e-9)
        assert body["psnr_db"] == pytest.approx(100.0, abs=1e-6)

    def test_unknown_variant_404_lists_allowed(self, client):
        response = client.post(
            "/api/restore",
            files={"image": ("in.png", png_bytes(), "image/png")},
            data={"variant": "7"},
        )
        assert response.status_code == 404
        body = response.json()
        assert body["code"] == "unknown_variant"
        assert "[0, 5, 10, 20, 25]" in body["message"]

    def test_unavailable_variant_503(self, ckpt_dir, tmp_path):
        removed = ckpt_dir / "finetune_k5_1.ckpt"
        backup = removed.read_bytes()
        removed.unlink()
        try:
            app = create_app(ckpt_dir=ckpt_dir, artifact_dir=tmp_path / "c")
            response = TestClient(app).post(
                "/api/restore",
                files={"image": ("in.png", png_bytes(), "image/png")},
                data={"variant": "5"},
            )
            assert response.status_code == 503
            assert response.json()["code"] == "variant_unavailable"
        finally:
            removed.write_bytes(backup)

    def test_oversize_upload_400(self, ckpt_dir, tmp_path):
        app = create_app(ckpt_dir=ckpt_dir, artifact_dir=tmp_path / "d", max_upload_bytes=1024)
        response = TestClient(app).post(
            "/api/restore",
            files={"image": ("in.png", png_bytes(size=(64, 64)), "image/png")},
            data={"variant": "25"},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "oversize"

    def test_undecodable_upload_400(self, client):
        response = client.post(
            "/api/restore",
            files={"image": ("in.png", b"this is not an image", "image/png")},
            data={"variant": "25"},
        )
        assert response.status_code == 400
        assert response.json()["code"] == "unsupported_format"

    def test_repeated_upload_returns_identical_bytes(self, client):
        image = png_bytes(seed=9)
        first = client.post("/api/restore", files={"image": ("a.png", image, "image/png")},
                            data={"variant": "20"}).json()
        second = client.post("/api/restore", files={"image": ("a.png", image, "image/png")},
                             data={"variant": "20"}).json()
        assert first["job_id"] == second["job_id"]
        a = client.get(first["restored_image_url"]).content
        b = client.get(second["restored_image_url"]).content
        assert a == b and len(a) > 0

    def test_different_variants_give_different_artifacts(self, client):
        image = png_bytes(seed=10)
        r25 = client.post("/api/restore", files={"image": ("a.png", image, "image/png")},
                          data={"variant": "25"}).json()
        r5 = client.post("/api/restore", files={"image": ("a.png", image, "image/png")},
                         data={"variant": "5"}).json()
        assert r25["job_id"] != r5["job_id"]


class TestArtifactTTL:
    def test_expired_artifacts_purged_on_next_restore(self, ckpt_dir, tmp_path):
        import os
        import time

        art = tmp_path / "artifacts"
        app = create_app(ckpt_dir=ckpt_dir, artifact_dir=art, ttl_seconds=3600)
        client = TestClient(app)
        first = client.post("/api/restore", files={"image": ("a.png", png_bytes(1), "image/png")},
                            data={"variant": "25"}).json()
        stale = art / f"{first['job_id']}.png"
        old = time.time() - 7200
        os.utime(stale, (old, old))

        client.post("/api/restore", files={"image": ("b.png", png_bytes(2), "image/png")},
                    data={"variant": "25"})
        assert not stale.exists()


class TestStaticUI:
    def test_ui_mounted_when_directory_given(self, ckpt_dir, tmp_path):
        ui = tmp_path / "ui"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>comparison ui</body></html>")
        app = create_app(ckpt_dir=ckpt_dir, artifact_dir=tmp_path / "art", ui_dir=ui)
        client = TestClient(app)
        assert "comparison ui" in client.get("/").text
        # API routes keep precedence over the static mount
        assert client.get("/api/variants").status_code == 200


class TestArtifacts:
    def test_unknown_artifact_404(self, client):
        response = client.get("/api/artifacts/doesnotexist123")
        assert response.status_code == 404
        assert response.json()["code"] == "unknown_artifact"

    def test_artifact_is_png(self, client):
        body = client.post("/api/restore", files={"image": ("a.png", png_bytes(11), "image/png")},
                           data={"variant": "10"}).json()
        response = client.get(body["restored_image_url"])
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        assert response.content[:8] == b"\x89PNG\r\n\x1a\n"
