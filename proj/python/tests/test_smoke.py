import numpy as np
import pytest

import softbokeh as sb


def scene(recipe="two_plane:0:0.7:disk", size=96, seed=1):
    return sb.make_scene(recipe, size, size, seed)


def test_schedule_and_kernels():
    assert sb.growing_schedule() == [1, 3, 5, 7, 11, 15, 19, 23, 27, 33, 39, 45, 53, 61, 69]
    k = sb.soft_disk(3.0)
    assert k.size == 7
    assert k.taps.shape == (7, 7)
    assert abs(k.sum() - 1.0) < 1e-9
    assert np.allclose(k.taps, k.taps.T)


def test_convolve_modes_agree():
    rng = np.random.default_rng(0)
    img = rng.random((33, 41, 3), dtype=np.float32)
    k = sb.soft_disk(9.0)
    assert np.abs(sb.convolve(img, k, "optimized") - sb.convolve(img, k, "reference")).max() < 1e-5


def test_pipeline_identity_and_shapes():
    s = scene("flat:0.4")
    out = sb.render_pipeline(s["image"], s["disparity"], 0.4)
    assert out.shape == (96, 96, 3)
    assert np.abs(out - s["image"]).max() < 1e-4


def test_refocus_blurs_background_only():
    s = scene()
    session = sb.RefocusSession(s["image"], s["disparity"])
    out = session.refocus(0.0, 1.0)
    img = s["image"]
    lap = lambda a: np.abs(a[1:-1, 1:-1] * 4 - a[:-2, 1:-1] - a[2:, 1:-1] - a[1:-1, :-2] - a[1:-1, 2:]).mean()
    assert lap(out[:12]) < 0.5 * lap(img[:12])
    assert np.abs(out[44:52, 44:52] - img[44:52, 44:52]).max() < 1e-6


def test_weighted_render_with_constant_radiance_matches_layered():
    rng = np.random.default_rng(3)
    img = rng.random((40, 40, 3), dtype=np.float32)
    d = rng.random((40, 40), dtype=np.float32)
    r = np.full_like(img, 3.0)
    assert np.abs(sb.weighted_render(img, r, d) - sb.layered_render(img, d)).max() < 1e-6


def test_metrics_and_poisson_loss():
    a = np.full((32, 32, 3), 0.25, np.float32)
    b = a + np.float32(16 / 255)
    assert sb.psnr(a, b) == pytest.approx(24.0484, abs=1e-3)
    assert sb.ssim(a, a) == 1.0
    t = np.full((24, 32, 3), 0.5, np.float32)
    f = t.copy()
    f[9, 13, :] += np.float32(1 / 64)
    assert sb.poisson_loss(t, f) == pytest.approx(20 * (1 / 64) ** 2 / (2 * 24 * 32), abs=1e-12)


def test_fusion_keeps_sharp_region():
    s = scene()
    d = sb.defocus_map(s["disparity"], 0.0)
    bokeh = np.zeros_like(s["image"])
    mb = sb.binary_mask(d)
    cfg = sb.FusionConfig()
    cfg.steps = 5
    mask, loss = sb.optimize_mask(s["image"], bokeh, d, cfg)
    assert np.all(mask[mb == 1] == 1)
    assert all(b <= a for a, b in zip(loss, loss[1:]))


def test_io_round_trip(tmp_path):
    s = scene()
    sb.save_png8(s["image"], str(tmp_path / "a.png"))
    sb.save_pfm(s["disparity"], str(tmp_path / "d.pfm"))
    assert np.abs(sb.load_image(str(tmp_path / "a.png")) - s["image"]).max() <= 0.5 / 255 + 1e-6
    assert np.array_equal(sb.load_disparity(str(tmp_path / "d.pfm")), s["disparity"])
    with pytest.raises(sb.ImageIoError):
        sb.load_image(str(tmp_path / "missing.png"))


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        sb.defocus_map(np.zeros((4, 4), np.float32), 1.5)
    with pytest.raises(ValueError):
        sb.make_scene("flat:2", 8, 8, 0)
