import numpy as np
import pytest

import argan


def test_render_identity_and_blur():
    rng = np.random.default_rng(0)
    img = rng.uniform(-1, 1, (3, 16, 16)).astype(np.float32)
    zero = np.zeros((1, 16, 16), np.float32)
    assert np.array_equal(argan.render(img, zero, 1.0), img)
    d = np.full((1, 16, 16), 1.0, np.float32)
    out = argan.render(img, d, 1.0)
    assert out.shape == img.shape
    assert out.std() < img.std()


def test_aperture_and_prior():
    w = argan.aperture_weights(5)
    assert (w > 0).sum() == 13
    assert abs(w.sum() - 1) < 1e-6
    p = argan.center_focus_prior(16, 16)
    assert p.shape == (16, 16)
    assert p.max() == 0.0
    assert np.array_equal(p, p.T)


def test_metrics():
    rng = np.random.default_rng(1)
    ref = rng.normal(size=(2, 1, 8, 8)).astype(np.float32)
    assert argan.side(3 * ref + 1, ref) < 1e-5
    maps = np.stack([np.zeros((1, 4, 4)), np.ones((1, 4, 4))]).astype(np.float32)
    assert argan.dsd(maps) == 0.5
    r = argan.kid(np.full((10, 4), 0.5), np.full((10, 4), 0.5), 5)
    assert abs(r["estimate"]) < 1e-9
    with pytest.raises(ValueError):
        argan.side(ref, np.ones_like(ref))


def test_sampling_and_synthetic():
    s = argan.sample_dof_scale(1000, seed=3, p_s=1.0)
    assert np.all(s == 1)
    data = argan.make_synthetic_dataset(2, image_size=16, seed=1)
    assert data["images"].shape == (2, 3, 16, 16)
    assert data["disparity"].max() == 0.0
    with pytest.raises(ValueError):
        argan.make_synthetic_dataset(1, d_min=5, d_max=1)


def test_train_and_generate(tmp_path):
    text = argan.config_text(image_size=32, batch_size=2, channel_divisor=8, latent_dim=32, scale_hidden=16,
                             synthetic_count=4, total_d_iterations=2, output_dir=str(tmp_path / "run"))
    ckpt = argan.train(text)
    model = argan.Model(ckpt)
    out = model.generate(3, seed=5)
    assert out["deep"].shape == (3, 3, 32, 32)
    assert out["disparity"].shape == (3, 1, 32, 32)
    again = model.generate(3, seed=5)
    assert np.array_equal(out["shallow"], again["shallow"])
    assert "total_d_iterations = 2" in model.config
    with pytest.raises(ValueError):
        argan.config_text(no_such_key=1)
