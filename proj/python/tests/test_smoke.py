import math

import numpy as np
import pytest

import besovtree as bt


def test_dwt_round_trip_1d_and_2d():
    rng = np.random.default_rng(0)
    for wavelet in ("haar", "db2"):
        x = rng.standard_normal(64)
        p = bt.forward_dwt(x, wavelet)
        assert p.depth == 5
        assert np.allclose(bt.inverse_dwt(p), x, atol=1e-12)
        assert math.isclose(p.energy(), float(np.sum(x * x)), rel_tol=1e-12)
        img = rng.standard_normal((16, 16))
        assert np.allclose(bt.inverse_dwt(bt.forward_dwt(img, wavelet)), img, atol=1e-12)


def test_pruning_matches_oracle_on_small_tree():
    rng = np.random.default_rng(1)
    x = 3.0 * rng.standard_normal(16)
    p = bt.forward_dwt(x, "haar")
    fast = bt.auto_prune_gaussian(p, a=5.0)
    slow = bt.brute_force_map(p, a=5.0)
    assert fast.mask == slow.mask
    assert math.isclose(fast.total_cost, slow.total_cost, rel_tol=1e-9, abs_tol=1e-9)
    fixed = bt.prune_fixed_beta(p, 0.1)
    assert fixed.mask == bt.brute_force_map(p, beta=0.1).mask


def test_denoise_blocks_improves_on_noisy_input():
    clean = bt.blocks_signal(10)
    clean = clean * 5.0 / clean.std()
    noisy = bt.add_gaussian_noise(clean, 1.0, seed=4)
    est, result = bt.denoise(noisy, a=100.0)
    assert bt.rel_error(est, clean) < bt.rel_error(noisy, clean)
    assert result.beta_hat is not None and len(result.beta_hat) == 10
    est_fixed, _ = bt.denoise(noisy, beta=1e-2)
    assert est_fixed.shape == noisy.shape


def test_metrics_and_image_helpers():
    img = bt.synthetic_image(5)
    assert img.shape == (64, 64)
    assert bt.ssim(img, img) == 1.0
    assert bt.snr_db(img, img) == math.inf
    assert math.isclose(bt.rel_error(1.01 * img, img), 0.01, rel_tol=1e-12)


def test_sampler_and_errors():
    signal, mask, pyramid = bt.sample_besov(dim=1, depth=6, beta=[0.0], seed=3)
    assert sum(sum(level) for level in mask) == 1
    assert signal.shape == (128,)
    assert bt.besov_norm(pyramid, 1.0, 2.0) > 0.0
    with pytest.raises(ValueError):
        bt.forward_dwt(np.zeros(10))
    with pytest.raises(ValueError):
        bt.prune_fixed_beta(bt.forward_dwt(np.zeros(8)), 0.7)


def test_pnp_with_delta_kernel_is_plain_denoising():
    clean = bt.blocks_signal(8)
    noisy = bt.add_gaussian_noise(clean * 10.0, 1.0, seed=2)
    est, iters = bt.pnp_deconvolve(noisy, [1.0], tau=1.0, iters=1)
    ref, _ = bt.denoise(noisy, a=100.0)
    assert iters == 1
    assert np.array_equal(est, ref)
