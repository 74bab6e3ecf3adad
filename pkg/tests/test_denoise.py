import numpy as np
import pytest

from sparsescene.denoise import DenoiseConfig, denoise_image
from sparsescene.errors import ParameterError
from sparsescene.image import NoiseSpec, add_noise, psnr


def smooth_image(size=32, seed=0):
    grid = np.arange(size, dtype=np.float64)
    ramp = 60.0 + 1.5 * grid[None, :] + 0.8 * grid[:, None]
    bump = 40.0 * np.exp(-((grid[None, :] - size / 2) ** 2 + (grid[:, None] - size / 2) ** 2) / (2 * (size / 4) ** 2))
    return ramp + bump


def test_config_validation():
    with pytest.raises(ParameterError):
        DenoiseConfig(sigma=0.0)
    with pytest.raises(ParameterError):
        DenoiseConfig(sigma=5.0, patch_side=1)
    with pytest.raises(ParameterError):
        DenoiseConfig(sigma=5.0, ksvd_iterations=0)
    with pytest.raises(ParameterError):
        DenoiseConfig(sigma=5.0, lambda_mode="bogus")


def test_effective_mu_scales_inversely_with_sigma():
    assert DenoiseConfig(sigma=10.0).effective_mu == pytest.approx(3.0)
    assert DenoiseConfig(sigma=10.0, mu=7.0).effective_mu == 7.0


def test_error_bound_follows_patch_dim():
    cfg = DenoiseConfig(sigma=10.0, patch_side=8, error_gain=1.15)
    assert cfg.error_bound == pytest.approx(64 * 100 * 1.15)
    assert DenoiseConfig(sigma=10.0, lambda_mode="fixed-sparsity").error_bound == 0.0


def test_negligible_noise_is_near_identity():
    img = smooth_image(32)
    cfg = DenoiseConfig(sigma=0.01, patch_side=4, atom_count=16, ksvd_iterations=2, seed=0)
    result = denoise_image(img, cfg)
    assert psnr(img, result.denoised) > 50.0


def test_huge_mu_returns_noisy_input():
    img = smooth_image(24)
    noisy = add_noise(img, NoiseSpec(sigma=8.0, seed=1))
    cfg = DenoiseConfig(sigma=8.0, patch_side=4, atom_count=16, ksvd_iterations=1, mu=1e12, seed=0)
    result = denoise_image(noisy, cfg)
    assert np.max(np.abs(result.denoised - noisy) / np.maximum(np.abs(noisy), 1.0)) < 1e-6


def test_small_fixture_improves_psnr_and_traces_monotone():
    rng = np.random.Generator(np.random.PCG64(2))
    img = smooth_image(48)
    img[8:20, 8:20] += 50.0  # flat blocks denoise well
    img[30:40, 30:40] -= 40.0
    noisy = add_noise(img, NoiseSpec(sigma=12.0, seed=3))
    cfg = DenoiseConfig(sigma=12.0, patch_side=6, atom_count=64, ksvd_iterations=4, seed=0)
    result = denoise_image(noisy, cfg, reference=img)
    assert result.psnr_denoised > result.psnr_noisy + 1.0
    trace = result.objective_trace
    assert len(trace) == 4
    for previous, current in zip(trace, trace[1:]):
        assert current <= previous * (1 + 1e-9)


def test_output_shape_dictionary_and_determinism():
    img = smooth_image(20)
    noisy = add_noise(img, NoiseSpec(sigma=5.0, seed=4))
    cfg = DenoiseConfig(sigma=5.0, patch_side=4, atom_count=16, ksvd_iterations=2, seed=9)
    first = denoise_image(noisy, cfg)
    second = denoise_image(noisy, cfg)
    assert first.denoised.shape == noisy.shape
    assert np.array_equal(first.denoised, second.denoised)
    assert np.array_equal(first.dictionary.atoms, second.dictionary.atoms)
    norms = np.linalg.norm(first.dictionary.atoms, axis=0)
    assert np.abs(norms - 1.0).max() < 1e-9


def test_training_subsample_still_codes_all_patches():
    img = smooth_image(24)
    noisy = add_noise(img, NoiseSpec(sigma=6.0, seed=5))
    cfg = DenoiseConfig(
        sigma=6.0, patch_side=4, atom_count=16, ksvd_iterations=1, seed=2, train_patch_budget=50
    )
    result = denoise_image(noisy, cfg)
    assert result.denoised.shape == noisy.shape
    # budget larger than the patch count must give the unsubsampled path
    cfg_all = DenoiseConfig(
        sigma=6.0, patch_side=4, atom_count=16, ksvd_iterations=1, seed=2, train_patch_budget=10**6
    )
    full = denoise_image(noisy, cfg_all)
    assert np.all(np.isfinite(full.denoised))


def test_image_smaller_than_patch_rejected():
    with pytest.raises(ParameterError):
        denoise_image(np.zeros((4, 4)) + 10.0, DenoiseConfig(sigma=5.0, patch_side=8))


def test_threads_do_not_change_result():
    img = smooth_image(20)
    noisy = add_noise(img, NoiseSpec(sigma=5.0, seed=6))
    cfg = DenoiseConfig(sigma=5.0, patch_side=4, atom_count=16, ksvd_iterations=2, seed=1)
    a = denoise_image(noisy, cfg, threads=1)
    b = denoise_image(noisy, cfg, threads=4)
    assert np.array_equal(a.denoised, b.denoised)
    assert np.array_equal(a.dictionary.atoms, b.dictionary.atoms)
