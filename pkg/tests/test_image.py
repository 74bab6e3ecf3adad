import math

import numpy as np
import pytest

from sparsescene.errors import ParameterError
from sparsescene.image import (
    NoiseSpec,
    add_noise,
    aggregate_patches,
    extract_patch_matrix,
    extract_patches,
    psnr,
)


def random_image(shape, seed=0, lo=0, hi=256):
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.integers(lo, hi, size=shape).astype(np.float64)


class TestAddNoise:
    def test_zero_sigma_is_identity(self):
        img = random_image((12, 9), seed=1)
        out = add_noise(img, NoiseSpec(sigma=0.0, seed=77))
        assert np.array_equal(out, img)

    def test_sample_std_matches_sigma(self):
        # 16384 samples: empirical std within 2% of 10
        img = random_image((128, 128), seed=2)
        out = add_noise(img, NoiseSpec(sigma=10.0, seed=42))
        std = np.std(out - img)
        assert abs(std - 10.0) / 10.0 < 0.02

    def test_sample_mean_near_zero(self):
        img = random_image((128, 128), seed=3)
        out = add_noise(img, NoiseSpec(sigma=10.0, seed=5))
        n = img.size
        assert abs(np.mean(out - img)) < 3 * 10.0 / math.sqrt(n)

    def test_deterministic_for_fixed_seed(self):
        img = random_image((20, 30), seed=4)
        spec = NoiseSpec(sigma=7.5, seed=123)
        assert np.array_equal(add_noise(img, spec), add_noise(img, spec))

    def test_negative_sigma_rejected(self):
        with pytest.raises(ParameterError):
            NoiseSpec(sigma=-1.0, seed=0)

    def test_output_not_clipped(self):
        img = np.zeros((64, 64))
        out = add_noise(img, NoiseSpec(sigma=50.0, seed=9))
        assert out.min() < 0


class TestExtractPatches:
    def test_full_cover_single_patch(self):
        img = random_image((3, 3), seed=5)
        patches = extract_patches(img, side=3, stride=1)
        assert len(patches) == 1
        assert patches[0].origin == (0, 0)
        assert np.array_equal(patches[0].values, img.ravel())

    def test_counts_10x10_side8(self):
        img = random_image((10, 10), seed=6)
        assert len(extract_patches(img, side=8, stride=1)) == 9

    def test_origins_5x4_side2_stride2(self):
        # rows reach 0 and 2 (4+2 > 5), cols reach 0 and 2
        img = random_image((5, 4), seed=7)
        patches = extract_patches(img, side=2, stride=2)
        assert [p.origin for p in patches] == [(0, 0), (0, 2), (2, 0), (2, 2)]

    def test_values_reproduce_source_lexicographically(self):
        img = random_image((9, 11), seed=8)
        for patch in extract_patches(img, side=3, stride=2):
            r, c = patch.origin
            assert np.array_equal(patch.values, img[r : r + 3, c : c + 3].ravel())

    def test_side_too_large_rejected(self):
        with pytest.raises(ParameterError):
            extract_patches(random_image((4, 4)), side=5, stride=1)
        with pytest.raises(ParameterError):
            extract_patches(random_image((4, 4)), side=2, stride=0)

    def test_matrix_view_matches_patch_list(self):
        img = random_image((13, 10), seed=9)
        for side, stride in [(3, 1), (4, 2), (5, 3)]:
            patches = extract_patches(img, side, stride)
            origins, matrix = extract_patch_matrix(img, side, stride)
            assert origins == [p.origin for p in patches]
            for k, p in enumerate(patches):
                assert np.array_equal(matrix[:, k], p.values)


class TestAggregatePatches:
    def test_single_full_patch_mu_zero(self):
        img = random_image((4, 4), seed=10)
        estimate = random_image((4, 4), seed=11).ravel()
        out = aggregate_patches([((0, 0), estimate)], img, mu=0.0)
        assert np.array_equal(out, estimate.reshape(4, 4))

    def test_huge_mu_returns_noisy(self):
        img = random_image((6, 6), seed=12)
        ests = [(p.origin, p.values + 3.0) for p in extract_patches(img, 2, 1)]
        out = aggregate_patches(ests, img, mu=1e12)
        assert np.max(np.abs(out - img) / np.maximum(np.abs(img), 1.0)) < 1e-6

    def test_hand_computed_3x3_two_overlapping(self):
        y = np.arange(9, dtype=np.float64).reshape(3, 3)
        est_a = np.array([10.0, 11.0, 12.0, 13.0])  # at (0, 0)
        est_b = np.array([20.0, 21.0, 22.0, 23.0])  # at (1, 1)
        out = aggregate_patches([((0, 0), est_a), ((1, 1), est_b)], y, mu=1.0)
        expected = np.array(
            [
                [(0 + 10) / 2, (1 + 11) / 2, 2.0],
                [(3 + 12) / 2, (4 + 13 + 20) / 3, (5 + 21) / 2],
                [6.0, (7 + 22) / 2, (8 + 23) / 2],
            ]
        )
        assert np.allclose(out, expected, atol=1e-12)

    def test_stride1_identity_reconstruction_is_bit_exact(self):
        img = random_image((11, 8), seed=13)
        ests = [(p.origin, p.values) for p in extract_patches(img, 3, 1)]
        out = aggregate_patches(ests, img, mu=0.0)
        assert np.array_equal(out, img)

    def test_uncovered_pixels_keep_noisy_value(self):
        img = random_image((5, 5), seed=14)
        out = aggregate_patches([((0, 0), np.full(4, 42.0))], img, mu=0.5)
        assert np.array_equal(out[3:, :], img[3:, :])

    def test_out_of_bounds_origin_rejected(self):
        img = random_image((4, 4), seed=15)
        with pytest.raises(ParameterError):
            aggregate_patches([((3, 3), np.zeros(4))], img, mu=0.0)


class TestPsnr:
    def test_identical_images_infinite(self):
        img = random_image((8, 8), seed=16)
        assert psnr(img, img) == math.inf

    def test_full_scale_error_is_zero_db(self):
        ref = np.zeros((10, 10))
        tst = np.full((10, 10), 255.0)
        assert psnr(ref, tst) == pytest.approx(0.0, abs=1e-12)

    def test_known_mse(self):
        # MSE 50 -> 10*log10(65025/50) = 31.1405 dB
        ref = np.zeros((16, 16))
        tst = np.full((16, 16), math.sqrt(50.0))
        assert psnr(ref, tst) == pytest.approx(31.14, abs=0.01)

    def test_symmetry(self):
        a = random_image((7, 9), seed=17)
        b = random_image((7, 9), seed=18)
        assert psnr(a, b) == psnr(b, a)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            psnr(np.zeros((3, 3)), np.zeros((3, 4)))

    def test_non_finite_rejected(self):
        bad = np.zeros((3, 3))
        bad[0, 0] = np.nan
        with pytest.raises(ParameterError):
            psnr(bad, np.zeros((3, 3)))
