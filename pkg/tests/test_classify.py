import logging
import math

import numpy as np
import pytest
from conftest import brute_force_class_label

from sparsescene.classify import (
    UNCERTAIN,
    HierarchyConfig,
    SrcDecision,
    build_class_dictionary,
    hierarchical_classify,
    src_classify,
    threshold_decide,
)
from sparsescene.errors import ParameterError
from sparsescene.features import plan_patch_sizes
from sparsescene.synth import make_training_mask, synth_mosaic


class TestBuildClassDictionary:
    def test_minimal_two_class(self):
        cdict = build_class_dictionary([[np.array([1.0, 0.0])], [np.array([0.0, 2.0])]])
        assert cdict.columns.shape == (2, 2)
        assert cdict.class_ranges == [(0, 1), (1, 2)]

    def test_table_sized_dictionary(self):
        rng = np.random.Generator(np.random.PCG64(0))
        samples = [[rng.standard_normal(22) for _ in range(64)] for _ in range(4)]
        cdict = build_class_dictionary(samples)
        assert cdict.columns.shape == (22, 256)
        assert cdict.class_ranges[-1] == (192, 256)

    def test_columns_unit_norm(self):
        rng = np.random.Generator(np.random.PCG64(1))
        samples = [[rng.uniform(1, 5, size=6) for _ in range(3)] for _ in range(2)]
        cdict = build_class_dictionary(samples)
        norms = np.linalg.norm(cdict.columns, axis=0)
        assert np.abs(norms - 1.0).max() < 1e-9

    def test_empty_class_rejected(self):
        with pytest.raises(ParameterError):
            build_class_dictionary([[np.ones(3)], []])

    def test_zero_norm_sample_rejected(self):
        with pytest.raises(ParameterError):
            build_class_dictionary([[np.zeros(3)]])


class TestSrcClassify:
    def test_exact_training_column(self):
        rng = np.random.Generator(np.random.PCG64(2))
        samples = [[rng.standard_normal(8) for _ in range(2)] for _ in range(3)]
        cdict = build_class_dictionary(samples)
        query = samples[2][1] * 4.0  # scaling must not matter
        decision = src_classify(query, cdict, max_sparsity=1)
        assert decision.label == 2
        assert decision.residuals[2] < 1e-9

    def test_orthogonal_axis_classes(self):
        cdict = build_class_dictionary(
            [[np.array([1.0, 0.0, 0.0])], [np.array([0.0, 1.0, 0.0])]]
        )
        decision = src_classify(np.array([3.0, 0.0, 0.0]), cdict, max_sparsity=1)
        assert decision.label == 0
        assert decision.residuals[0] == pytest.approx(0.0, abs=1e-12)
        assert decision.residuals[1] == pytest.approx(1.0, abs=1e-12)
        assert decision.tau == decision.residuals[0]
        assert decision.theta == 0

    def test_matches_brute_force_oracle_on_random_fixtures(self):
        # rotated orthogonal class subspaces, m=8, K=3, n_i=4, s=2
        rng = np.random.Generator(np.random.PCG64(99))
        for trial in range(40):
            q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
            samples = []
            for cls in range(3):
                basis = q[:, 2 * cls : 2 * cls + 2]
                samples.append(
                    [basis @ (rng.uniform(0.5, 1.5, 2) * rng.choice([-1, 1], 2)) for _ in range(4)]
                )
            cdict = build_class_dictionary(samples)
            truth = int(rng.integers(0, 3))
            start, stop = cdict.class_ranges[truth]
            picks = rng.choice(np.arange(start, stop), size=2, replace=False)
            y = cdict.columns[:, picks] @ rng.uniform(0.4, 1.2, 2) + rng.standard_normal(8) * 0.01
            decision = src_classify(y, cdict, max_sparsity=2)
            assert decision.label == brute_force_class_label(cdict, y, 2) == truth

    def test_residuals_bounded_below_by_full_residual(self):
        from sparsescene.omp import omp_pursuit

        rng = np.random.Generator(np.random.PCG64(3))
        samples = [[rng.standard_normal(6) for _ in range(3)] for _ in range(3)]
        cdict = build_class_dictionary(samples)
        for _ in range(20):
            y = rng.standard_normal(6)
            decision = src_classify(y, cdict, max_sparsity=3)
            yn = y / np.linalg.norm(y)
            joint = omp_pursuit(cdict.columns, yn, 3, 0.0)
            # zeroing out other classes' coefficients cannot beat the
            # least-squares fit on the full support
            assert np.all(decision.residuals >= joint.residual_norm - 1e-9)
            for cls, (start, stop) in enumerate(cdict.class_ranges):
                inside = (joint.support >= start) & (joint.support < stop)
                if np.any(inside):
                    recon = cdict.columns[:, joint.support[inside]] @ joint.coefficients[inside]
                else:
                    recon = np.zeros(6)
                assert decision.residuals[cls] <= 1.0 + np.linalg.norm(recon) + 1e-9

    def test_scale_invariance_of_label(self):
        rng = np.random.Generator(np.random.PCG64(4))
        samples = [[rng.standard_normal(5) for _ in range(3)] for _ in range(4)]
        cdict = build_class_dictionary(samples)
        y = rng.standard_normal(5)
        a = src_classify(y, cdict, max_sparsity=2)
        b = src_classify(y * 37.5, cdict, max_sparsity=2)
        assert a.label == b.label
        assert np.allclose(a.residuals, b.residuals, atol=1e-12)

    def test_dimension_mismatch_rejected(self):
        cdict = build_class_dictionary([[np.ones(4)]])
        with pytest.raises(ParameterError):
            src_classify(np.ones(3), cdict, max_sparsity=1)


class TestThresholdDecide:
    def make(self, residuals):
        arr = np.asarray(residuals, dtype=np.float64)
        label = int(np.argmin(arr))
        return SrcDecision(label=label, residuals=arr, tau=float(arr[label]), theta=label)

    def test_both_conditions_hold(self):
        assert threshold_decide(self.make([0.05, 0.9, 0.8]), 0.2, 0.5) == 0

    def test_tau_above_delta1_defers(self):
        assert threshold_decide(self.make([0.5, 0.9]), 0.2, 0.0) == UNCERTAIN

    def test_margin_below_delta2_defers(self):
        assert threshold_decide(self.make([0.05, 0.10]), 0.2, 0.5) == UNCERTAIN

    def test_zero_delta2_disables_margin(self):
        assert threshold_decide(self.make([0.1, 0.1]), 0.2, 0.0) == 0


def mosaic_fixture(size=64, train=48, seed=1):
    image, truth = synth_mosaic(size, 4, seed=seed)
    mask = make_training_mask(truth, train, seed=seed)
    return image, truth, mask


class TestHierarchicalClassify:
    def test_disabled_thresholds_equal_plain_src(self):
        image, truth, mask = mosaic_fixture()
        plan = plan_patch_sizes(3)
        config = HierarchyConfig(layers=3, samples_per_class=16, delta1=math.inf, delta2=0.0, seed=1)
        result = hierarchical_classify(image, mask, config, plan, class_count=4)
        assert int(result.uncertain_masks[0].sum()) == 0
        # layer 1 decided everything: recompute a sample of pixels directly
        from sparsescene.classify import build_class_dictionary as bcd
        from sparsescene.features import feature_raster

        feats = feature_raster(image, plan.s_large)
        rng = np.random.Generator(np.random.PCG64(config.seed))
        flat = feats.reshape(-1, feats.shape[2])
        picks = []
        for cls in range(4):
            pool = np.sort(np.flatnonzero(mask.ravel() == cls))
            chosen = rng.choice(pool.size, size=16, replace=False)
            picks.append(pool[np.sort(chosen)])
        cdict = bcd([list(flat[p]) for p in picks], layer=1)
        check = np.random.Generator(np.random.PCG64(5)).integers(0, image.size, size=40)
        for px in check:
            expected = src_classify(flat[px], cdict, config.max_sparsity).label
            assert result.labels.ravel()[px] == expected

    def test_masks_nested_and_final_total(self):
        image, truth, mask = mosaic_fixture()
        plan = plan_patch_sizes(3)
        config = HierarchyConfig(layers=3, samples_per_class=16, seed=1)
        result = hierarchical_classify(image, mask, config, plan, class_count=4)
        assert len(result.uncertain_masks) == 3
        for earlier, later in zip(result.uncertain_masks, result.uncertain_masks[1:]):
            assert np.all(earlier | ~later)  # later subset of earlier
        assert int(result.uncertain_masks[-1].sum()) == 0
        assert result.labels.min() >= 0

    def test_deterministic_reruns(self):
        image, truth, mask = mosaic_fixture()
        plan = plan_patch_sizes(3)
        config = HierarchyConfig(layers=2, samples_per_class=16, seed=3)
        a = hierarchical_classify(image, mask, config, plan, class_count=4)
        b = hierarchical_classify(image, mask, config, plan, class_count=4)
        assert np.array_equal(a.labels, b.labels)

    def test_threads_do_not_change_labels(self):
        image, truth, mask = mosaic_fixture()
        plan = plan_patch_sizes(3)
        config = HierarchyConfig(layers=2, samples_per_class=16, seed=3)
        a = hierarchical_classify(image, mask, config, plan, class_count=4, threads=1)
        b = hierarchical_classify(image, mask, config, plan, class_count=4, threads=8)
        assert np.array_equal(a.labels, b.labels)

    def test_insufficient_training_pixels_rejected(self):
        image, truth, mask = mosaic_fixture(train=8)
        plan = plan_patch_sizes(3)
        config = HierarchyConfig(layers=2, samples_per_class=64, seed=0)
        with pytest.raises(ParameterError):
            hierarchical_classify(image, mask, config, plan, class_count=4)

    def test_fallback_when_class_gains_no_pixels(self, caplog):
        # extreme delta1 starves later layers of fresh training pixels
        image, truth, mask = mosaic_fixture()
        plan = plan_patch_sizes(3)
        config = HierarchyConfig(layers=2, samples_per_class=16, delta1=0.0, delta2=10.0, seed=1)
        with caplog.at_level(logging.WARNING, logger="sparsescene.classify"):
            result = hierarchical_classify(image, mask, config, plan, class_count=4)
        assert int(result.uncertain_masks[-1].sum()) == 0
        assert any("reusing previous samples" in rec.message for rec in caplog.records)
