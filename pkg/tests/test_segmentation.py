import numpy as np
import pytest
from PIL import Image

import oracles
from valimetrics.errors import AllIgnored, DecodeError, DimensionMismatch
from valimetrics.perf import load_class_mask, seg_metrics


class TestSegMetrics:
    def test_identical_masks(self, rng):
        mask = rng.integers(0, 4, size=(16, 16)).astype(np.uint8)
        scores = seg_metrics(mask, mask)
        assert scores.mean_dice == 1.0
        assert scores.mean_iou == 1.0
        assert scores.mean_pixel_acc == 1.0
        assert scores.global_pixel_acc == 1.0

    def test_half_overlap_dice(self):
        # two 100-px single-class regions overlapping on 50 px
        ref = np.zeros((10, 20), dtype=np.uint8)
        mod = np.zeros((10, 20), dtype=np.uint8)
        ref[:, 0:10] = 1
        mod[:, 5:15] = 1
        scores = seg_metrics(ref, mod)
        # fg: dice = 2*50/200 = 0.5; bg: inter 50, |R|=100, |M|=100 -> 0.5
        assert scores.mean_dice == pytest.approx(0.5)

    def test_three_of_four_pixels(self):
        ref = np.zeros((2, 2), dtype=np.uint8)
        mod = np.zeros((2, 2), dtype=np.uint8)
        mod[0, 0] = 1
        scores = seg_metrics(ref, mod)
        assert scores.mean_pixel_acc == pytest.approx(0.75)

    def test_ignore_pixels_excluded(self):
        ref = np.zeros((4, 4), dtype=np.uint8)
        mod = np.zeros((4, 4), dtype=np.uint8)
        ref[0, :] = 255
        mod[0, :] = 3  # disagreement only under ignore
        scores = seg_metrics(ref, mod)
        assert scores.mean_dice == 1.0
        assert scores.global_pixel_acc == 1.0

    def test_all_ignored(self):
        ref = np.full((4, 4), 255, dtype=np.uint8)
        with pytest.raises(AllIgnored):
            seg_metrics(ref, np.zeros((4, 4), dtype=np.uint8))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            seg_metrics(np.zeros((4, 4), dtype=np.uint8),
                        np.zeros((4, 5), dtype=np.uint8))

    def test_class_only_in_mod_counts(self):
        ref = np.zeros((4, 4), dtype=np.uint8)
        mod = np.zeros((4, 4), dtype=np.uint8)
        mod[0, 0] = 7
        scores = seg_metrics(ref, mod)
        # class 7 contributes dice/iou 0 to the union-of-classes mean
        assert scores.mean_dice < 1.0

    def test_bruteforce_oracle_random_masks(self, rng):
        for _ in range(100):
            h, w = rng.integers(2, 9, size=2)
            ref = rng.integers(0, 4, size=(h, w)).astype(np.uint8)
            mod = rng.integers(0, 4, size=(h, w)).astype(np.uint8)
            if rng.random() < 0.3:
                ref[rng.integers(0, h), rng.integers(0, w)] = 255
            if (ref != 255).sum() == 0:
                continue
            dice, iou_v, acc = oracles.seg_bf(ref, mod)
            scores = seg_metrics(ref, mod)
            assert scores.mean_dice == pytest.approx(dice, abs=1e-12)
            assert scores.mean_iou == pytest.approx(iou_v, abs=1e-12)
            assert scores.mean_pixel_acc == pytest.approx(acc, abs=1e-12)


class TestMaskIo:
    def test_round_trip(self, tmp_path, rng):
        mask = rng.integers(0, 5, size=(12, 12)).astype(np.uint8)
        p = tmp_path / "m.png"
        Image.fromarray(mask).save(p)
        assert np.array_equal(load_class_mask(p), mask)

    def test_rejects_rgb(self, tmp_path):
        p = tmp_path / "rgb.png"
        Image.fromarray(np.zeros((8, 8, 3), dtype=np.uint8)).save(p)
        with pytest.raises(DecodeError):
            load_class_mask(p)
