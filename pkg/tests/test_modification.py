import numpy as np
import pytest
from PIL import Image

from valimetrics.errors import EmptySweep, QualityOutOfRange, ZeroEncodedSize
from valimetrics.manifest import read_image_record
from valimetrics.modification import (
    apply_jpeg,
    compression_factor,
    sweep,
    write_sweep_csv,
)


def save_photo(path, seed=0, h=64, w=64):
    from valimetrics.demo import make_photo
    img = make_photo(np.random.default_rng(seed), h, w)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img).save(path)
    return path


class TestApplyJpeg:
    def test_dimensions_preserved(self, tmp_path):
        rec = read_image_record(save_photo(tmp_path / "in.png"))
        out = apply_jpeg(rec, 100, tmp_path / "out.jpg")
        assert (out.width, out.height) == (rec.width, rec.height)

    def test_constant_gray_survives_heavy_compression(self, tmp_path):
        p = tmp_path / "gray.png"
        Image.fromarray(np.full((64, 64), 128, dtype=np.uint8)).save(p)
        out = apply_jpeg(read_image_record(p), 5, tmp_path / "gray.jpg")
        decoded = np.asarray(Image.open(out.path), dtype=np.int64)
        assert np.abs(decoded - 128).max() <= 3

    @pytest.mark.parametrize("q", [0, 101, -1])
    def test_quality_out_of_range(self, tmp_path, q):
        rec = read_image_record(save_photo(tmp_path / "in.png"))
        with pytest.raises(QualityOutOfRange):
            apply_jpeg(rec, q, tmp_path / "out.jpg")

    def test_subsampling_switch(self, tmp_path):
        # 4:4:4 at >= 90 keeps chroma untouched at quality 100
        p = tmp_path / "red.png"
        arr = np.zeros((32, 32, 3), dtype=np.uint8)
        arr[..., 0] = 200
        Image.fromarray(arr).save(p)
        out = apply_jpeg(read_image_record(p), 100, tmp_path / "red.jpg")
        decoded = np.asarray(Image.open(out.path), dtype=np.int64)
        assert np.abs(decoded[..., 0] - 200).max() <= 2


class TestCompressionFactor:
    def test_ratio(self):
        assert compression_factor(1555200, 155520) == pytest.approx(10.0)

    def test_identity(self):
        assert compression_factor(12345, 12345) == pytest.approx(1.0)

    def test_zero_encoded(self):
        with pytest.raises(ZeroEncodedSize):
            compression_factor(100, 0)


class TestSweep:
    def test_monotone_over_photo_corpus(self, tmp_path):
        for i in range(12):
            save_photo(tmp_path / "photos" / f"{i:03d}.png", seed=i)
        stats = sweep(tmp_path / "photos", [90, 50, 30, 15, 5])
        means = [s.factor_mean for s in stats]
        assert all(a < b for a, b in zip(means, means[1:]))
        assert all(s.n == 12 for s in stats)

    def test_single_image_single_quality(self, tmp_path):
        save_photo(tmp_path / "one" / "a.png")
        stats = sweep(tmp_path / "one", [50])
        assert stats[0].n == 1
        assert stats[0].factor_std == 0.0

    def test_empty_quality_list(self, tmp_path):
        save_photo(tmp_path / "x" / "a.png")
        with pytest.raises(EmptySweep):
            sweep(tmp_path / "x", [])

    def test_csv_output(self, tmp_path):
        save_photo(tmp_path / "y" / "a.png")
        stats = sweep(tmp_path / "y", [90, 5])
        write_sweep_csv(stats, tmp_path / "stats.csv")
        lines = (tmp_path / "stats.csv").read_text().strip().splitlines()
        assert lines[0] == "quality,n,factor_mean,factor_std"
        assert len(lines) == 3
