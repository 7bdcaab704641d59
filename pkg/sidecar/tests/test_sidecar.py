import json
import struct
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from valimetrics_sidecar import (
    ExtractorSpec,
    ModelLoadError,
    SpecError,
    export_lpips_weights,
    extract,
)
from valimetrics_sidecar.cli import main as cli_main
from valimetrics_sidecar.model import LAYER_CHANNELS


def parse_vfts(path):
    """Minimal reader used only by tests; mirrors the published format."""
    data = Path(path).read_bytes()
    assert data[:4] == b"VFTS"
    (version,) = struct.unpack_from("<I", data, 4)
    assert version == 1
    (id_len,) = struct.unpack_from("<H", data, 8)
    pos = 10
    ident = data[pos:pos + id_len].decode()
    pos += id_len
    (n_layers,) = struct.unpack_from("<I", data, pos)
    pos += 4
    layers = []
    for _ in range(n_layers):
        c, h, w = struct.unpack_from("<III", data, pos)
        pos += 12
        arr = np.frombuffer(data, dtype="<f4", count=c * h * w, offset=pos)
        layers.append(arr.reshape(c, h, w))
        pos += 4 * c * h * w
    assert pos == len(data)
    return ident, layers


@pytest.fixture()
def image_dir(tmp_path):
    d = tmp_path / "imgs"
    d.mkdir()
    rng = np.random.default_rng(1)
    for i in range(3):
        arr = rng.integers(0, 256, size=(40, 56, 3), dtype=np.uint8)
        Image.fromarray(arr).save(d / f"img{i}.png")
    return d


class TestExtractorSpec:
    def test_id_stable(self):
        a = ExtractorSpec(network="randcnn", layers=("conv1", "conv3"))
        b = ExtractorSpec(network="randcnn", layers=("conv1", "conv3"))
        assert a.extractor_id == b.extractor_id

    def test_id_depends_on_fields(self):
        base = ExtractorSpec()
        assert ExtractorSpec(layers=("conv1",)).extractor_id != base.extractor_id
        assert ExtractorSpec(resize="letterbox:64x64").extractor_id != base.extractor_id

    def test_default_layers_filled(self):
        assert ExtractorSpec().layers == ("conv1", "conv2", "conv3", "conv4")

    def test_unknown_network(self):
        with pytest.raises(SpecError):
            ExtractorSpec(network="resnet999")

    def test_unknown_layer(self):
        with pytest.raises(SpecError):
            ExtractorSpec(layers=("conv1", "nope"))

    def test_out_of_order_layers(self):
        with pytest.raises(SpecError):
            ExtractorSpec(layers=("conv3", "conv1"))

    def test_bad_resize(self):
        with pytest.raises(SpecError):
            ExtractorSpec(resize="stretch:64x64")


class TestExtract:
    def test_three_images_three_files(self, image_dir, tmp_path):
        spec = ExtractorSpec()
        written = extract(image_dir, spec, tmp_path / "out")
        assert len(written) == 3
        for p in written:
            ident, layers = parse_vfts(p)
            assert ident == spec.extractor_id
            assert len(layers) == 4
            assert [l.shape[0] for l in layers] == [16, 32, 64, 128]

    def test_deterministic_bitwise(self, image_dir, tmp_path):
        spec = ExtractorSpec()
        a = extract(image_dir, spec, tmp_path / "a")
        b = extract(image_dir, spec, tmp_path / "b")
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()

    def test_corrupt_image_skipped(self, image_dir, tmp_path):
        (image_dir / "broken.png").write_bytes(b"not a png")
        failures = []
        written = extract(image_dir, ExtractorSpec(), tmp_path / "out",
                          failures=failures)
        assert len(written) == 3
        assert len(failures) == 1
        assert failures[0][0].name == "broken.png"

    def test_spec_json_emitted(self, image_dir, tmp_path):
        spec = ExtractorSpec(layers=("conv2", "conv4"))
        extract(image_dir, spec, tmp_path / "out")
        doc = json.loads((tmp_path / "out" / "spec.json").read_text())
        assert doc["extractor_id"] == spec.extractor_id
        assert doc["layers"] == ["conv2", "conv4"]

    def test_letterbox_fixes_spatial_size(self, image_dir, tmp_path):
        spec = ExtractorSpec(resize="letterbox:64x64")
        written = extract(image_dir, spec, tmp_path / "out")
        _, layers = parse_vfts(written[0])
        # stride-2 stack: 64 -> 32 -> 16 -> 8 -> 4
        assert layers[0].shape[1:] == (32, 32)
        assert layers[3].shape[1:] == (4, 4)

    def test_grayscale_input_accepted(self, tmp_path):
        d = tmp_path / "gray"
        d.mkdir()
        Image.fromarray(np.zeros((40, 40), dtype=np.uint8)).save(d / "g.png")
        assert len(extract(d, ExtractorSpec(), tmp_path / "out")) == 1


class TestWeights:
    def test_uniform_vftw(self, tmp_path):
        spec = ExtractorSpec()
        out = export_lpips_weights(spec, tmp_path / "w.vftw")
        data = out.read_bytes()
        assert data[:4] == b"VFTW"
        (n_layers,) = struct.unpack_from("<I", data, 8)
        assert n_layers == 4
        pos = 12
        for name in spec.layers:
            (c,) = struct.unpack_from("<I", data, pos)
            pos += 4
            assert c == LAYER_CHANNELS["randcnn"][name]
            w = np.frombuffer(data, dtype="<f4", count=c, offset=pos)
            assert (w == 1.0).all()
            pos += 4 * c

    def test_calibrated_unavailable(self, tmp_path):
        with pytest.raises(ModelLoadError):
            export_lpips_weights(ExtractorSpec(), tmp_path / "w.vftw",
                                 calibration="calibrated")


class TestCli:
    def test_happy_path(self, image_dir, tmp_path):
        out = tmp_path / "out"
        result = CliRunner().invoke(cli_main, [
            "--images", str(image_dir), "--out", str(out),
            "--weights-out", str(tmp_path / "w.vftw"),
        ])
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("*.vfts"))) == 3
        assert (tmp_path / "w.vftw").exists()

    def test_corrupt_image_exit_1(self, image_dir, tmp_path):
        (image_dir / "broken.png").write_bytes(b"junk")
        result = CliRunner().invoke(cli_main, [
            "--images", str(image_dir), "--out", str(tmp_path / "out"),
        ])
        assert result.exit_code == 1
