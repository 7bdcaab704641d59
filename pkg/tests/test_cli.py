import json

import pytest
from click.testing import CliRunner

from valimetrics.cli import cli
from valimetrics.demo import build_pair_corpus
from valimetrics.pipeline import RunConfig, load_config, run_pipeline
from valimetrics.errors import ConfigError


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    build_pair_corpus(d, n=12, seed=3)
    return d


def run_cli(*args):
    return CliRunner().invoke(cli, list(args), catch_exceptions=False)


class TestPairCommand:
    def test_pair_writes_manifest(self, corpus, tmp_path):
        out = tmp_path / "m.json"
        result = run_cli("pair", "--ref", str(corpus / "ref"),
                         "--mod", str(corpus / "mod"),
                         "--modification", "jpeg:mixed", "--out", str(out))
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["version"] == 1
        assert len(doc["pairs"]) == 12


class TestModifyCommand:
    def test_single_quality(self, corpus, tmp_path):
        out_dir = tmp_path / "jpeg50"
        result = run_cli("modify", "jpeg", "--in", str(corpus / "ref"),
                         "--out", str(out_dir), "--quality", "50")
        assert result.exit_code == 0
        assert len(list(out_dir.glob("*.jpg"))) == 12

    def test_sweep_csv(self, corpus, tmp_path):
        stats = tmp_path / "stats.csv"
        result = run_cli("modify", "jpeg", "--in", str(corpus / "ref"),
                         "--sweep", "90,5", "--stats-out", str(stats))
        assert result.exit_code == 0
        lines = stats.read_text().strip().splitlines()
        assert lines[0] == "quality,n,factor_mean,factor_std"
        assert len(lines) == 3


class TestQualityCommand:
    def test_quality_csv(self, corpus, tmp_path):
        m = tmp_path / "m.json"
        run_cli("pair", "--ref", str(corpus / "ref"), "--mod", str(corpus / "mod"),
                "--out", str(m))
        out = tmp_path / "quality.csv"
        result = run_cli("quality", "--manifest", str(m), "--out", str(out))
        assert result.exit_code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("pair_id,modification,mse,psnr,ssim,ncc,lpips,cosine")
        assert len(lines) == 13


class TestPerfCommands:
    def test_det_and_seg(self, corpus, tmp_path):
        m = tmp_path / "m.json"
        run_cli("pair", "--ref", str(corpus / "ref"), "--mod", str(corpus / "mod"),
                "--out", str(m))
        det_csv = tmp_path / "det.csv"
        result = run_cli("perf", "det", "--manifest", str(m),
                         "--ref-pred", str(corpus / "ref_pred.json"),
                         "--mod-pred", str(corpus / "mod_pred.json"),
                         "--out", str(det_csv))
        assert result.exit_code == 0
        assert len(det_csv.read_text().strip().splitlines()) == 13
        seg_csv = tmp_path / "seg.csv"
        result = run_cli("perf", "seg", "--manifest", str(m),
                         "--ref-masks", str(corpus / "ref_masks"),
                         "--mod-masks", str(corpus / "mod_masks"),
                         "--out", str(seg_csv))
        assert result.exit_code == 0


class TestRunPipeline:
    def run_full(self, corpus, out_dir, jobs=1):
        config = RunConfig(
            ref_dir=str(corpus / "ref"),
            mod_dir=str(corpus / "mod"),
            modification="jpeg:mixed",
            ref_pred=str(corpus / "ref_pred.json"),
            mod_pred=str(corpus / "mod_pred.json"),
            ref_masks=str(corpus / "ref_masks"),
            mod_masks=str(corpus / "mod_masks"),
            out_dir=str(out_dir),
            jobs=jobs,
        )
        return run_pipeline(config)

    def test_happy_path_artifacts(self, corpus, tmp_path):
        code = self.run_full(corpus, tmp_path / "out")
        # features dir absent -> partial (perceptual columns missing)
        assert code == 1
        for name in ("manifest.json", "quality.csv", "perf.csv",
                     "correlation.csv", "correlation.md", "boxstats.json"):
            assert (tmp_path / "out" / name).exists(), name

    def test_rerun_skips_and_is_identical(self, corpus, tmp_path):
        out = tmp_path / "out"
        self.run_full(corpus, out)
        before = {
            name: (out / name).read_bytes()
            for name in ("manifest.json", "quality.csv", "perf.csv", "correlation.csv")
        }
        mtimes = {name: (out / name).stat().st_mtime_ns for name in before}
        self.run_full(corpus, out)
        for name, data in before.items():
            assert (out / name).read_bytes() == data
            assert (out / name).stat().st_mtime_ns == mtimes[name], f"{name} recomputed"

    def test_jobs_do_not_change_output(self, corpus, tmp_path):
        self.run_full(corpus, tmp_path / "a", jobs=1)
        self.run_full(corpus, tmp_path / "b", jobs=4)
        for name in ("quality.csv", "perf.csv", "correlation.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_malformed_config_exits_2(self, tmp_path):
        bad = tmp_path / "run.toml"
        bad.write_text('nonsense_key = true\n')
        result = run_cli("run", "--config", str(bad))
        assert result.exit_code == 2

    def test_missing_dirs_config_error(self):
        with pytest.raises(ConfigError):
            RunConfig().validate()

    def test_toml_roundtrip_with_flag_override(self, corpus, tmp_path):
        toml = tmp_path / "run.toml"
        toml.write_text(
            f'ref_dir = "{corpus / "ref"}"\n'
            f'mod_dir = "{corpus / "mod"}"\n'
            f'modification = "jpeg:mixed"\n'
            f'out_dir = "{tmp_path / "out_toml"}"\n'
        )
        config = load_config(toml)
        assert config.modification == "jpeg:mixed"
        result = run_cli("run", "--config", str(toml), "--jobs", "2")
        assert result.exit_code == 1  # no perf inputs -> partial
        assert (tmp_path / "out_toml" / "quality.csv").exists()
