"""Command-line interface for the four-step workflow."""

from __future__ import annotations

import logging
import os
import random
import sys
from pathlib import Path

import click

from . import analysis, modification, pipeline
from .errors import ConfigError, ValimetricsError
from .manifest import Manifest, PairingReport, pair_by_stem

log = logging.getLogger("valimetrics")


def _setup_logging() -> None:
    level = os.environ.get("VALIMETRICS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


@click.group()
@click.option("--seed", type=int, default=None, help="Seed for any sampling in demos.")
def cli(seed):
    _setup_logging()
    if seed is not None:
        random.seed(seed)


@cli.command()
@click.option("--ref", "ref_dir", required=True, type=click.Path(exists=True))
@click.option("--mod", "mod_dir", required=True, type=click.Path(exists=True))
@click.option("--modification", default="other:unspecified", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def pair(ref_dir, mod_dir, modification, out_path):
    """Pair reference and modified directories into a manifest."""
    report = PairingReport()
    manifest = pair_by_stem(ref_dir, mod_dir, modification, report=report)
    manifest.save(out_path)
    click.echo(f"{len(manifest.pairs)} pairs -> {out_path}")
    for name in report.unmatched_ref:
        click.echo(f"unmatched ref: {name}", err=True)
    for name in report.unmatched_mod:
        click.echo(f"unmatched mod: {name}", err=True)


@cli.group()
def modify():
    """Apply image modifications."""


@modify.command()
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--quality", type=int, default=None)
@click.option("--sweep", "sweep_arg", default=None,
              help="Comma-separated qualities, e.g. 90,50,30,15,5.")
@click.option("--stats-out", type=click.Path(), default=None)
def jpeg(in_dir, out_dir, quality, sweep_arg, stats_out):
    """JPEG-encode a directory at one quality, or sweep several."""
    from .manifest import read_image_record

    if sweep_arg:
        qualities = [int(q) for q in sweep_arg.split(",") if q]
        stats = modification.sweep(in_dir, qualities)
        for s in stats:
            click.echo(f"quality={s.quality} n={s.n} "
                       f"factor={s.factor_mean:.2f}±{s.factor_std:.2f}")
        if stats_out:
            modification.write_sweep_csv(stats, stats_out)
        return
    if quality is None or out_dir is None:
        raise click.UsageError("either --sweep or both --quality and --out are required")
    in_dir = Path(in_dir)
    count = 0
    for p in sorted(in_dir.rglob("*")):
        if p.is_file() and p.suffix.lower() in (".png", ".jpg", ".jpeg"):
            rel = p.relative_to(in_dir).with_suffix(".jpg")
            modification.apply_jpeg(read_image_record(p), quality, Path(out_dir) / rel)
            count += 1
    click.echo(f"encoded {count} images at quality {quality} -> {out_dir}")


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--features-dir", type=click.Path(exists=True), default=None)
@click.option("--lpips-weights", type=click.Path(exists=True), default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
def quality(manifest_path, out_path, features_dir, lpips_weights, jobs):
    """Compute the quality vector for every pair in a manifest."""
    manifest = Manifest.load(manifest_path)
    rows, skipped = pipeline.quality_stage(
        manifest, out_path, features_dir=features_dir,
        lpips_weights_path=lpips_weights, jobs=jobs,
    )
    click.echo(f"{len(rows)} quality vectors -> {out_path}")
    if skipped:
        click.echo(f"skipped {len(skipped)} invalid pairs", err=True)
        sys.exit(1)


@cli.group()
def perf():
    """Compute ML performance agreement against reference predictions."""


@perf.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--ref-pred", required=True, type=click.Path(exists=True))
@click.option("--mod-pred", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--model-id", default="model", show_default=True)
@click.option("--eps", type=float, default=0.0, show_default=True)
def det(manifest_path, ref_pred, mod_pred, out_path, model_id, eps):
    """Detection agreement from two predictions JSON files."""
    manifest = Manifest.load(manifest_path)
    rows = pipeline.perf_stage(
        manifest, out_path, ref_pred=ref_pred, mod_pred=mod_pred,
        model_id=model_id, eps=eps,
    )
    click.echo(f"{len(rows)} detection rows -> {out_path}")


@perf.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--ref-masks", required=True, type=click.Path(exists=True))
@click.option("--mod-masks", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--eps", type=float, default=0.0, show_default=True)
def seg(manifest_path, ref_masks, mod_masks, out_path, eps):
    """Segmentation agreement from two mask directories."""
    manifest = Manifest.load(manifest_path)
    rows = pipeline.perf_stage(
        manifest, out_path, ref_masks=ref_masks, mod_masks=mod_masks, eps=eps,
    )
    click.echo(f"{len(rows)} segmentation rows -> {out_path}")


@cli.command()
@click.option("--quality", "quality_csv", required=True, type=click.Path(exists=True))
@click.option("--perf", "perf_csv", required=True, type=click.Path(exists=True))
@click.option("--method", type=click.Choice(["pearson", "spearman"]),
              default="pearson", show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--plots", is_flag=True, default=False)
def correlate(quality_csv, perf_csv, method, out_dir, plots):
    """Correlate quality metrics with performance metrics."""
    corr = pipeline.correlate_stage(quality_csv, perf_csv, out_dir,
                                    method=method, plots=plots)
    click.echo(f"{len(corr.rows)}x{len(corr.cols)} correlation matrix -> {out_dir}")


@cli.command()
@click.option("--quality", "quality_csv", required=True, type=click.Path(exists=True))
@click.option("--perf", "perf_csv", type=click.Path(exists=True), default=None)
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--plots", is_flag=True, default=False)
def report(quality_csv, perf_csv, out_dir, plots):
    """Re-emit box-plot statistics (and correlation tables if perf given)."""
    quality_series, groups = pipeline.series_from_quality_csv(quality_csv)
    stats = []
    corr = None
    series = list(quality_series)
    if perf_csv:
        perf_series = pipeline.series_from_perf_csv(perf_csv)
        corr = analysis.correlation_matrix(quality_series, perf_series)
        series += perf_series
    for s in series:
        stats.extend(analysis.boxplot_stats(s, groups))
    analysis.emit_report(corr, stats, out_dir, plots=plots)
    click.echo(f"report -> {out_dir}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--ref", "ref_dir", type=click.Path(), default=None)
@click.option("--mod", "mod_dir", type=click.Path(), default=None)
@click.option("--modification", default=None)
@click.option("--manifest", "manifest_path", type=click.Path(), default=None)
@click.option("--features-dir", type=click.Path(), default=None)
@click.option("--lpips-weights", type=click.Path(), default=None)
@click.option("--ref-pred", type=click.Path(), default=None)
@click.option("--mod-pred", type=click.Path(), default=None)
@click.option("--ref-masks", type=click.Path(), default=None)
@click.option("--mod-masks", type=click.Path(), default=None)
@click.option("--model-id", default=None)
@click.option("--eps", type=float, default=None)
@click.option("--method", type=click.Choice(["pearson", "spearman"]), default=None)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--plots", is_flag=True, default=None)
def run(config_path, **overrides):
    """Run all four stages; flags override config-file keys."""
    try:
        config = pipeline.load_config(config_path) if config_path else pipeline.RunConfig()
        flag_to_field = {
            "ref_dir": "ref_dir", "mod_dir": "mod_dir", "modification": "modification",
            "manifest_path": "manifest", "features_dir": "features_dir",
            "lpips_weights": "lpips_weights", "ref_pred": "ref_pred",
            "mod_pred": "mod_pred", "ref_masks": "ref_masks", "mod_masks": "mod_masks",
            "model_id": "model_id", "eps": "eps", "method": "method",
            "out_dir": "out_dir", "jobs": "jobs", "plots": "plots",
        }
        for flag, field in flag_to_field.items():
            value = overrides.get(flag)
            if value is not None:
                setattr(config, field, value)
        code = pipeline.run_pipeline(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except ValimetricsError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sys.exit(code)


def main():
    cli(prog_name="valimetrics")


if __name__ == "__main__":
    main()
