"""Four-stage workflow: pair -> quality -> perf -> correlate.

Each stage writes one artifact and is skipped on rerun when its recorded
input fingerprint still matches, so long runs are interruptible. All
per-pair work is order-independent; results are assembled in manifest
order, so any worker count produces byte-identical outputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import analysis
from .errors import (
    ConfigError,
    ImageTooSmall,
    ZeroVariance,
    ZeroVector,
)
from .manifest import ImagePair, Manifest, pair_by_stem, validate_pair, PairingReport
from .perf import detection as det
from .perf import segmentation as seg
from .quality import (
    cosine_similarity,
    emd,
    entropy,
    entropy_delta,
    load_feature_stack,
    load_lpips_weights,
    lpips,
    luma,
    mse,
    mutual_information,
    ncc,
    pair_frechet,
    pooled_feature_vector,
    psnr,
    ssim,
)

log = logging.getLogger(__name__)

QUALITY_COLUMNS = [
    "pair_id", "modification", "mse", "psnr", "ssim", "ncc", "lpips", "cosine",
    "emd", "mutual_info", "fid", "entropy_delta", "entropy_ref", "entropy_mod",
]
PERF_COLUMNS = [
    "pair_id", "task", "f1", "mean_iou", "mean_iou_matched", "map", "map_small",
    "mean_dice", "mean_pixel_acc", "global_pixel_acc", "valid", "valid_eps",
]

QUALITY_METRIC_NAMES = [
    "mse", "psnr", "ssim", "ncc", "lpips", "cosine", "emd", "mutual_info",
    "fid", "entropy_delta",
]
DET_METRIC_NAMES = ["f1", "mean_iou", "map", "map_small"]
SEG_METRIC_NAMES = ["mean_dice", "mean_iou", "mean_pixel_acc"]


@dataclass
class RunConfig:
    """Pipeline configuration; every field maps to a CLI flag or TOML key."""

    ref_dir: str | None = None
    mod_dir: str | None = None
    modification: str = "other:unspecified"
    manifest: str | None = None
    features_dir: str | None = None
    lpips_weights: str | None = None
    ref_pred: str | None = None
    mod_pred: str | None = None
    ref_masks: str | None = None
    mod_masks: str | None = None
    model_id: str = "model"
    eps: float = 0.0
    method: str = "pearson"
    out_dir: str = "out"
    jobs: int = 1
    plots: bool = False

    def validate(self) -> None:
        if not 0.0 <= self.eps <= 1.0:
            raise ConfigError(f"eps must be in [0, 1], got {self.eps}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.method not in ("pearson", "spearman"):
            raise ConfigError(f"unknown correlation method {self.method!r}")
        if self.manifest is None and (self.ref_dir is None or self.mod_dir is None):
            raise ConfigError("either a manifest or ref/mod directories are required")
        for name in ("ref_dir", "mod_dir", "features_dir", "lpips_weights",
                     "ref_pred", "mod_pred", "ref_masks", "mod_masks"):
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{name} does not exist: {value}")


def load_config(path: str | Path) -> RunConfig:
    import tomli
    try:
        doc = tomli.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    known = {f for f in RunConfig.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return RunConfig(**doc)


# --- stage freshness -------------------------------------------------------

def _fingerprint(paths: list[str | Path], extra: str = "") -> str:
    h = hashlib.sha256()
    h.update(extra.encode())
    for p in sorted(str(p) for p in paths if p is not None):
        path = Path(p)
        h.update(p.encode())
        if path.is_file():
            st = path.stat()
            h.update(f"{st.st_size}:{st.st_mtime_ns}".encode())
        elif path.is_dir():
            for f in sorted(path.rglob("*")):
                if f.is_file():
                    st = f.stat()
                    h.update(f"{f}:{st.st_size}:{st.st_mtime_ns}".encode())
    return h.hexdigest()


def _stage_is_fresh(out_dir: Path, stage: str, digest: str, outputs: list[Path]) -> bool:
    stamp = out_dir / ".stamps" / f"{stage}.json"
    if not stamp.exists() or not all(p.exists() for p in outputs):
        return False
    try:
        return json.loads(stamp.read_text())["digest"] == digest
    except (json.JSONDecodeError, KeyError):
        return False


def _write_stamp(out_dir: Path, stage: str, digest: str) -> None:
    stamp_dir = out_dir / ".stamps"
    stamp_dir.mkdir(parents=True, exist_ok=True)
    (stamp_dir / f"{stage}.json").write_text(json.dumps({"digest": digest}) + "\n")


# --- quality stage ---------------------------------------------------------

def _load_pixels(path: str) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode in ("RGBA", "P"):
            im = im.convert("RGB")
        elif im.mode == "LA":
            im = im.convert("L")
        return np.asarray(im, dtype=np.float64)


def _downsampled_luma_vector(gray: np.ndarray) -> np.ndarray:
    im = Image.fromarray(gray.astype(np.float32), mode="F")
    small = im.resize((32, 32), Image.BOX)
    return np.asarray(small, dtype=np.float64).ravel()


def _find_feature_file(features_dir: str, side: str, pair_id: str) -> Path | None:
    p = Path(features_dir) / side / f"{pair_id}.vfts"
    return p if p.exists() else None


def compute_quality_row(
    pair: ImagePair,
    features_dir: str | None = None,
    lpips_weights_path: str | None = None,
) -> dict:
    """All quality metrics for one pair; unavailable metrics map to None."""
    row: dict = {c: None for c in QUALITY_COLUMNS}
    row["pair_id"] = pair.id
    row["modification"] = pair.modification

    ref = _load_pixels(pair.ref.path)
    mod = _load_pixels(pair.mod.path)
    ref_y = luma(ref)
    mod_y = luma(mod)

    row["mse"] = mse(ref, mod)
    p = psnr(ref, mod)
    row["psnr"] = None if math.isinf(p) else p
    try:
        row["ssim"] = ssim(ref_y, mod_y)
    except ImageTooSmall:
        pass
    try:
        row["ncc"] = ncc(ref_y, mod_y)
    except ZeroVariance:
        pass
    row["emd"] = emd(ref_y, mod_y)
    row["mutual_info"] = mutual_information(ref_y, mod_y)
    row["entropy_ref"] = entropy(ref_y)
    row["entropy_mod"] = entropy(mod_y)
    row["entropy_delta"] = entropy_delta(ref_y, mod_y)

    ref_stack = mod_stack = None
    if features_dir:
        rf = _find_feature_file(features_dir, "ref", pair.id)
        mf = _find_feature_file(features_dir, "mod", pair.id)
        if rf and mf:
            ref_stack = load_feature_stack(rf)
            mod_stack = load_feature_stack(mf)

    if ref_stack is not None and mod_stack is not None:
        if lpips_weights_path:
            weights = load_lpips_weights(lpips_weights_path)
            row["lpips"] = lpips(ref_stack, mod_stack, weights)
        row["fid"] = pair_frechet(ref_stack, mod_stack)
        u = pooled_feature_vector(ref_stack)
        v = pooled_feature_vector(mod_stack)
        cosine_mode = "features"
    else:
        u = _downsampled_luma_vector(ref_y)
        v = _downsampled_luma_vector(mod_y)
        cosine_mode = "luma32"
    try:
        row["cosine"] = cosine_similarity(u, v)
    except ZeroVector:
        pass
    row["_cosine_mode"] = cosine_mode
    return row


def _quality_worker(args) -> dict:
    pair, features_dir, weights_path = args
    return compute_quality_row(pair, features_dir, weights_path)


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def write_quality_csv(rows: list[dict], path: str | Path) -> None:
    lines = [",".join(QUALITY_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row.get(c)) for c in QUALITY_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def quality_stage(
    manifest: Manifest,
    out_path: str | Path,
    features_dir: str | None = None,
    lpips_weights_path: str | None = None,
    jobs: int = 1,
) -> tuple[list[dict], list[str]]:
    """Compute quality vectors for every valid pair, in manifest order.

    Returns (rows, skipped_pair_ids)."""
    usable, skipped = [], []
    for pair in manifest.pairs:
        report = validate_pair(pair)
        if report.ok:
            usable.append(pair)
        else:
            log.warning("skipping pair %s: %s", pair.id, ",".join(report.mismatches))
            skipped.append(pair.id)

    tasks = [(p, features_dir, lpips_weights_path) for p in usable]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_quality_worker, tasks, chunksize=8))
    else:
        rows = [_quality_worker(t) for t in tasks]
    write_quality_csv(rows, out_path)
    meta = {
        "cosine_mode": rows[0]["_cosine_mode"] if rows else None,
        "skipped_pairs": skipped,
    }
    Path(str(out_path) + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return rows, skipped


# --- perf stage ------------------------------------------------------------

def detection_row(
    pair_id: str,
    ref_dets: list[det.Detection],
    mod_dets: list[det.Detection],
    model_id: str,
    eps: float,
) -> dict:
    ref_ps = det.PredictionSet(image_id=pair_id, model_id=model_id, detections=ref_dets)
    mod_ps = det.PredictionSet(image_id=pair_id, model_id=model_id, detections=mod_dets)
    metrics = {
        "f1": det.f1(ref_ps, mod_ps),
        "mean_iou": det.mean_iou_det(ref_ps, mod_ps),
        "map": det.mean_average_precision(ref_ps, mod_ps),
        "map_small": det.map_small(ref_ps, mod_ps),
    }
    row = {c: None for c in PERF_COLUMNS}
    row.update(metrics)
    row["pair_id"] = pair_id
    row["task"] = "detection"
    row["mean_iou_matched"] = det.mean_iou_matched(ref_ps, mod_ps)
    row["valid"] = int(det.is_valid(metrics, eps))
    row["valid_eps"] = eps
    return row


def segmentation_row(pair_id: str, ref_mask, mod_mask, eps: float) -> dict:
    scores = seg.seg_metrics(ref_mask, mod_mask)
    metrics = {
        "mean_dice": scores.mean_dice,
        "mean_iou": scores.mean_iou,
        "mean_pixel_acc": scores.mean_pixel_acc,
    }
    row = {c: None for c in PERF_COLUMNS}
    row.update(metrics)
    row["pair_id"] = pair_id
    row["task"] = "segmentation"
    row["global_pixel_acc"] = scores.global_pixel_acc
    row["valid"] = int(det.is_valid(metrics, eps))
    row["valid_eps"] = eps
    return row


def write_perf_csv(rows: list[dict], path: str | Path) -> None:
    lines = [",".join(PERF_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row.get(c)) for c in PERF_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def perf_stage(
    manifest: Manifest,
    out_path: str | Path,
    ref_pred: str | None = None,
    mod_pred: str | None = None,
    ref_masks: str | None = None,
    mod_masks: str | None = None,
    model_id: str = "model",
    eps: float = 0.0,
) -> list[dict]:
    rows: list[dict] = []
    if ref_pred and mod_pred:
        ref_by_img = det.load_predictions(ref_pred)
        mod_by_img = det.load_predictions(mod_pred)
        for pair in manifest.pairs:
            rows.append(
                detection_row(
                    pair.id,
                    ref_by_img.get(pair.id, []),
                    mod_by_img.get(pair.id, []),
                    model_id,
                    eps,
                )
            )
    if ref_masks and mod_masks:
        for pair in manifest.pairs:
            rp = Path(ref_masks) / f"{pair.id}.png"
            mp = Path(mod_masks) / f"{pair.id}.png"
            if not (rp.exists() and mp.exists()):
                log.warning("missing mask for pair %s", pair.id)
                continue
            rows.append(
                segmentation_row(pair.id, seg.load_class_mask(rp), seg.load_class_mask(mp), eps)
            )
    write_perf_csv(rows, out_path)
    return rows


# --- correlate stage -------------------------------------------------------

def _read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def series_from_quality_csv(path: str | Path) -> tuple[list[analysis.MetricSeries], dict[str, str]]:
    rows = _read_csv(path)
    groups = {r["pair_id"]: r["modification"] for r in rows}
    series = []
    for name in QUALITY_METRIC_NAMES:
        values = [
            (r["pair_id"], float(r[name]))
            for r in rows
            if r.get(name) not in (None, "")
        ]
        if values:
            series.append(analysis.MetricSeries(name=name, values=values))
    return series, groups


def series_from_perf_csv(path: str | Path) -> list[analysis.MetricSeries]:
    rows = _read_csv(path)
    series = []
    for task, prefix, names in (
        ("detection", "det", DET_METRIC_NAMES),
        ("segmentation", "seg", SEG_METRIC_NAMES),
    ):
        task_rows = [r for r in rows if r["task"] == task]
        if not task_rows:
            continue
        for name in names:
            values = [
                (r["pair_id"], float(r[name]))
                for r in task_rows
                if r.get(name) not in (None, "")
            ]
            if values:
                series.append(analysis.MetricSeries(name=f"{prefix}_{name}", values=values))
    return series


def correlate_stage(
    quality_csv: str | Path,
    perf_csv: str | Path,
    out_dir: str | Path,
    method: str = "pearson",
    plots: bool = False,
) -> analysis.CorrelationMatrix:
    quality, groups = series_from_quality_csv(quality_csv)
    perf = series_from_perf_csv(perf_csv)
    corr = analysis.correlation_matrix(quality, perf, method=method)
    stats = []
    for s in quality + perf:
        stats.extend(analysis.boxplot_stats(s, groups))
    analysis.emit_report(corr, stats, out_dir, plots=plots)
    return corr


# --- full pipeline ---------------------------------------------------------

def run_pipeline(config: RunConfig) -> int:
    """Run all stages; returns the process exit code (0 ok, 1 partial)."""
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    partial = False
    run_report: dict = {"stages": {}}

    # stage 1: pair
    manifest_path = out_dir / "manifest.json"
    if config.manifest:
        manifest = Manifest.load(config.manifest)
        manifest_path = Path(config.manifest)
    else:
        digest = _fingerprint([config.ref_dir, config.mod_dir], extra=config.modification)
        if _stage_is_fresh(out_dir, "pair", digest, [manifest_path]):
            log.info("pair stage up to date, skipping")
            manifest = Manifest.load(manifest_path)
        else:
            report = PairingReport()
            manifest = pair_by_stem(
                config.ref_dir, config.mod_dir, config.modification, report=report
            )
            manifest.save(manifest_path)
            _write_stamp(out_dir, "pair", digest)
            if report.unmatched_ref or report.unmatched_mod or report.decode_failures:
                partial = True
                run_report["stages"]["pair"] = {
                    "unmatched_ref": report.unmatched_ref,
                    "unmatched_mod": report.unmatched_mod,
                    "decode_failures": report.decode_failures,
                }

    # stage 2: quality
    quality_csv = out_dir / "quality.csv"
    digest = _fingerprint(
        [manifest_path, config.features_dir, config.lpips_weights]
    )
    if _stage_is_fresh(out_dir, "quality", digest, [quality_csv]):
        log.info("quality stage up to date, skipping")
    else:
        _, skipped = quality_stage(
            manifest,
            quality_csv,
            features_dir=config.features_dir,
            lpips_weights_path=config.lpips_weights,
            jobs=config.jobs,
        )
        _write_stamp(out_dir, "quality", digest)
        if skipped:
            partial = True
            run_report["stages"]["quality"] = {"skipped_pairs": skipped}
    if not config.features_dir:
        partial = True
        run_report["stages"].setdefault("quality", {})["note"] = (
            "no features dir: lpips/fid absent, cosine falls back to luma32"
        )

    # stage 3: perf
    perf_csv = out_dir / "perf.csv"
    have_det = config.ref_pred and config.mod_pred
    have_seg = config.ref_masks and config.mod_masks
    if have_det or have_seg:
        digest = _fingerprint(
            [manifest_path, config.ref_pred, config.mod_pred, config.ref_masks,
             config.mod_masks],
            extra=f"{config.model_id}:{config.eps}",
        )
        if _stage_is_fresh(out_dir, "perf", digest, [perf_csv]):
            log.info("perf stage up to date, skipping")
        else:
            perf_stage(
                manifest,
                perf_csv,
                ref_pred=config.ref_pred,
                mod_pred=config.mod_pred,
                ref_masks=config.ref_masks,
                mod_masks=config.mod_masks,
                model_id=config.model_id,
                eps=config.eps,
            )
            _write_stamp(out_dir, "perf", digest)
    else:
        partial = True
        run_report["stages"]["perf"] = {"note": "no predictions or masks supplied"}

    # stage 4: correlate
    if perf_csv.exists():
        digest = _fingerprint([quality_csv, perf_csv], extra=config.method)
        corr_csv = out_dir / "correlation.csv"
        if _stage_is_fresh(out_dir, "correlate", digest, [corr_csv]):
            log.info("correlate stage up to date, skipping")
        else:
            correlate_stage(
                quality_csv, perf_csv, out_dir, method=config.method, plots=config.plots
            )
            _write_stamp(out_dir, "correlate", digest)

    run_report["exit_code"] = 1 if partial else 0
    (out_dir / "run_report.json").write_text(
        json.dumps(run_report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 1 if partial else 0
