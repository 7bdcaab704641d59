"""Detection agreement metrics: reference-image predictions act as ground
truth, so 1.0 means the model behaved identically on the modified image.

Reference detections are confidence-filtered at 0.25 before they become
pseudo-ground-truth; matching is class-aware and greedy in score order with
deterministic tie-breaking (score, then box area, then input order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ModelMismatch

REF_CONFIDENCE_CUTOFF = 0.25
SMALL_AREA = 32 * 32  # COCO small-object convention
COCO_THRESHOLDS = [round(0.50 + 0.05 * i, 2) for i in range(10)]

Box = tuple[float, float, float, float]


@dataclass(frozen=True)
class Detection:
    class_id: int
    bbox: Box  # (x_min, y_min, x_max, y_max)
    score: float

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate box {self.bbox}")

    @property
    def area(self) -> float:
        x0, y0, x1, y1 = self.bbox
        return (x1 - x0) * (y1 - y0)


@dataclass
class PredictionSet:
    image_id: str
    model_id: str
    detections: list[Detection] = field(default_factory=list)


@dataclass
class MatchResult:
    matches: list[tuple[int, int, float]]  # (ref_idx, mod_idx, iou)
    unmatched_ref: list[int]
    unmatched_mod: list[int]


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes."""
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    iw, ih = max(0.0, ix1 - ix0), max(0.0, iy1 - iy0)
    inter = iw * ih
    if inter == 0.0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def filter_reference(ref: PredictionSet, cutoff: float = REF_CONFIDENCE_CUTOFF) -> PredictionSet:
    """Confidence-filter reference detections into pseudo-ground-truth."""
    kept = [d for d in ref.detections if d.score >= cutoff]
    return PredictionSet(image_id=ref.image_id, model_id=ref.model_id, detections=kept)


def _score_order(dets: list[Detection]) -> list[int]:
    # descending score; ties: larger area first, then input order
    return sorted(range(len(dets)), key=lambda i: (-dets[i].score, -dets[i].area, i))


def match_greedy(ref: PredictionSet, mod: PredictionSet, iou_thresh: float) -> MatchResult:
    """Greedily assign modified detections to reference boxes of the same
    class, each detection taking the unmatched reference box of highest IoU
    provided IoU >= iou_thresh."""
    if ref.model_id != mod.model_id:
        raise ModelMismatch(f"{ref.model_id!r} vs {mod.model_id!r}")
    ref = filter_reference(ref)
    taken = [False] * len(ref.detections)
    matches = []
    unmatched_mod = []
    for mi in _score_order(mod.detections):
        det = mod.detections[mi]
        best_ri, best_iou = -1, 0.0
        for ri, gt in enumerate(ref.detections):
            if taken[ri] or gt.class_id != det.class_id:
                continue
            ov = iou(gt.bbox, det.bbox)
            if ov > best_iou:
                best_ri, best_iou = ri, ov
        if best_ri >= 0 and best_iou >= iou_thresh:
            taken[best_ri] = True
            matches.append((best_ri, mi, best_iou))
        else:
            unmatched_mod.append(mi)
    unmatched_ref = [ri for ri, t in enumerate(taken) if not t]
    return MatchResult(matches=matches, unmatched_ref=unmatched_ref, unmatched_mod=unmatched_mod)


def f1(ref: PredictionSet, mod: PredictionSet, iou_thresh: float = 0.5) -> float:
    """F1 over matched/extra/missed detections; empty vs empty is perfect
    agreement (preserved true negatives)."""
    result = match_greedy(ref, mod, iou_thresh)
    tp = len(result.matches)
    fp = len(result.unmatched_mod)
    fn = len(result.unmatched_ref)
    if tp + fp + fn == 0:
        return 1.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


def mean_iou_det(ref: PredictionSet, mod: PredictionSet, iou_thresh: float = 0.5) -> float:
    """Sum of matched IoUs over max(|ref|, |mod|); penalizes both missed
    and hallucinated boxes. Empty vs empty is 1.0."""
    result = match_greedy(ref, mod, iou_thresh)
    n_ref = len(filter_reference(ref).detections)
    n_mod = len(mod.detections)
    denom = max(n_ref, n_mod)
    if denom == 0:
        return 1.0
    return sum(ov for _, _, ov in result.matches) / denom


def mean_iou_matched(ref: PredictionSet, mod: PredictionSet, iou_thresh: float = 0.5) -> float:
    """Mean IoU over matched pairs only (diagnostic companion)."""
    result = match_greedy(ref, mod, iou_thresh)
    n_ref = len(filter_reference(ref).detections)
    n_mod = len(mod.detections)
    if n_ref == 0 and n_mod == 0:
        return 1.0
    if not result.matches:
        return 0.0
    return sum(ov for _, _, ov in result.matches) / len(result.matches)


def _ap_from_flags(flags: list[tuple[float, float, int]], n_ref: int) -> float:
    """101-point interpolated AP from (score, area, tp/fp/ignore) flags.

    flags entries: (score, area, label) with label 1=TP, 0=FP, -1=ignored.
    """
    ordered = sorted(range(len(flags)), key=lambda i: (-flags[i][0], -flags[i][1], i))
    tp = fp = 0
    precisions, recalls = [], []
    for i in ordered:
        label = flags[i][2]
        if label < 0:
            continue
        if label == 1:
            tp += 1
        else:
            fp += 1
        precisions.append(tp / (tp + fp))
        recalls.append(tp / n_ref)
    ap = 0.0
    for k in range(101):
        t = k / 100.0
        best = 0.0
        for p, r in zip(precisions, recalls):
            if r >= t - 1e-12 and p > best:
                best = p
        ap += best
    return ap / 101.0


def _class_ap(
    ref_boxes: list[Detection],
    mod_dets: list[Detection],
    iou_thresh: float,
    small_only: bool,
) -> float | None:
    """AP for one class at one threshold.

    With small_only, only reference boxes under the small-area cutoff count;
    detections matched to larger reference boxes are ignored (not FP).
    """
    eligible = [d.area < SMALL_AREA for d in ref_boxes] if small_only \
        else [True] * len(ref_boxes)
    n_ref = sum(eligible)
    if n_ref == 0:
        return None
    taken = [False] * len(ref_boxes)
    flags: list[tuple[float, float, int]] = []
    for mi in _score_order(mod_dets):
        det = mod_dets[mi]
        best_ri, best_iou = -1, 0.0
        for ri, gt in enumerate(ref_boxes):
            if taken[ri]:
                continue
            ov = iou(gt.bbox, det.bbox)
            if ov > best_iou:
                best_ri, best_iou = ri, ov
        if best_ri >= 0 and best_iou >= iou_thresh:
            taken[best_ri] = True
            flags.append((det.score, det.area, 1 if eligible[best_ri] else -1))
        else:
            flags.append((det.score, det.area, 0))
    return _ap_from_flags(flags, n_ref)


def average_precision(
    ref: PredictionSet,
    mod: PredictionSet,
    iou_thresh: float,
    small_only: bool = False,
) -> float | None:
    """Mean AP over classes present in the (filtered) reference set at one
    IoU threshold. None when no eligible reference boxes exist."""
    if ref.model_id != mod.model_id:
        raise ModelMismatch(f"{ref.model_id!r} vs {mod.model_id!r}")
    ref = filter_reference(ref)
    classes = sorted({d.class_id for d in ref.detections})
    aps = []
    for c in classes:
        ref_c = [d for d in ref.detections if d.class_id == c]
        mod_c = [d for d in mod.detections if d.class_id == c]
        ap = _class_ap(ref_c, mod_c, iou_thresh, small_only)
        if ap is not None:
            aps.append(ap)
    if not aps:
        return None
    return sum(aps) / len(aps)


def mean_average_precision(ref: PredictionSet, mod: PredictionSet) -> float | None:
    """COCO-style mAP over IoU thresholds 0.50:0.05:0.95."""
    aps = [average_precision(ref, mod, t) for t in COCO_THRESHOLDS]
    aps = [a for a in aps if a is not None]
    if not aps:
        return None
    return sum(aps) / len(aps)


def map_small(ref: PredictionSet, mod: PredictionSet) -> float | None:
    """mAP restricted to reference boxes smaller than 32x32 px; None when
    the reference contains no small boxes."""
    aps = [average_precision(ref, mod, t, small_only=True) for t in COCO_THRESHOLDS]
    aps = [a for a in aps if a is not None]
    if not aps:
        return None
    return sum(aps) / len(aps)


def is_valid(metrics: dict[str, float | None], eps: float) -> bool:
    """Validity predicate: every computed agreement metric within eps of 1."""
    return all(v >= 1.0 - eps for v in metrics.values() if v is not None)


def load_predictions(path: str | Path) -> dict[str, list[Detection]]:
    """Read a predictions JSON file, grouping detections by image_id.

    Format: array of {image_id, class_id, bbox: [x0, y0, x1, y1], score}.
    """
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    grouped: dict[str, list[Detection]] = {}
    for e in entries:
        det = Detection(
            class_id=int(e["class_id"]),
            bbox=tuple(float(v) for v in e["bbox"]),
            score=float(e["score"]),
        )
        grouped.setdefault(str(e["image_id"]), []).append(det)
    return grouped
