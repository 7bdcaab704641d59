from .detection import (
    COCO_THRESHOLDS,
    Detection,
    MatchResult,
    PredictionSet,
    average_precision,
    f1,
    filter_reference,
    iou,
    is_valid,
    load_predictions,
    map_small,
    match_greedy,
    mean_average_precision,
    mean_iou_det,
    mean_iou_matched,
)
from .segmentation import SegScores, load_class_mask, seg_metrics

__all__ = [
    "COCO_THRESHOLDS",
    "Detection",
    "MatchResult",
    "PredictionSet",
    "SegScores",
    "average_precision",
    "f1",
    "filter_reference",
    "iou",
    "is_valid",
    "load_class_mask",
    "load_predictions",
    "map_small",
    "match_greedy",
    "mean_average_precision",
    "mean_iou_det",
    "mean_iou_matched",
    "seg_metrics",
]
