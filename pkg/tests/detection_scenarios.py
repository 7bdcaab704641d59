"""Hand-crafted detection matching scenarios with pinned expected values.

Every expected number was worked out on paper from the matching rules:
greedy assignment in descending score order (ties: larger area, then input
order), 101-point interpolated AP, thresholds 0.50:0.05:0.95, small-object
cutoff 32*32 px, reference confidence filter 0.25.
"""

from valimetrics.perf import Detection, PredictionSet


def _ps(dets, image_id="img", model_id="m"):
    return PredictionSet(image_id=image_id, model_id=model_id, detections=dets)


def d(x0, y0, x1, y1, score=1.0, cls=0):
    return Detection(class_id=cls, bbox=(x0, y0, x1, y1), score=score)


# name -> (ref, mod, expected {f1, mean_iou, map, map_small})
SCENARIOS = {
    "identity_two_boxes": (
        _ps([d(0, 0, 10, 10, 0.9), d(20, 20, 30, 30, 0.8)]),
        _ps([d(0, 0, 10, 10, 0.9), d(20, 20, 30, 30, 0.8)]),
        {"f1": 1.0, "mean_iou": 1.0, "map": 1.0, "map_small": 1.0},
    ),
    "both_empty": (
        _ps([]),
        _ps([]),
        {"f1": 1.0, "mean_iou": 1.0, "map": None, "map_small": None},
    ),
    "all_missed": (
        # one large reference box, nothing detected on the modified image
        _ps([d(0, 0, 100, 100, 0.9)]),
        _ps([]),
        {"f1": 0.0, "mean_iou": 0.0, "map": 0.0, "map_small": None},
    ),
    "hallucination_only": (
        _ps([]),
        _ps([d(0, 0, 10, 10, 0.9)]),
        {"f1": 0.0, "mean_iou": 0.0, "map": None, "map_small": None},
    ),
    "two_thirds_overlap": (
        # IoU = 80/120 = 2/3: matched at 0.50..0.65, missed above
        _ps([d(0, 0, 10, 10, 0.9)]),
        _ps([d(0, 2, 10, 12, 0.9)]),
        {"f1": 1.0, "mean_iou": 2.0 / 3.0, "map": 0.4, "map_small": 0.4},
    ),
    "greedy_score_order": (
        # high-score loose box claims the reference before the tighter one:
        # IoU(A, B') = 75/125 = 0.6, score 0.9; IoU(A, A') = 90/110 ~ 0.818
        _ps([d(0, 0, 10, 10, 1.0)]),
        _ps([
            d(1, 0, 11, 10, 0.5),      # A', IoU 0.818
            d(0, 2.5, 10, 12.5, 0.9),  # B', IoU 0.6
        ]),
        # f1: B' takes A (TP), A' unmatched (FP) -> 2/3
        # AP: t<=0.60 -> 1.0 (3 thresholds), 0.65..0.80 -> 0.5 (4), rest 0
        {"f1": 2.0 / 3.0, "mean_iou": 0.3, "map": 0.5, "map_small": 0.5},
    ),
    "per_class_isolation": (
        # class 0 perfectly reproduced, class 1 replaced by a disjoint box
        _ps([d(0, 0, 10, 10, 1.0, cls=0), d(20, 20, 40, 40, 1.0, cls=1)]),
        _ps([d(0, 0, 10, 10, 0.9, cls=0), d(100, 100, 110, 110, 0.8, cls=1)]),
        {"f1": 0.5, "mean_iou": 0.5, "map": 0.5, "map_small": 0.5},
    ),
    "ap_half_two_predictions": (
        # high-score miss ahead of a perfect hit: PR (0,0) then (0.5,1)
        _ps([d(0, 0, 10, 10, 1.0)]),
        _ps([d(50, 50, 60, 60, 0.9), d(0, 0, 10, 10, 0.8)]),
        {"f1": 2.0 / 3.0, "mean_iou": 0.5, "map": 0.5, "map_small": 0.5},
    ),
    "reference_confidence_filter": (
        # the 0.2-score reference box is below the 0.25 cutoff and vanishes
        # from the pseudo-ground-truth, so its reproduction counts as FP
        _ps([d(0, 0, 10, 10, 0.9), d(20, 0, 30, 10, 0.2)]),
        _ps([d(0, 0, 10, 10, 0.9), d(20, 0, 30, 10, 0.9)]),
        {"f1": 2.0 / 3.0, "mean_iou": 0.5, "map": 1.0, "map_small": 1.0},
    ),
    "small_area_filter": (
        # only the 10x10 box is below 32^2 px; the detection matched to the
        # excluded 100x100 reference is ignored, not a false positive
        _ps([d(0, 0, 10, 10, 1.0), d(50, 50, 150, 150, 1.0)]),
        _ps([d(0, 0, 10, 10, 0.9), d(50, 50, 150, 150, 0.9)]),
        {"f1": 1.0, "mean_iou": 1.0, "map": 1.0, "map_small": 1.0},
    ),
}
