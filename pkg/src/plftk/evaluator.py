"""COCO-protocol detection evaluation.

Produces the standard metric suite — mAP averaged over IoU thresholds
0.50:0.05:0.95, AP50, AP75, and area-restricted AP for medium and large
objects — from scratch, with the reference matching semantics:

* detections are processed in descending score order (ties keep input
  order) and greedily matched to the unmatched ground truth with the
  highest IoU at or above the threshold, preferring non-ignored GT;
* ground truth outside the active area range is ignored: it is not a
  missable object, and detections matched to it drop out of the curve;
* unmatched detections whose own area falls outside the range are also
  ignored rather than counted as false positives;
* precision/recall curves are pooled globally across images (never
  averaged per image) before interpolation.

APs are reported as percentages; strata with no ground truth report an
absent value rather than zero. All reductions use exactly-rounded
summation so results are independent of accumulation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotations import DatasetManifest, Detection, GroundTruthAnn
from .errors import IntegrityError

DEFAULT_IOU_THRESHOLDS: tuple[float, ...] = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
DEFAULT_AREA_RANGES: dict[str, tuple[float, float]] = {
    "all": (0.0, math.inf),
    "medium": (32.0**2, 96.0**2),
    "large": (96.0**2, math.inf),
}


@dataclass(frozen=True)
class EvalConfig:
    """Evaluation protocol parameters.

    Area ranges are half-open ``[lo, hi)`` in pixels squared and must
    include an ``"all"`` range, which drives mAP/AP50/AP75; every other
    named range yields an area-restricted AP.
    """

    iou_thresholds: tuple[float, ...] = DEFAULT_IOU_THRESHOLDS
    recall_points: int = 101
    area_ranges: Mapping[str, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_AREA_RANGES)
    )
    max_dets: int = 100

    def __post_init__(self) -> None:
        ts = tuple(self.iou_thresholds)
        if not ts:
            raise ValueError("iou_thresholds must be non-empty")
        if any(not 0.0 < t <= 1.0 for t in ts):
            raise ValueError(f"iou thresholds must lie in (0, 1], got {ts}")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"iou thresholds must be strictly increasing, got {ts}")
        if self.recall_points < 2:
            raise ValueError(f"recall_points must be at least 2, got {self.recall_points}")
        if self.max_dets < 1:
            raise ValueError(f"max_dets must be positive, got {self.max_dets}")
        if "all" not in self.area_ranges:
            raise ValueError("area_ranges must include an 'all' range")
        object.__setattr__(self, "iou_thresholds", ts)
        object.__setattr__(self, "area_ranges", dict(self.area_ranges))


@dataclass(frozen=True, slots=True)
class Counts:
    num_images: int
    num_gt: int
    num_dets: int


@dataclass(frozen=True, slots=True)
class DetMatch:
    """Matching outcome for one detection, in descending-score order."""

    score: float
    matched: bool
    iou: float | None
    ignored: bool


@dataclass(frozen=True, slots=True)
class GtMatch:
    """Matching outcome for one ground truth box, in input order."""

    matched: bool
    ignored: bool


@dataclass(frozen=True, slots=True)
class MatchOutcome:
    detections: tuple[DetMatch, ...]
    ground_truths: tuple[GtMatch, ...]


@dataclass(frozen=True)
class EvalResult:
    """Metric suite in percent; absent strata hold None, not zero."""

    map: float | None
    ap50: float | None
    ap75: float | None
    ap_medium: float | None
    ap_large: float | None
    per_threshold: tuple[tuple[float, float | None], ...]
    counts: Counts
    empty_ground_truth: bool = False
    ap_by_area: Mapping[str, float | None] = field(default_factory=dict)


def _iou_matrix(det_boxes: np.ndarray, gt_boxes: np.ndarray) -> np.ndarray:
    """Pairwise IoU between (D, 4) and (G, 4) arrays of [x, y, w, h]."""
    if det_boxes.size == 0 or gt_boxes.size == 0:
        return np.zeros((len(det_boxes), len(gt_boxes)))
    dx0, dy0 = det_boxes[:, 0:1], det_boxes[:, 1:2]
    dx1, dy1 = dx0 + det_boxes[:, 2:3], dy0 + det_boxes[:, 3:4]
    gx0, gy0 = gt_boxes[:, 0], gt_boxes[:, 1]
    gx1, gy1 = gx0 + gt_boxes[:, 2], gy0 + gt_boxes[:, 3]
    iw = np.minimum(dx1, gx1) - np.maximum(dx0, gx0)
    ih = np.minimum(dy1, gy1) - np.maximum(dy0, gy0)
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    # Corner-derived areas keep every ratio inside [0, 1] exactly.
    d_area = (dx1 - dx0) * (dy1 - dy0)
    g_area = (gx1 - gx0) * (gy1 - gy0)
    return inter / (d_area + g_area - inter)


def _in_range(area: float, area_range: tuple[float, float]) -> bool:
    lo, hi = area_range
    return lo <= area < hi


def _greedy_match(
    ious: np.ndarray,
    det_areas: Sequence[float],
    gt_areas: Sequence[float],
    iou_thresh: float,
    area_range: tuple[float, float],
) -> tuple[list[bool], list[bool], list[float | None], list[bool], list[bool]]:
    """Match score-sorted detections against one image's ground truth.

    Returns (det_tp, det_ignored, det_match_iou, gt_matched, gt_ignored)
    with GT entries in input order.
    """
    n_det, n_gt = ious.shape if ious.size else (len(det_areas), len(gt_areas))
    gt_ignored = [not _in_range(a, area_range) for a in gt_areas]
    # Non-ignored GT first; stable so input order breaks ties.
    order = sorted(range(n_gt), key=lambda g: gt_ignored[g])
    gt_matched = [False] * n_gt
    det_tp = [False] * n_det
    det_ignored = [False] * n_det
    det_iou: list[float | None] = [None] * n_det
    # Threshold guard mirrors the reference implementation: an IoU equal
    # to the threshold matches, and a threshold of 1.0 keeps headroom for
    # round-off on identical boxes.
    floor = min(iou_thresh, 1.0 - 1e-10)
    for d in range(n_det):
        best = -1
        best_iou = floor
        for g in order:
            if gt_matched[g]:
                continue
            if best > -1 and not gt_ignored[best] and gt_ignored[g]:
                break
            v = float(ious[d, g])
            if v < best_iou:
                continue
            best_iou = v
            best = g
        if best == -1:
            det_ignored[d] = not _in_range(det_areas[d], area_range)
            continue
        gt_matched[best] = True
        det_tp[d] = not gt_ignored[best]
        det_ignored[d] = gt_ignored[best]
        det_iou[d] = best_iou
    return det_tp, det_ignored, det_iou, gt_matched, gt_ignored


def _sorted_truncated(dets: Sequence[Detection], max_dets: int | None) -> list[Detection]:
    ordered = sorted(dets, key=lambda d: -d.score)  # stable: ties keep input order
    if max_dets is not None:
        ordered = ordered[:max_dets]
    return ordered


def match_image(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthAnn],
    iou_thresh: float,
    area_range: tuple[float, float] = (0.0, math.inf),
    max_dets: int | None = 100,
) -> MatchOutcome:
    """Greedy per-image matching for a single category at one threshold.

    Detections beyond ``max_dets`` (by score) are dropped before matching.
    """
    ordered = _sorted_truncated(dets, max_dets)
    det_boxes = np.array([[d.bbox.x_min, d.bbox.y_min, d.bbox.width, d.bbox.height] for d in ordered])
    gt_boxes = np.array([[g.bbox.x_min, g.bbox.y_min, g.bbox.width, g.bbox.height] for g in gts])
    ious = _iou_matrix(det_boxes.reshape(-1, 4), gt_boxes.reshape(-1, 4))
    det_tp, det_ignored, det_iou, gt_matched, gt_ignored = _greedy_match(
        ious,
        [d.bbox.area for d in ordered],
        [g.bbox.area for g in gts],
        iou_thresh,
        area_range,
    )
    return MatchOutcome(
        detections=tuple(
            DetMatch(score=d.score, matched=mi is not None, iou=mi, ignored=ig)
            for d, mi, ig in zip(ordered, det_iou, det_ignored)
        ),
        ground_truths=tuple(GtMatch(matched=m, ignored=i) for m, i in zip(gt_matched, gt_ignored)),
    )


def ap_interpolated(curve: Iterable[tuple[float, float]], recall_points: int = 101) -> float:
    """Interpolated average precision over an evenly spaced recall grid.

    For each grid recall r the contribution is the maximum precision among
    curve points whose recall is at least r (zero when no point reaches r);
    AP is the mean of those contributions. The curve need not be sorted.
    """
    pts = sorted(curve, key=lambda rp: rp[0])
    grid = [i / (recall_points - 1) for i in range(recall_points)]
    if not pts:
        return 0.0
    recalls = np.array([r for r, _ in pts])
    precisions = np.array([p for _, p in pts])
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    idx = np.searchsorted(recalls, np.array(grid), side="left")
    vals = [float(envelope[i]) if i < len(pts) else 0.0 for i in idx]
    return math.fsum(vals) / recall_points


def _check_integrity(dets: Sequence[Detection], gts: Sequence[GroundTruthAnn], manifest: DatasetManifest) -> None:
    for d in dets:
        if not manifest.has_image(d.image_id):
            raise IntegrityError(f"detection references unknown image_id {d.image_id}")
    for g in gts:
        if not manifest.has_image(g.image_id):
            raise IntegrityError(f"ground truth references unknown image_id {g.image_id}")


def evaluate(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthAnn],
    manifest: DatasetManifest,
    cfg: EvalConfig | None = None,
) -> EvalResult:
    """Evaluate detections against ground truth over a whole manifest.

    AP is computed per category (categories with no ground truth are
    skipped) and averaged; match outcomes are pooled across all images
    before curve construction. Deterministic for fixed inputs.
    """
    cfg = cfg or EvalConfig()
    _check_integrity(dets, gts, manifest)
    counts = Counts(num_images=len(manifest), num_gt=len(gts), num_dets=len(dets))
    thresholds = cfg.iou_thresholds

    if not gts:
        return EvalResult(
            map=None,
            ap50=None,
            ap75=None,
            ap_medium=None,
            ap_large=None,
            per_threshold=tuple((t, None) for t in thresholds),
            counts=counts,
            empty_ground_truth=True,
            ap_by_area={name: None for name in cfg.area_ranges if name != "all"},
        )

    categories = sorted({g.category_id for g in gts})
    image_ids = sorted(manifest.image_ids)

    # Pre-sort detections and compute IoU matrices once per (image, category).
    cells: dict[tuple[int, int], tuple[list[Detection], list[GroundTruthAnn], np.ndarray]] = {}
    dets_by_cell: dict[tuple[int, int], list[Detection]] = {}
    gts_by_cell: dict[tuple[int, int], list[GroundTruthAnn]] = {}
    for d in dets:
        dets_by_cell.setdefault((d.image_id, d.category_id), []).append(d)
    for g in gts:
        gts_by_cell.setdefault((g.image_id, g.category_id), []).append(g)
    for image_id in image_ids:
        for cat in categories:
            key = (image_id, cat)
            cell_dets = _sorted_truncated(dets_by_cell.get(key, []), cfg.max_dets)
            cell_gts = gts_by_cell.get(key, [])
            if not cell_dets and not cell_gts:
                continue
            det_boxes = np.array(
                [[d.bbox.x_min, d.bbox.y_min, d.bbox.width, d.bbox.height] for d in cell_dets]
            ).reshape(-1, 4)
            gt_boxes = np.array(
                [[g.bbox.x_min, g.bbox.y_min, g.bbox.width, g.bbox.height] for g in cell_gts]
            ).reshape(-1, 4)
            cells[key] = (cell_dets, cell_gts, _iou_matrix(det_boxes, gt_boxes))

    # AP fraction per (area range, threshold, category); None when the
    # category has no ground truth inside the range.
    ap_cells: dict[str, list[list[float | None]]] = {}
    for name, area_range in cfg.area_ranges.items():
        per_thresh: list[list[float | None]] = []
        for t in thresholds:
            per_cat: list[float | None] = []
            for cat in categories:
                scores: list[float] = []
                tp_flags: list[bool] = []
                ignored_flags: list[bool] = []
                npig = 0
                for image_id in image_ids:
                    cell = cells.get((image_id, cat))
                    if cell is None:
                        continue
                    cell_dets, cell_gts, ious = cell
                    det_tp, det_ignored, _, _, gt_ignored = _greedy_match(
                        ious,
                        [d.bbox.area for d in cell_dets],
                        [g.bbox.area for g in cell_gts],
                        t,
                        area_range,
                    )
                    scores.extend(d.score for d in cell_dets)
                    tp_flags.extend(det_tp)
                    ignored_flags.extend(det_ignored)
                    npig += sum(1 for ig in gt_ignored if not ig)
                if npig == 0:
                    per_cat.append(None)
                    continue
                order = np.argsort(-np.array(scores), kind="stable") if scores else np.array([], dtype=int)
                tps = 0
                fps = 0
                curve: list[tuple[float, float]] = []
                for i in order:
                    if ignored_flags[i]:
                        continue
                    if tp_flags[i]:
                        tps += 1
                    else:
                        fps += 1
                    curve.append((tps / npig, tps / (tps + fps)))
                per_cat.append(ap_interpolated(curve, cfg.recall_points))
            per_thresh.append(per_cat)
        ap_cells[name] = per_thresh

    def metric(name: str) -> tuple[list[float | None], float | None]:
        """Per-threshold percentages and their mean for one area range."""
        fractions: list[float | None] = []
        for cat_aps in ap_cells[name]:
            present = [a for a in cat_aps if a is not None]
            fractions.append(math.fsum(present) / len(present) if present else None)
        per_t = [None if f is None else f * 100.0 for f in fractions]
        if any(f is None for f in fractions):
            return per_t, None
        return per_t, (math.fsum(fractions) / len(fractions)) * 100.0

    all_per_t, map_pct = metric("all")
    per_threshold = tuple(zip(thresholds, all_per_t))

    def at_threshold(target: float) -> float | None:
        for t, v in per_threshold:
            if math.isclose(t, target, abs_tol=1e-9):
                return v
        return None

    ap_by_area: dict[str, float | None] = {}
    for name in cfg.area_ranges:
        if name == "all":
            continue
        _, ap_by_area[name] = metric(name)

    return EvalResult(
        map=map_pct,
        ap50=at_threshold(0.50),
        ap75=at_threshold(0.75),
        ap_medium=ap_by_area.get("medium"),
        ap_large=ap_by_area.get("large"),
        per_threshold=per_threshold,
        counts=counts,
        empty_ground_truth=False,
        ap_by_area=ap_by_area,
    )


HEADLINE_COLUMNS = ("mAP", "AP50", "AP75", "AP_M", "AP_L")


def _fmt_ap(value: float | None) -> str:
    return "-" if value is None else f"{value:.1f}"


def headline_values(result: EvalResult) -> tuple[float | None, ...]:
    return (result.map, result.ap50, result.ap75, result.ap_medium, result.ap_large)


def render_result_table(result: EvalResult) -> str:
    """Aligned plain-text table in the standard column order."""
    header = "".join(f"{c:>8}" for c in HEADLINE_COLUMNS)
    row = "".join(f"{_fmt_ap(v):>8}" for v in headline_values(result))
    return f"{header}\n{row}\n"


def result_to_json_dict(result: EvalResult) -> dict:
    out = {
        "map": result.map,
        "ap50": result.ap50,
        "ap75": result.ap75,
        "ap_medium": result.ap_medium,
        "ap_large": result.ap_large,
        "per_threshold": [{"iou": t, "ap": v} for t, v in result.per_threshold],
        "counts": {
            "num_images": result.counts.num_images,
            "num_gt": result.counts.num_gt,
            "num_dets": result.counts.num_dets,
        },
        "empty_ground_truth": result.empty_ground_truth,
    }
    extra = {k: v for k, v in result.ap_by_area.items() if k not in ("medium", "large")}
    if extra:
        out["ap_extra"] = extra
    return out
