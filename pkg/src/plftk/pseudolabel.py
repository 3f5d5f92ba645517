"""Turn raw teacher detections into training-ready weak labels.

The pipeline keeps every detection at or above the confidence threshold
(inclusive, so a score of exactly 0.40 survives the default 0.4 cut),
optionally suppresses duplicates, and can audit the surviving labels
against human ground truth with the full evaluation protocol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import evaluator, geometry
from .annotations import DatasetManifest, Detection, GroundTruthAnn
from .errors import IntegrityError, RangeError


@dataclass(frozen=True, slots=True)
class FilterConfig:
    """Pseudo-label hygiene knobs; defaults keep raw teacher boxes at τ=0.4."""

    score_threshold: float = 0.4
    nms_iou: float | None = None
    max_per_image: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.score_threshold <= 1.0:
            raise RangeError(f"score_threshold {self.score_threshold} outside [0, 1]")
        if self.nms_iou is not None and not 0.0 < self.nms_iou <= 1.0:
            raise RangeError(f"nms_iou {self.nms_iou} outside (0, 1]")
        if self.max_per_image is not None and self.max_per_image < 1:
            raise RangeError(f"max_per_image must be positive, got {self.max_per_image}")


def filter_by_confidence(dets: Sequence[Detection], cfg: FilterConfig) -> list[Detection]:
    """Keep detections with score >= threshold, preserving input order."""
    return [d for d in dets if d.score >= cfg.score_threshold]


def nms(dets: Sequence[Detection], iou_thresh: float) -> list[Detection]:
    """Greedy non-maximum suppression over one image's detections.

    Detections are visited in descending score order (ties keep input
    order); one survives iff its IoU with every earlier survivor is below
    the threshold. Output preserves input order.
    """
    indexed = sorted(enumerate(dets), key=lambda pair: -pair[1].score)
    kept: list[tuple[int, Detection]] = []
    for idx, det in indexed:
        if all(geometry.iou(det.bbox, survivor.bbox) < iou_thresh for _, survivor in kept):
            kept.append((idx, det))
    return [det for _, det in sorted(kept)]


def apply_filters(dets: Sequence[Detection], cfg: FilterConfig) -> list[Detection]:
    """Full hygiene pass: confidence cut, then optional per-image NMS and cap."""
    survivors = filter_by_confidence(dets, cfg)
    if cfg.nms_iou is None and cfg.max_per_image is None:
        return survivors
    by_image: dict[int, list[int]] = {}
    for idx, det in enumerate(survivors):
        by_image.setdefault(det.image_id, []).append(idx)
    keep: set[int] = set()
    for indices in by_image.values():
        chosen = indices
        if cfg.nms_iou is not None:
            kept: list[int] = []
            for i in sorted(chosen, key=lambda i: -survivors[i].score):
                if all(
                    geometry.iou(survivors[i].bbox, survivors[j].bbox) < cfg.nms_iou for j in kept
                ):
                    kept.append(i)
            chosen = sorted(kept)
        if cfg.max_per_image is not None and len(chosen) > cfg.max_per_image:
            top = sorted(chosen, key=lambda i: -survivors[i].score)[: cfg.max_per_image]
            chosen = sorted(top)
        keep.update(chosen)
    return [det for idx, det in enumerate(survivors) if idx in keep]


def audit_fidelity(
    pseudo: Sequence[Detection],
    gt: Sequence[GroundTruthAnn],
    manifest: DatasetManifest,
    cfg: evaluator.EvalConfig | None = None,
) -> evaluator.EvalResult:
    """Score pseudo-labels as predictions against human ground truth."""
    for det in pseudo:
        if not manifest.has_image(det.image_id):
            raise IntegrityError(f"pseudo-label references unknown image_id {det.image_id}")
    for ann in gt:
        if not manifest.has_image(ann.image_id):
            raise IntegrityError(f"ground truth references unknown image_id {ann.image_id}")
    return evaluator.evaluate(pseudo, gt, manifest, cfg)
