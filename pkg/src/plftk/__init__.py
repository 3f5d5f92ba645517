"""Pseudo-label dataset tooling and COCO-protocol detection evaluation."""

from .annotations import (
    DatasetManifest,
    Detection,
    GroundTruthAnn,
    ImageRecord,
    Phase,
    Split,
    parse_ground_truth,
    parse_manifest,
    parse_predictions,
    read_yolo_labels,
    split_dataset,
    write_ground_truth,
    write_manifest,
    write_predictions,
    write_yolo_labels,
)
from .benchlat import LatencyRecord, LatencySummary, aggregate, read_latency_log, speedup
from .errors import (
    EmptyInputError,
    InsufficientImagesError,
    IntegrityError,
    OutOfImageError,
    ParseError,
    RangeError,
    ToolkitError,
)
from .evaluator import EvalConfig, EvalResult, ap_interpolated, evaluate, match_image
from .geometry import AreaClass, BBox, NormBox, area_class, from_norm, iou, to_norm
from .pseudolabel import FilterConfig, apply_filters, audit_fidelity, filter_by_confidence, nms
from .stratify import GroupAssignment, evaluate_per_group, load_groups

__version__ = "0.1.0"

__all__ = [
    "AreaClass",
    "BBox",
    "DatasetManifest",
    "Detection",
    "EmptyInputError",
    "EvalConfig",
    "EvalResult",
    "FilterConfig",
    "GroundTruthAnn",
    "GroupAssignment",
    "ImageRecord",
    "InsufficientImagesError",
    "IntegrityError",
    "LatencyRecord",
    "LatencySummary",
    "NormBox",
    "OutOfImageError",
    "ParseError",
    "Phase",
    "RangeError",
    "Split",
    "ToolkitError",
    "aggregate",
    "ap_interpolated",
    "apply_filters",
    "area_class",
    "audit_fidelity",
    "evaluate",
    "evaluate_per_group",
    "filter_by_confidence",
    "from_norm",
    "iou",
    "load_groups",
    "match_image",
    "nms",
    "parse_ground_truth",
    "parse_manifest",
    "parse_predictions",
    "read_latency_log",
    "read_yolo_labels",
    "speedup",
    "split_dataset",
    "to_norm",
    "write_ground_truth",
    "write_manifest",
    "write_predictions",
    "write_yolo_labels",
]
