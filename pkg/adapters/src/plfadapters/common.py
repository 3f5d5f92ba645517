"""Shared plumbing for the adapter scripts.

Adapters talk to the core toolkit only through its file formats:
predictions JSON, latency JSON Lines, YOLO label directories, and the
manifest sidecar. Nothing here links against the core package.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_USAGE = 2


class AdapterError(Exception):
    """Validation or configuration failure; maps to exit code 2."""


class RuntimeUnavailableError(AdapterError):
    """A model runtime is not installed or not usable on this machine."""


@dataclass(frozen=True)
class PredictedBox:
    """One detection in absolute pixels, top-left anchored."""

    image_id: int
    x: float
    y: float
    w: float
    h: float
    score: float
    category_id: int = 1


def list_images(images_dir: str | Path) -> list[Path]:
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise AdapterError(f"image directory not found: {images_dir}")
    return sorted(p for p in images_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def read_manifest_names(path: str | Path) -> dict[str, int]:
    """file_name -> image_id mapping from a core manifest or GT JSON."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        return {img["file_name"]: int(img["id"]) for img in doc["images"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise AdapterError(f"{path}: not a manifest JSON ({exc})") from exc


def read_manifest_splits(path: str | Path) -> dict[str, str]:
    """file_name -> split mapping; images without a split count as train."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return {img["file_name"]: img.get("split", "train") for img in doc["images"]}


def assign_image_ids(images: list[Path], manifest: str | Path | None) -> dict[Path, int | None]:
    """Ids from the manifest when given (unlisted files map to None, to be
    skipped), else sequential ids in sorted-name order."""
    if manifest is None:
        return {path: i + 1 for i, path in enumerate(images)}
    names = read_manifest_names(manifest)
    return {path: names.get(path.name) for path in images}


def write_predictions_json(boxes: list[PredictedBox], path: str | Path) -> None:
    doc = [
        {
            "image_id": b.image_id,
            "bbox": [b.x, b.y, b.w, b.h],
            "score": b.score,
            "category_id": b.category_id,
        }
        for b in boxes
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


class LatencyLogger:
    """Collects per-image timing rows and writes them as JSON Lines."""

    def __init__(self, model_name: str):
        self.model_name = model_name
        self.rows: list[dict] = []

    def add(self, image_id: int | None, forward_ms: float, pipeline_ms: float) -> None:
        # Guard against timer granularity: forward must stay positive and
        # the pipeline must cover it.
        forward_ms = max(forward_ms, 1e-4)
        pipeline_ms = max(pipeline_ms, forward_ms)
        row = {
            "model_name": self.model_name,
            "forward_ms": forward_ms,
            "pipeline_ms": pipeline_ms,
        }
        if image_id is not None:
            row["image_id"] = image_id
        row["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        self.rows.append(row)

    def write(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.rows:
                fh.write(json.dumps(row) + "\n")
