"""Deterministic stand-in backend for plumbing and CI.

Produces plausible, reproducible detections from the image name and size
alone, so the full file pipeline (annotate, filter, train layout, infer,
evaluate) can run without any model runtime or GPU. Scores span both
sides of the usual 0.4 confidence cut.
"""

from __future__ import annotations

import json
import random
import zlib
from pathlib import Path

from .common import PredictedBox

CHECKPOINT_FORMAT = "synthetic-checkpoint"


def detect(stem: str, width: int, height: int, image_id: int) -> list[PredictedBox]:
    """Boxes derived only from (stem, width, height); stable across runs."""
    seed = zlib.crc32(f"{stem}:{width}x{height}".encode())
    rng = random.Random(seed)
    count = 2 + seed % 3
    boxes = []
    for i in range(count):
        w = rng.uniform(0.15, 0.45) * width
        h = rng.uniform(0.15, 0.45) * height
        x = rng.uniform(0.0, width - w)
        y = rng.uniform(0.0, height - h)
        score = max(0.05, min(0.98, 0.95 - 0.3 * i + rng.uniform(-0.05, 0.05)))
        boxes.append(PredictedBox(image_id, x, y, w, h, score))
    return boxes


def write_checkpoint(path: Path, variant: str, image_size: int, names: list[str], epochs: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(
            {
                "format": CHECKPOINT_FORMAT,
                "variant": variant,
                "image_size": image_size,
                "names": names,
                "epochs": epochs,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )


def read_checkpoint(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path} is not a synthetic checkpoint: {exc}") from exc
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path} is not a synthetic checkpoint")
    return doc
