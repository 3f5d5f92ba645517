"""Dataset artifact I/O: ground-truth and prediction JSON, YOLO label
directories, manifest sidecars, and train/val/test split management.

File schemas
------------
Ground truth JSON: ``{"images": [{id, file_name, width, height, ...}],
"annotations": [{id, image_id, bbox: [x, y, w, h], category_id}],
"categories": [{id, name}]}``. Image entries may additionally carry
``split``, ``group`` and ``phase``; the manifest sidecar is the same
``images``/``categories`` document without annotations.

Predictions JSON: array of ``{image_id, bbox: [x, y, w, h], score,
category_id}``.

YOLO label line: ``class cx cy w h``, space separated, six decimal
places, one file per image named after the image file stem.

Boxes are clamped to their image at parse time; a box left with zero
area is a parse failure.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import geometry
from .errors import (
    InsufficientImagesError,
    IntegrityError,
    OutOfImageError,
    ParseError,
    RangeError,
)
from .geometry import BBox


class Split(enum.Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class Phase(enum.Enum):
    GESTATION = "gestation"
    FARROWING = "farrowing"
    NURSERY = "nursery"
    ESTRUS = "estrus"
    GROWTH = "growth"


NUM_GROUPS = 8


@dataclass(frozen=True, slots=True)
class ImageRecord:
    """One corpus image: identity, file location, size, and corpus role."""

    image_id: int
    file_name: str
    width: int
    height: int
    split: Split = Split.TRAIN
    group: int | None = None
    phase: Phase | None = None

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image {self.image_id}: size must be positive, got {self.width}x{self.height}")
        if self.group is not None and not 1 <= self.group <= NUM_GROUPS:
            raise ValueError(f"image {self.image_id}: group must be in 1..{NUM_GROUPS}, got {self.group}")


@dataclass(frozen=True, slots=True)
class GroundTruthAnn:
    """A human- or teacher-annotated reference box."""

    ann_id: int
    image_id: int
    bbox: BBox
    category_id: int


@dataclass(frozen=True, slots=True)
class Detection:
    """A scored predicted box."""

    image_id: int
    bbox: BBox
    score: float
    category_id: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise RangeError(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class DatasetManifest:
    """Immutable image corpus description: records plus category table."""

    images: tuple[ImageRecord, ...]
    categories: tuple[tuple[int, str], ...]
    _by_id: dict[int, ImageRecord] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[int, ImageRecord] = {}
        for img in self.images:
            if img.image_id in by_id:
                raise IntegrityError(f"duplicate image_id {img.image_id} in manifest")
            by_id[img.image_id] = img
        cat_ids = [cid for cid, _ in self.categories]
        if len(set(cat_ids)) != len(cat_ids):
            raise IntegrityError("duplicate category ids in manifest")
        object.__setattr__(self, "_by_id", by_id)

    def __len__(self) -> int:
        return len(self.images)

    def has_image(self, image_id: int) -> bool:
        return image_id in self._by_id

    def image(self, image_id: int) -> ImageRecord:
        try:
            return self._by_id[image_id]
        except KeyError:
            raise IntegrityError(f"unknown image_id {image_id}") from None

    @property
    def image_ids(self) -> tuple[int, ...]:
        return tuple(img.image_id for img in self.images)

    def images_in(self, split: Split) -> tuple[ImageRecord, ...]:
        return tuple(img for img in self.images if img.split is split)

    def split_counts(self) -> dict[Split, int]:
        counts = {s: 0 for s in Split}
        for img in self.images:
            counts[img.split] += 1
        return counts

    def class_index(self, category_id: int) -> int:
        """Zero-based YOLO class index for a category id (sorted-id order)."""
        ordered = sorted(cid for cid, _ in self.categories)
        try:
            return ordered.index(category_id)
        except ValueError:
            raise IntegrityError(f"unknown category_id {category_id}") from None

    def category_for_class(self, class_index: int) -> int:
        ordered = sorted(cid for cid, _ in self.categories)
        if not 0 <= class_index < len(ordered):
            raise IntegrityError(f"class index {class_index} outside category table of size {len(ordered)}")
        return ordered[class_index]

    def restricted_to(self, image_ids: Iterable[int]) -> "DatasetManifest":
        """Sub-manifest containing only the given images, order preserved."""
        wanted = set(image_ids)
        for image_id in wanted:
            if image_id not in self._by_id:
                raise IntegrityError(f"unknown image_id {image_id}")
        return DatasetManifest(
            images=tuple(img for img in self.images if img.image_id in wanted),
            categories=self.categories,
        )


def _load_json(path: str | Path):
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc


def _require(obj: dict, key: str, context: str, path: Path):
    if key not in obj:
        raise ParseError(f"{context}: missing field '{key}'", path=str(path))
    return obj[key]


def _parse_image_entry(entry: dict, index: int, path: Path) -> ImageRecord:
    ctx = f"images[{index}]"
    try:
        split = Split(entry.get("split", "train"))
    except ValueError:
        raise ParseError(f"{ctx}: unknown split '{entry['split']}'", path=str(path)) from None
    phase_raw = entry.get("phase")
    try:
        phase = Phase(phase_raw) if phase_raw is not None else None
    except ValueError:
        raise ParseError(f"{ctx}: unknown phase '{phase_raw}'", path=str(path)) from None
    try:
        return ImageRecord(
            image_id=int(_require(entry, "id", ctx, path)),
            file_name=str(_require(entry, "file_name", ctx, path)),
            width=int(_require(entry, "width", ctx, path)),
            height=int(_require(entry, "height", ctx, path)),
            split=split,
            group=int(entry["group"]) if entry.get("group") is not None else None,
            phase=phase,
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{ctx}: {exc}", path=str(path)) from exc


def _parse_manifest_doc(data: dict, path: Path) -> DatasetManifest:
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object at top level", path=str(path))
    images_raw = _require(data, "images", "top level", path)
    categories_raw = data.get("categories", [])
    images = tuple(_parse_image_entry(e, i, path) for i, e in enumerate(images_raw))
    try:
        categories = tuple((int(c["id"]), str(c["name"])) for c in categories_raw)
    except (TypeError, KeyError, ValueError) as exc:
        raise ParseError(f"categories: {exc}", path=str(path)) from exc
    return DatasetManifest(images=images, categories=categories)


def _parse_bbox(raw, ctx: str, img: ImageRecord, path: Path) -> BBox:
    if not (isinstance(raw, (list, tuple)) and len(raw) == 4):
        raise ParseError(f"{ctx}: bbox must be [x, y, w, h]", path=str(path))
    try:
        x, y, w, h = (float(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{ctx}: bbox values must be numeric", path=str(path)) from exc
    try:
        return geometry.clamp_to_image(x, y, w, h, img.width, img.height)
    except (ValueError, OutOfImageError) as exc:
        raise ParseError(f"{ctx}: {exc}", path=str(path)) from exc


def parse_manifest(path: str | Path) -> DatasetManifest:
    """Read a manifest sidecar (images + categories, no annotations)."""
    return _parse_manifest_doc(_load_json(path), Path(path))


def parse_ground_truth(path: str | Path) -> tuple[DatasetManifest, list[GroundTruthAnn]]:
    """Read COCO-style ground truth into a manifest and annotation list."""
    path = Path(path)
    data = _load_json(path)
    manifest = _parse_manifest_doc(data, path)
    anns: list[GroundTruthAnn] = []
    seen_ids: set[int] = set()
    for i, entry in enumerate(data.get("annotations", [])):
        ctx = f"annotations[{i}]"
        try:
            ann_id = int(_require(entry, "id", ctx, path))
            image_id = int(_require(entry, "image_id", ctx, path))
            category_id = int(_require(entry, "category_id", ctx, path))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{ctx}: {exc}", path=str(path)) from exc
        if ann_id in seen_ids:
            raise IntegrityError(f"duplicate annotation id {ann_id}")
        seen_ids.add(ann_id)
        if not manifest.has_image(image_id):
            raise IntegrityError(f"{ctx} (id {ann_id}) references unknown image_id {image_id}")
        bbox = _parse_bbox(entry.get("bbox"), f"{ctx} (id {ann_id})", manifest.image(image_id), path)
        anns.append(GroundTruthAnn(ann_id=ann_id, image_id=image_id, bbox=bbox, category_id=category_id))
    return manifest, anns


def parse_predictions(path: str | Path, manifest: DatasetManifest | None = None) -> list[Detection]:
    """Read a predictions array, preserving input order.

    With a manifest, image references are checked and boxes are clamped to
    their image; without one only left/top clamping at zero is possible.
    """
    path = Path(path)
    data = _load_json(path)
    if not isinstance(data, list):
        raise ParseError("expected a JSON array of predictions", path=str(path))
    dets: list[Detection] = []
    for i, entry in enumerate(data):
        ctx = f"predictions[{i}]"
        try:
            image_id = int(_require(entry, "image_id", ctx, path))
            category_id = int(_require(entry, "category_id", ctx, path))
            score = float(_require(entry, "score", ctx, path))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{ctx}: {exc}", path=str(path)) from exc
        if not 0.0 <= score <= 1.0:
            raise RangeError(f"{ctx}: score {score} outside [0, 1]")
        if manifest is not None:
            if not manifest.has_image(image_id):
                raise IntegrityError(f"{ctx} references unknown image_id {image_id}")
            bbox = _parse_bbox(entry.get("bbox"), ctx, manifest.image(image_id), path)
        else:
            raw = entry.get("bbox")
            if not (isinstance(raw, (list, tuple)) and len(raw) == 4):
                raise ParseError(f"{ctx}: bbox must be [x, y, w, h]", path=str(path))
            x, y, w, h = (float(v) for v in raw)
            # No image size available: clamp at the zero edges only.
            try:
                x0, y0 = max(0.0, x), max(0.0, y)
                bbox = BBox(x0, y0, w - (x0 - x), h - (y0 - y))
            except ValueError as exc:
                raise ParseError(f"{ctx}: {exc}", path=str(path)) from exc
        dets.append(Detection(image_id=image_id, bbox=bbox, score=score, category_id=category_id))
    return dets


def _image_to_json(img: ImageRecord) -> dict:
    out: dict = {
        "id": img.image_id,
        "file_name": img.file_name,
        "width": img.width,
        "height": img.height,
        "split": img.split.value,
    }
    if img.group is not None:
        out["group"] = img.group
    if img.phase is not None:
        out["phase"] = img.phase.value
    return out


def _dump_json(doc, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    _dump_json(manifest_to_json(manifest), path)


def manifest_to_json(manifest: DatasetManifest) -> dict:
    return {
        "images": [_image_to_json(img) for img in manifest.images],
        "categories": [{"id": cid, "name": name} for cid, name in manifest.categories],
    }


def write_ground_truth(manifest: DatasetManifest, anns: Sequence[GroundTruthAnn], path: str | Path) -> None:
    doc = manifest_to_json(manifest)
    doc["annotations"] = [
        {
            "id": a.ann_id,
            "image_id": a.image_id,
            "bbox": [a.bbox.x_min, a.bbox.y_min, a.bbox.width, a.bbox.height],
            "category_id": a.category_id,
        }
        for a in anns
    ]
    _dump_json(doc, path)


def write_predictions(dets: Sequence[Detection], path: str | Path) -> None:
    doc = [
        {
            "image_id": d.image_id,
            "bbox": [d.bbox.x_min, d.bbox.y_min, d.bbox.width, d.bbox.height],
            "score": d.score,
            "category_id": d.category_id,
        }
        for d in dets
    ]
    _dump_json(doc, path)


def write_yolo_labels(
    items: Iterable[Detection | GroundTruthAnn],
    manifest: DatasetManifest,
    out_dir: str | Path,
    split: Split | None = None,
) -> int:
    """Write one label file per manifest image (optionally one split only).

    Images without boxes get an empty file so downstream trainers see an
    explicit negative rather than a missing file. Returns the number of
    files written. Items referencing images outside the targeted split are
    skipped; unknown image ids are an integrity failure.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    targeted = manifest.images if split is None else manifest.images_in(split)
    targeted_ids = {img.image_id for img in targeted}
    by_image: dict[int, list[Detection | GroundTruthAnn]] = {img.image_id: [] for img in targeted}
    for item in items:
        if not manifest.has_image(item.image_id):
            raise IntegrityError(f"box references unknown image_id {item.image_id}")
        if item.image_id in targeted_ids:
            by_image[item.image_id].append(item)
    written = 0
    for img in targeted:
        lines = []
        for item in by_image[img.image_id]:
            n = geometry.to_norm(item.bbox, manifest.class_index(item.category_id), img.width, img.height)
            lines.append(f"{n.class_id} {n.cx:.6f} {n.cy:.6f} {n.w:.6f} {n.h:.6f}\n")
        target = out_dir / f"{Path(img.file_name).stem}.txt"
        with open(target, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
        written += 1
    return written


def read_yolo_labels(label_dir: str | Path, manifest: DatasetManifest) -> list[GroundTruthAnn]:
    """Read label files back into annotation records (inverse of the writer).

    Only files for manifest images are considered; missing files yield no
    boxes. Synthetic ann_ids are assigned sequentially in manifest order.
    """
    label_dir = Path(label_dir)
    out: list[GroundTruthAnn] = []
    next_id = 1
    for img in manifest.images:
        target = label_dir / f"{Path(img.file_name).stem}.txt"
        if not target.exists():
            continue
        with open(target, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                parts = line.split()
                if len(parts) != 5:
                    raise ParseError(
                        f"expected 5 fields 'class cx cy w h', got {len(parts)}",
                        path=str(target),
                        line=lineno,
                    )
                try:
                    norm = geometry.NormBox(
                        cx=float(parts[1]),
                        cy=float(parts[2]),
                        w=float(parts[3]),
                        h=float(parts[4]),
                        class_id=int(parts[0]),
                    )
                except ValueError as exc:
                    raise ParseError(str(exc), path=str(target), line=lineno) from exc
                try:
                    category_id = manifest.category_for_class(norm.class_id)
                except IntegrityError as exc:
                    raise ParseError(str(exc), path=str(target), line=lineno) from exc
                bbox = geometry.from_norm(norm, img.width, img.height)
                out.append(
                    GroundTruthAnn(ann_id=next_id, image_id=img.image_id, bbox=bbox, category_id=category_id)
                )
                next_id += 1
    return out


def split_dataset(manifest: DatasetManifest, val_count: int, seed: int) -> DatasetManifest:
    """Move val_count train images to the validation split, reproducibly.

    Sampling is uniform without replacement over train image ids in sorted
    order, driven by the Mersenne Twister (Python ``random.Random``) seeded
    with ``seed``, so a given (manifest, val_count, seed) always yields the
    same validation set. Test images are never touched.
    """
    if val_count < 0:
        raise RangeError(f"val_count must be non-negative, got {val_count}")
    train_ids = sorted(img.image_id for img in manifest.images_in(Split.TRAIN))
    if val_count > len(train_ids):
        raise InsufficientImagesError(
            f"requested {val_count} validation images but only {len(train_ids)} train images available"
        )
    if val_count == 0:
        return manifest
    chosen = set(random.Random(seed).sample(train_ids, val_count))
    images = tuple(
        replace(img, split=Split.VAL) if img.image_id in chosen else img for img in manifest.images
    )
    return DatasetManifest(images=images, categories=manifest.categories)
