"""Assemble the yolo-style training layout consumed by the student runtime.

Layout under dataset_dir:
    data.yaml
    images/{train,val}/<image files copied from the source directory>
    labels/{train,val}/<stem>.txt copied from the core label directory
"""

from __future__ import annotations

import shutil
import sys
from pathlib import Path

import yaml

from .common import AdapterError, read_manifest_splits


def assemble(images_dir: Path, labels_dir: Path, manifest: Path, dataset_dir: Path,
             class_names: list[str] | None = None) -> Path:
    """Copy train/val images and labels into dataset_dir; returns data.yaml path.

    Manifest images missing a label file get an empty one (an explicit
    negative); missing image files are an error.
    """
    splits = read_manifest_splits(manifest)
    wanted = {"train", "val"}
    counts = {"train": 0, "val": 0}
    for split in wanted:
        (dataset_dir / "images" / split).mkdir(parents=True, exist_ok=True)
        (dataset_dir / "labels" / split).mkdir(parents=True, exist_ok=True)
    for file_name, split in splits.items():
        if split not in wanted:
            continue
        src_img = images_dir / file_name
        if not src_img.exists():
            raise AdapterError(f"image listed in manifest not found: {src_img}")
        shutil.copy2(src_img, dataset_dir / "images" / split / src_img.name)
        label = labels_dir / f"{Path(file_name).stem}.txt"
        target = dataset_dir / "labels" / split / f"{Path(file_name).stem}.txt"
        if label.exists():
            shutil.copy2(label, target)
        else:
            print(f"no label file for {file_name}; writing an empty one", file=sys.stderr)
            target.write_text("")
        counts[split] += 1
    if counts["train"] == 0:
        raise AdapterError("manifest has no train images to assemble")
    doc = {
        "path": str(dataset_dir.resolve()),
        "train": "images/train",
        "val": "images/val" if counts["val"] else "images/train",
        "names": {i: n for i, n in enumerate(class_names or ["pig"])},
    }
    data_yaml = dataset_dir / "data.yaml"
    data_yaml.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    return data_yaml
