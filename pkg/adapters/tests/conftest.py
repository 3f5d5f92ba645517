import json

import pytest
from PIL import Image


def _write_png(path, width, height, color):
    Image.new("RGB", (width, height), color).save(path)


@pytest.fixture
def smoke_corpus(tmp_path):
    """Five small images plus a core-format manifest (4 train, 1 val)."""
    images_dir = tmp_path / "frames"
    images_dir.mkdir()
    sizes = [(96, 80), (120, 96), (88, 88), (104, 72), (96, 96)]
    entries = []
    for i, (w, h) in enumerate(sizes):
        name = f"frame_{i + 1:03d}.png"
        _write_png(images_dir / name, w, h, (20 * i, 80, 120))
        entries.append(
            {
                "id": i + 1,
                "file_name": name,
                "width": w,
                "height": h,
                "split": "val" if i == len(sizes) - 1 else "train",
            }
        )
    manifest = tmp_path / "manifest.json"
    manifest.write_text(
        json.dumps({"images": entries, "categories": [{"id": 1, "name": "pig"}]})
    )
    return images_dir, manifest, entries


@pytest.fixture
def two_image_corpus(tmp_path):
    images_dir = tmp_path / "pair"
    images_dir.mkdir()
    entries = []
    for i, (w, h) in enumerate([(64, 48), (80, 64)]):
        name = f"img_{i + 1}.png"
        _write_png(images_dir / name, w, h, (10, 60 + 40 * i, 90))
        entries.append({"id": i + 1, "file_name": name, "width": w, "height": h, "split": "test"})
    manifest = tmp_path / "pair_manifest.json"
    manifest.write_text(
        json.dumps({"images": entries, "categories": [{"id": 1, "name": "pig"}]})
    )
    return images_dir, manifest, entries
