"""Shared builders for synthetic fixtures used across the test suite."""

import random

from plftk import BBox, DatasetManifest, Detection, GroundTruthAnn
from plftk.annotations import ImageRecord, Split


def make_manifest(n_images=3, width=640, height=512, split=Split.TRAIN, categories=((1, "pig"),)):
    images = tuple(
        ImageRecord(image_id=i + 1, file_name=f"img_{i + 1:04d}.jpg", width=width, height=height, split=split)
        for i in range(n_images)
    )
    return DatasetManifest(images=images, categories=tuple(categories))


def random_box(rng: random.Random, img_w=640, img_h=512, min_side=3.0, max_side=220.0) -> BBox:
    w = rng.uniform(min_side, max_side)
    h = rng.uniform(min_side, max_side)
    x = rng.uniform(0.0, img_w - w)
    y = rng.uniform(0.0, img_h - h)
    return BBox(x, y, w, h)


def random_eval_fixture(rng: random.Random, max_images=10, max_boxes=8, two_cats_prob=0.3):
    """A randomized (manifest, gts, dets) triple spanning all area classes.

    Detections are a mix of jittered copies of ground truth (likely
    matches) and fresh random boxes (likely false positives); a slice of
    scores is duplicated to exercise tie handling.
    """
    n_images = rng.randint(1, max_images)
    cats = ((1, "pig"), (2, "other")) if rng.random() < two_cats_prob else ((1, "pig"),)
    manifest = make_manifest(n_images=n_images, categories=cats)
    gts, dets = [], []
    ann_id = 1
    for img in manifest.images:
        for _ in range(rng.randint(0, max_boxes)):
            cat = rng.choice(cats)[0]
            gts.append(GroundTruthAnn(ann_id, img.image_id, random_box(rng), cat))
            ann_id += 1
        for _ in range(rng.randint(0, max_boxes)):
            cat = rng.choice(cats)[0]
            mine = [g for g in gts if g.image_id == img.image_id and g.category_id == cat]
            if mine and rng.random() < 0.6:
                src = rng.choice(mine).bbox
                dx = rng.uniform(-0.3, 0.3) * src.width
                dy = rng.uniform(-0.3, 0.3) * src.height
                box = BBox(
                    max(0.0, src.x_min + dx),
                    max(0.0, src.y_min + dy),
                    src.width * rng.uniform(0.7, 1.3),
                    src.height * rng.uniform(0.7, 1.3),
                )
            else:
                box = random_box(rng)
            dets.append(Detection(img.image_id, box, rng.random(), cat))
    for i, det in enumerate(dets):
        if i > 0 and rng.random() < 0.15:
            twin = dets[rng.randrange(i)]
            dets[i] = Detection(det.image_id, det.bbox, twin.score, det.category_id)
    return manifest, gts, dets


def to_reference_records(gts, dets):
    """Convert package objects to the plain dicts the oracle consumes."""
    ref_gts = [
        {
            "image_id": g.image_id,
            "bbox": (g.bbox.x_min, g.bbox.y_min, g.bbox.width, g.bbox.height),
            "category_id": g.category_id,
        }
        for g in gts
    ]
    ref_dets = [
        {
            "image_id": d.image_id,
            "bbox": (d.bbox.x_min, d.bbox.y_min, d.bbox.width, d.bbox.height),
            "score": d.score,
            "category_id": d.category_id,
        }
        for d in dets
    ]
    return ref_gts, ref_dets


def assert_close_or_both_none(a, b, tol=1e-9):
    if a is None or b is None:
        assert a is None and b is None, f"absent mismatch: {a} vs {b}"
    else:
        assert abs(a - b) <= tol, f"{a} vs {b} differ by {abs(a - b)}"


def assert_results_match(result, reference, tol=1e-9):
    """Compare a package EvalResult to an oracle output dict."""
    assert_close_or_both_none(result.map, reference["map"], tol)
    assert_close_or_both_none(result.ap50, reference["ap50"], tol)
    assert_close_or_both_none(result.ap75, reference["ap75"], tol)
    assert_close_or_both_none(result.ap_medium, reference["ap_medium"], tol)
    assert_close_or_both_none(result.ap_large, reference["ap_large"], tol)
    assert len(result.per_threshold) == len(reference["per_threshold"])
    for (t_a, v_a), (t_b, v_b) in zip(result.per_threshold, reference["per_threshold"]):
        assert t_a == t_b
        assert_close_or_both_none(v_a, v_b, tol)
