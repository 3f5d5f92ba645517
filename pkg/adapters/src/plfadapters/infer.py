"""Student inference runner: weights + images in, predictions + timings out."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from PIL import Image

from . import synthetic
from .common import (
    EXIT_OK,
    EXIT_USAGE,
    AdapterError,
    LatencyLogger,
    PredictedBox,
    assign_image_ids,
    list_images,
    write_predictions_json,
)


def _model_name(weights: Path, backend: str) -> str:
    if backend == "synthetic":
        try:
            doc = synthetic.read_checkpoint(weights)
            suffix = {"nano": "n", "small": "s", "medium": "m"}[doc["variant"]]
            return f"yolov8{suffix}"
        except (ValueError, KeyError):
            return weights.stem
    return weights.stem


def run(weights: Path, images_dir: Path, out: Path, latency_log: Path,
        backend: str, device: str, manifest: Path | None) -> tuple[int, int]:
    if not weights.exists():
        raise AdapterError(f"weights not found: {weights}")
    images = list_images(images_dir)
    ids = assign_image_ids(images, manifest)
    student = None
    if backend == "ultralytics" and images:
        from .runtimes import UltralyticsStudent

        student = UltralyticsStudent(weights, device)
    logger = LatencyLogger(_model_name(weights, backend))
    boxes: list[PredictedBox] = []
    skipped = 0
    for path in images:
        image_id = ids[path]
        if image_id is None:
            print(f"skipping {path.name}: not in manifest", file=sys.stderr)
            skipped += 1
            continue
        t_start = time.perf_counter()
        try:
            if student is not None:
                found, forward_ms, runtime_pipeline = student.detect(path, image_id)
                pipeline_ms = max(runtime_pipeline, (time.perf_counter() - t_start) * 1000.0)
            else:
                with Image.open(path) as img:
                    img.load()
                    t_forward = time.perf_counter()
                    found = synthetic.detect(path.stem, img.width, img.height, image_id)
                    forward_ms = (time.perf_counter() - t_forward) * 1000.0
                pipeline_ms = (time.perf_counter() - t_start) * 1000.0
        except OSError as exc:
            print(f"skipping {path.name}: {exc}", file=sys.stderr)
            skipped += 1
            continue
        boxes.extend(found)
        logger.add(image_id, forward_ms, pipeline_ms)
    write_predictions_json(boxes, out)
    logger.write(latency_log)
    return len(images) - skipped, skipped


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plf-student-infer",
        description="Run a trained student detector over a directory of images.",
    )
    parser.add_argument("--weights", required=True, help="trained checkpoint path")
    parser.add_argument("--images", required=True, help="input image directory")
    parser.add_argument("--out", required=True, help="predictions JSON output path")
    parser.add_argument("--latency-log", dest="latency_log", required=True,
                        help="latency JSONL output path")
    parser.add_argument("--manifest", default=None,
                        help="core manifest JSON mapping file names to image ids")
    parser.add_argument("--device", default="auto")
    parser.add_argument("--backend", choices=("ultralytics", "synthetic"), default="ultralytics")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        processed, skipped = run(
            Path(args.weights), Path(args.images), Path(args.out), Path(args.latency_log),
            args.backend, args.device, Path(args.manifest) if args.manifest else None,
        )
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"processed {processed} images, skipped {skipped}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
