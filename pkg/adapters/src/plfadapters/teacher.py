"""Zero-shot teacher annotation: images in, raw predictions + timings out.

Emits every detection with its raw confidence; thresholding is the core
toolkit's job so the score sweep can be re-run without re-inference.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
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


@dataclass(frozen=True)
class TeacherConfig:
    prompt: str = "Pig"
    checkpoint_id: str = "facebook/sam3"
    device: str = "auto"

    def __post_init__(self) -> None:
        if not self.prompt.strip():
            raise AdapterError("prompt must be non-empty")

    @property
    def model_name(self) -> str:
        return self.checkpoint_id.rsplit("/", 1)[-1]


def annotate(images_dir: Path, out: Path, latency_log: Path, cfg: TeacherConfig,
             backend: str, manifest: Path | None) -> tuple[int, int]:
    """Annotate a directory of images; returns (annotated, skipped)."""
    images = list_images(images_dir)
    ids = assign_image_ids(images, manifest)
    detector = None
    if backend == "sam3" and images:
        from .runtimes import TextPromptedTeacher

        detector = TextPromptedTeacher(cfg.checkpoint_id, cfg.prompt, cfg.device)
    logger = LatencyLogger(cfg.model_name)
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
            with Image.open(path) as img:
                img.load()
                t_forward = time.perf_counter()
                if detector is not None:
                    found = detector.detect(img, image_id)
                else:
                    found = synthetic.detect(path.stem, img.width, img.height, image_id)
                t_done = time.perf_counter()
        except OSError as exc:
            print(f"skipping {path.name}: {exc}", file=sys.stderr)
            skipped += 1
            continue
        boxes.extend(found)
        t_end = time.perf_counter()
        logger.add(image_id, (t_done - t_forward) * 1000.0, (t_end - t_start) * 1000.0)
    write_predictions_json(boxes, out)
    logger.write(latency_log)
    return len(images) - skipped, skipped


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plf-teacher",
        description="Annotate a directory of images with a text-prompted zero-shot detector.",
    )
    parser.add_argument("--images", required=True, help="input image directory")
    parser.add_argument("--out", required=True, help="predictions JSON output path")
    parser.add_argument("--latency-log", dest="latency_log", required=True,
                        help="latency JSONL output path")
    parser.add_argument("--manifest", default=None,
                        help="core manifest JSON; maps file names to image ids "
                             "(default: sequential ids in sorted-name order)")
    parser.add_argument("--prompt", default="Pig", help="text prompt (default: Pig)")
    parser.add_argument("--checkpoint", default="facebook/sam3",
                        help="teacher checkpoint id (default: facebook/sam3)")
    parser.add_argument("--device", default="auto", help="cuda | cpu | auto")
    parser.add_argument("--backend", choices=("sam3", "synthetic"), default="sam3",
                        help="model runtime (synthetic: deterministic stand-in for plumbing tests)")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = TeacherConfig(prompt=args.prompt, checkpoint_id=args.checkpoint, device=args.device)
        annotated, skipped = annotate(
            Path(args.images), Path(args.out), Path(args.latency_log), cfg,
            args.backend, Path(args.manifest) if args.manifest else None,
        )
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"annotated {annotated} images, skipped {skipped}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
