"""Student training wrapper: label directory + manifest in, weights out.

Always assembles the dataset layout first; --dry-run stops there. A run
manifest (config echo, epochs completed, checkpoint path, effective
hyperparameters) is written next to the weights for auditability.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import synthetic
from .common import EXIT_OK, EXIT_USAGE, AdapterError
from .dataset import assemble

VARIANT_SUFFIX = {"nano": "n", "small": "s", "medium": "m"}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 4
    image_size: int = 640
    model_variant: str = "small"
    dataset_dir: str = "dataset"

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise AdapterError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise AdapterError(f"batch size must be at least 1, got {self.batch_size}")
        if self.image_size < 32 or self.image_size % 32 != 0:
            raise AdapterError(
                f"image size must be a positive multiple of 32, got {self.image_size}"
            )
        if self.model_variant not in VARIANT_SUFFIX:
            raise AdapterError(f"unknown variant '{self.model_variant}'")


def _write_run_manifest(out_dir: Path, cfg: TrainConfig, backend: str, epochs_completed: int,
                        checkpoint: Path | None, effective: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "config": asdict(cfg),
        "backend": backend,
        "epochs_completed": epochs_completed,
        "checkpoint": str(checkpoint) if checkpoint else None,
        "effective_hyperparameters": effective,
    }
    path = out_dir / "run.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plf-student-train",
        description="Train a lightweight student detector on a YOLO label directory.",
    )
    parser.add_argument("--labels-dir", dest="labels_dir", required=True,
                        help="label directory produced by the core pseudolabel command")
    parser.add_argument("--images-dir", dest="images_dir", required=True,
                        help="directory holding the original image files")
    parser.add_argument("--manifest", required=True, help="core manifest JSON with splits")
    parser.add_argument("--dataset-dir", dest="dataset_dir", required=True,
                        help="where to assemble the training layout")
    parser.add_argument("--out-dir", dest="out_dir", required=True,
                        help="run outputs: run.json and weights")
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--batch-size", dest="batch_size", type=int, default=4)
    parser.add_argument("--image-size", dest="image_size", type=int, default=640)
    parser.add_argument("--variant", choices=tuple(VARIANT_SUFFIX), default="small")
    parser.add_argument("--device", default="auto")
    parser.add_argument("--backend", choices=("ultralytics", "synthetic"), default="ultralytics")
    parser.add_argument("--dry-run", dest="dry_run", action="store_true",
                        help="assemble the dataset layout and stop before training")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = TrainConfig(
            epochs=args.epochs,
            batch_size=args.batch_size,
            image_size=args.image_size,
            model_variant=args.variant,
            dataset_dir=args.dataset_dir,
        )
        out_dir = Path(args.out_dir)
        data_yaml = assemble(
            Path(args.images_dir), Path(args.labels_dir), Path(args.manifest),
            Path(args.dataset_dir),
        )
        if args.dry_run:
            _write_run_manifest(out_dir, cfg, args.backend, 0, None, {})
            print(f"dataset layout written to {args.dataset_dir}; training skipped (dry run)")
            return EXIT_OK
        if args.backend == "synthetic":
            checkpoint = out_dir / "weights" / f"synthetic-yolov8{VARIANT_SUFFIX[cfg.model_variant]}.json"
            synthetic.write_checkpoint(checkpoint, cfg.model_variant, cfg.image_size, ["pig"], cfg.epochs)
            effective = asdict(cfg)
        else:
            from .runtimes import train_student

            checkpoint, _, effective = train_student(
                data_yaml, VARIANT_SUFFIX[cfg.model_variant], cfg.epochs,
                cfg.batch_size, cfg.image_size, args.device, out_dir,
            )
        run_path = _write_run_manifest(out_dir, cfg, args.backend, cfg.epochs, checkpoint, effective)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"checkpoint: {checkpoint}")
    print(f"run manifest: {run_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
