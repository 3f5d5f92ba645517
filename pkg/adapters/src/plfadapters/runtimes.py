"""Real model runtimes behind lazy imports.

Each loader raises RuntimeUnavailableError with an actionable message
when the runtime is missing, so the scripts stay importable (and the
synthetic backend usable) on machines without GPUs or model packages.
"""

from __future__ import annotations

from pathlib import Path

from .common import PredictedBox, RuntimeUnavailableError


def resolve_device(device: str) -> str:
    if device != "auto":
        return device
    try:
        import torch

        return "cuda" if torch.cuda.is_available() else "cpu"
    except ImportError:
        return "cpu"


class TextPromptedTeacher:
    """Zero-shot text-prompted detector via the transformers Sam3 port."""

    def __init__(self, checkpoint_id: str, prompt: str, device: str):
        try:
            from transformers import Sam3Model, Sam3Processor  # type: ignore[attr-defined]
        except ImportError as exc:
            raise RuntimeUnavailableError(
                "the teacher backend needs a transformers release with Sam3 support; "
                "install it with 'pip install -U transformers', or run with "
                "--backend synthetic for plumbing tests"
            ) from exc
        self.device = resolve_device(device)
        self.prompt = prompt
        try:
            self.processor = Sam3Processor.from_pretrained(checkpoint_id)
            self.model = Sam3Model.from_pretrained(checkpoint_id).to(self.device).eval()
        except Exception as exc:  # hub raises OSError/EnvironmentError/ValueError variants
            raise RuntimeUnavailableError(
                f"could not load teacher checkpoint '{checkpoint_id}': {exc}; "
                "pre-fetch the weights on a machine with network access, or run "
                "with --backend synthetic for plumbing tests"
            ) from exc

    def detect(self, image, image_id: int) -> list[PredictedBox]:
        import torch

        inputs = self.processor(images=image, text=self.prompt, return_tensors="pt").to(self.device)
        with torch.no_grad():
            outputs = self.model(**inputs)
        processed = self.processor.post_process_instance_segmentation(
            outputs, threshold=0.0, target_sizes=[image.size[::-1]]
        )[0]
        boxes = []
        for box, score in zip(processed["boxes"].tolist(), processed["scores"].tolist()):
            x0, y0, x1, y1 = box
            if x1 <= x0 or y1 <= y0:
                continue
            boxes.append(PredictedBox(image_id, x0, y0, x1 - x0, y1 - y0, float(score)))
        return boxes


def load_ultralytics():
    try:
        from ultralytics import YOLO
    except ImportError as exc:
        raise RuntimeUnavailableError(
            "the student backend needs the ultralytics package; install it with "
            "'pip install ultralytics', or run with --backend synthetic for "
            "plumbing tests"
        ) from exc
    return YOLO


def train_student(dataset_yaml: Path, variant_suffix: str, epochs: int, batch: int,
                  image_size: int, device: str, out_dir: Path) -> tuple[Path, int, dict]:
    """Train from the framework architecture config; returns (checkpoint,
    epochs completed, effective hyperparameters)."""
    YOLO = load_ultralytics()
    model = YOLO(f"yolov8{variant_suffix}.yaml")
    results = model.train(
        data=str(dataset_yaml),
        epochs=epochs,
        batch=batch,
        imgsz=image_size,
        device=resolve_device(device),
        project=str(out_dir),
        name="train",
        exist_ok=True,
        verbose=False,
    )
    checkpoint = Path(results.save_dir) / "weights" / "best.pt"
    if not checkpoint.exists():
        checkpoint = Path(results.save_dir) / "weights" / "last.pt"
    effective = {k: v for k, v in vars(model.trainer.args).items() if not k.startswith("_")}
    return checkpoint, epochs, effective


class UltralyticsStudent:
    def __init__(self, weights: Path, device: str):
        YOLO = load_ultralytics()
        self.model = YOLO(str(weights))
        self.device = resolve_device(device)

    def detect(self, image_path: Path, image_id: int) -> tuple[list[PredictedBox], float, float]:
        """Returns (boxes, forward_ms, pipeline_ms) using the runtime's own timings."""
        result = self.model.predict(str(image_path), device=self.device, verbose=False)[0]
        boxes = []
        for xyxy, conf in zip(result.boxes.xyxy.tolist(), result.boxes.conf.tolist()):
            x0, y0, x1, y1 = xyxy
            if x1 <= x0 or y1 <= y0:
                continue
            boxes.append(PredictedBox(image_id, x0, y0, x1 - x0, y1 - y0, float(conf)))
        forward_ms = float(result.speed.get("inference", 0.0))
        pipeline_ms = float(sum(result.speed.values()))
        return boxes, forward_ms, pipeline_ms
