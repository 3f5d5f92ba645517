"""Inference-latency aggregation and comparison.

The toolkit never times anything itself: adapters (or any harness) emit
one JSON record per inference as JSON Lines, and this module reduces them
to per-model summaries. Percentiles use the nearest-rank definition so
results are reproducible bit-for-bit across implementations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import EmptyInputError, ParseError


@dataclass(frozen=True, slots=True)
class LatencyRecord:
    """One timed inference: model forward pass and end-to-end pipeline."""

    model_name: str
    forward_ms: float
    pipeline_ms: float
    image_id: int | None = None
    timestamp: str | None = None

    def __post_init__(self) -> None:
        if self.forward_ms <= 0:
            raise ValueError(f"forward_ms must be positive, got {self.forward_ms}")
        if self.pipeline_ms < self.forward_ms:
            raise ValueError(
                f"pipeline_ms {self.pipeline_ms} below forward_ms {self.forward_ms}"
            )


@dataclass(frozen=True, slots=True)
class LatencySummary:
    model_name: str
    count: int
    mean_forward_ms: float
    mean_pipeline_ms: float
    p50_pipeline_ms: float
    p90_pipeline_ms: float
    p99_pipeline_ms: float


def read_latency_log(path: str | Path) -> list[LatencyRecord]:
    """Read a JSON Lines latency log; blank lines are skipped."""
    path = Path(path)
    records: list[LatencyRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=lineno) from exc
            try:
                records.append(
                    LatencyRecord(
                        model_name=str(raw["model_name"]),
                        forward_ms=float(raw["forward_ms"]),
                        pipeline_ms=float(raw["pipeline_ms"]),
                        image_id=int(raw["image_id"]) if raw.get("image_id") is not None else None,
                        timestamp=raw.get("timestamp"),
                    )
                )
            except (TypeError, KeyError, ValueError) as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from exc
    return records


def nearest_rank(sorted_values: Sequence[float], percentile: float) -> float:
    """Nearest-rank percentile of pre-sorted values: the ceil(p/100 * n)-th."""
    if not sorted_values:
        raise EmptyInputError("no values to take a percentile of")
    rank = max(1, math.ceil(percentile / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def aggregate(records: Sequence[LatencyRecord]) -> list[LatencySummary]:
    """One summary per model, sorted by model name.

    Means are arithmetic; pipeline percentiles are nearest-rank. The
    result depends only on the record multiset, not their order.
    """
    if not records:
        raise EmptyInputError("no latency records")
    by_model: dict[str, list[LatencyRecord]] = {}
    for rec in records:
        by_model.setdefault(rec.model_name, []).append(rec)
    summaries = []
    for name in sorted(by_model):
        group = by_model[name]
        pipelines = sorted(r.pipeline_ms for r in group)
        summaries.append(
            LatencySummary(
                model_name=name,
                count=len(group),
                mean_forward_ms=math.fsum(r.forward_ms for r in group) / len(group),
                mean_pipeline_ms=math.fsum(r.pipeline_ms for r in group) / len(group),
                p50_pipeline_ms=nearest_rank(pipelines, 50),
                p90_pipeline_ms=nearest_rank(pipelines, 90),
                p99_pipeline_ms=nearest_rank(pipelines, 99),
            )
        )
    return summaries


def speedup(a: LatencySummary, b: LatencySummary) -> float:
    """How many times faster b's mean forward pass is than a's."""
    return a.mean_forward_ms / b.mean_forward_ms


def summary_to_json_dict(summary: LatencySummary) -> dict:
    return {
        "model_name": summary.model_name,
        "count": summary.count,
        "mean_forward_ms": summary.mean_forward_ms,
        "mean_pipeline_ms": summary.mean_pipeline_ms,
        "p50_pipeline_ms": summary.p50_pipeline_ms,
        "p90_pipeline_ms": summary.p90_pipeline_ms,
        "p99_pipeline_ms": summary.p99_pipeline_ms,
    }


def render_latency_table(summaries: Sequence[LatencySummary]) -> str:
    """Aligned table mirroring the forward/pipeline latency report columns."""
    name_w = max(5, max((len(s.model_name) for s in summaries), default=5))
    header = (
        f"{'Model':<{name_w}}{'Count':>8}{'Forward (ms)':>14}{'Pipeline (ms)':>15}"
        f"{'p50 (ms)':>10}{'p90 (ms)':>10}{'p99 (ms)':>10}"
    )
    lines = [header]
    for s in summaries:
        lines.append(
            f"{s.model_name:<{name_w}}{s.count:>8}{s.mean_forward_ms:>14.2f}"
            f"{s.mean_pipeline_ms:>15.2f}{s.p50_pipeline_ms:>10.2f}"
            f"{s.p90_pipeline_ms:>10.2f}{s.p99_pipeline_ms:>10.2f}"
        )
    return "\n".join(lines) + "\n"


def render_speedup_line(a: LatencySummary, b: LatencySummary) -> str:
    return f"speedup {a.model_name} vs {b.model_name}: {speedup(a, b):.1f}×"
