"""Scenario-stratified evaluation.

Scene grouping is judgment-driven input data, not something the toolkit
computes: a mapping file assigns image ids to groups 1..8 and the
evaluator runs once per group over exactly that group's images.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import evaluator
from .annotations import NUM_GROUPS, DatasetManifest, Detection, GroundTruthAnn, Split
from .errors import IntegrityError, ParseError
from .evaluator import EvalConfig, EvalResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class GroupInfo:
    group_id: int
    name: str
    phase: str | None = None
    description: str | None = None


@dataclass(frozen=True)
class GroupAssignment:
    """Validated image-to-group mapping plus group metadata."""

    groups: tuple[GroupInfo, ...]
    assignments: Mapping[int, int]

    def __len__(self) -> int:
        return len(self.assignments)

    def group_ids(self) -> list[int]:
        return sorted(set(self.assignments.values()))

    def images_for(self, group_id: int) -> list[int]:
        return sorted(iid for iid, gid in self.assignments.items() if gid == group_id)

    def info_for(self, group_id: int) -> GroupInfo:
        for info in self.groups:
            if info.group_id == group_id:
                return info
        return GroupInfo(group_id=group_id, name=f"Group {group_id}")


def load_groups(path, manifest: DatasetManifest) -> GroupAssignment:
    """Read and validate a group mapping file.

    Schema: ``{"groups": [{"id", "name", "phase"?, "description"?}],
    "assignments": {"<image_id>": <group_id>}}``. Assignments to unknown
    images or to groups outside 1..8 are integrity failures.
    """
    from .annotations import _load_json  # shared JSON error handling

    data = _load_json(path)
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object", path=str(path))
    groups: list[GroupInfo] = []
    seen: set[int] = set()
    for entry in data.get("groups", []):
        try:
            gid = int(entry["id"])
            info = GroupInfo(
                group_id=gid,
                name=str(entry.get("name", f"Group {gid}")),
                phase=entry.get("phase"),
                description=entry.get("description"),
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise ParseError(f"groups: {exc}", path=str(path)) from exc
        if not 1 <= gid <= NUM_GROUPS:
            raise IntegrityError(f"group id {gid} outside 1..{NUM_GROUPS}")
        if gid in seen:
            raise IntegrityError(f"duplicate group id {gid}")
        seen.add(gid)
        groups.append(info)
    assignments: dict[int, int] = {}
    for key, value in data.get("assignments", {}).items():
        try:
            image_id, gid = int(key), int(value)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"assignments: {exc}", path=str(path)) from exc
        if not manifest.has_image(image_id):
            raise IntegrityError(f"assignment references unknown image_id {image_id}")
        if not 1 <= gid <= NUM_GROUPS:
            raise IntegrityError(f"image {image_id} assigned to group {gid} outside 1..{NUM_GROUPS}")
        assignments[image_id] = gid
    return GroupAssignment(groups=tuple(groups), assignments=assignments)


def unassigned_images(assignment: GroupAssignment, manifest: DatasetManifest) -> list[int]:
    """Test-split images missing from the mapping (all images when no test split)."""
    candidates = manifest.images_in(Split.TEST) or manifest.images
    return sorted(img.image_id for img in candidates if img.image_id not in assignment.assignments)


def evaluate_per_group(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthAnn],
    manifest: DatasetManifest,
    assignment: GroupAssignment,
    cfg: EvalConfig | None = None,
) -> list[tuple[int, EvalResult]]:
    """Evaluate each group over exactly its images, ascending by group id.

    Equivalent to running the evaluator on the sub-dataset of each group in
    isolation; unassigned images contribute nothing and are reported via a
    warning so coverage gaps stay visible.
    """
    missing = unassigned_images(assignment, manifest)
    if missing:
        logger.warning("%d images have no group assignment and are excluded", len(missing))
    results: list[tuple[int, EvalResult]] = []
    for gid in assignment.group_ids():
        ids = set(assignment.images_for(gid))
        sub_manifest = manifest.restricted_to(ids)
        sub_dets = [d for d in dets if d.image_id in ids]
        sub_gts = [g for g in gts if g.image_id in ids]
        results.append((gid, evaluator.evaluate(sub_dets, sub_gts, sub_manifest, cfg)))
    return results


def render_group_table(rows: Sequence[tuple[str, int, EvalResult]]) -> str:
    """Aligned table with one row per label: Group, Images, then the AP suite."""
    header = f"{'Group':>8}{'Images':>8}" + "".join(f"{c:>8}" for c in evaluator.HEADLINE_COLUMNS)
    lines = [header]
    for label, n_images, result in rows:
        values = "".join(
            f"{('-' if v is None else f'{v:.1f}'):>8}" for v in evaluator.headline_values(result)
        )
        lines.append(f"{label:>8}{n_images:>8}{values}")
    return "\n".join(lines) + "\n"
