"""Bounding-box types, coordinate conversions, IoU, and area classification.

All functions are pure and operate on double-precision scalars; boxes use
absolute pixel coordinates (x_min, y_min, width, height) unless stated
otherwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import OutOfImageError

# Area thresholds in pixels squared, half-open on the upper side:
# small < 32*32 <= medium < 96*96 <= large.
SMALL_AREA_MAX = 32.0 * 32.0
MEDIUM_AREA_MAX = 96.0 * 96.0

# Slack allowed on NormBox edge overshoot from rounding.
NORM_EDGE_EPS = 1e-6


class AreaClass(enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True, slots=True)
class BBox:
    """Axis-aligned box in absolute pixel coordinates, top-left anchored."""

    x_min: float
    y_min: float
    width: float
    height: float

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"box must have positive size, got {self.width}x{self.height}")
        if self.x_min < 0 or self.y_min < 0:
            raise ValueError(f"box origin must be non-negative, got ({self.x_min}, {self.y_min})")

    @property
    def x_max(self) -> float:
        return self.x_min + self.width

    @property
    def y_max(self) -> float:
        return self.y_min + self.height

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True, slots=True)
class NormBox:
    """Center-format box normalized to image size, as used by YOLO label files."""

    cx: float
    cy: float
    w: float
    h: float
    class_id: int

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.cx - self.w / 2 < -NORM_EDGE_EPS or self.cx + self.w / 2 > 1 + NORM_EDGE_EPS:
            raise ValueError(f"box extends past horizontal image edge: cx={self.cx} w={self.w}")
        if self.cy - self.h / 2 < -NORM_EDGE_EPS or self.cy + self.h / 2 > 1 + NORM_EDGE_EPS:
            raise ValueError(f"box extends past vertical image edge: cy={self.cy} h={self.h}")
        if self.class_id < 0:
            raise ValueError(f"class_id must be non-negative, got {self.class_id}")


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint or edge-touching.

    Areas are taken from corner differences so the result stays in [0, 1]
    under floating point and identical boxes score exactly 1.0.
    """
    ax1, ay1 = a.x_max, a.y_max
    bx1, by1 = b.x_max, b.y_max
    iw = min(ax1, bx1) - max(a.x_min, b.x_min)
    ih = min(ay1, by1) - max(a.y_min, b.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    area_a = (ax1 - a.x_min) * (ay1 - a.y_min)
    area_b = (bx1 - b.x_min) * (by1 - b.y_min)
    return inter / (area_a + area_b - inter)


def clamp_to_image(
    x_min: float, y_min: float, width: float, height: float, img_w: float, img_h: float
) -> BBox:
    """Clamp raw box coordinates to the image and return a valid BBox.

    Raises OutOfImageError when nothing with positive area remains inside
    the image, and ValueError for non-positive raw extents.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"box must have positive size, got {width}x{height}")
    if x_min >= 0 and y_min >= 0 and x_min + width <= img_w and y_min + height <= img_h:
        return BBox(x_min, y_min, width, height)  # already inside: keep coordinates exact
    x0 = max(0.0, x_min)
    y0 = max(0.0, y_min)
    x1 = min(float(img_w), x_min + width)
    y1 = min(float(img_h), y_min + height)
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        raise OutOfImageError(
            f"box ({x_min}, {y_min}, {width}, {height}) has no area inside {img_w}x{img_h} image"
        )
    return BBox(x0, y0, x1 - x0, y1 - y0)


def to_norm(b: BBox, class_id: int, img_w: float, img_h: float) -> NormBox:
    """Convert a pixel box to the normalized center format.

    The box is clamped to the image first; OutOfImageError is raised when
    the clamped box has zero area.
    """
    if img_w <= 0 or img_h <= 0:
        raise ValueError(f"image size must be positive, got {img_w}x{img_h}")
    c = clamp_to_image(b.x_min, b.y_min, b.width, b.height, img_w, img_h)
    return NormBox(
        cx=(c.x_min + c.width / 2) / img_w,
        cy=(c.y_min + c.height / 2) / img_h,
        w=c.width / img_w,
        h=c.height / img_h,
        class_id=class_id,
    )


def from_norm(n: NormBox, img_w: float, img_h: float) -> BBox:
    """Inverse of to_norm up to floating-point round-off."""
    if img_w <= 0 or img_h <= 0:
        raise ValueError(f"image size must be positive, got {img_w}x{img_h}")
    # Tiny negative origins from round-off are snapped to the image edge.
    return BBox(
        x_min=max(0.0, (n.cx - n.w / 2) * img_w),
        y_min=max(0.0, (n.cy - n.h / 2) * img_h),
        width=n.w * img_w,
        height=n.h * img_h,
    )


def area_class(b: BBox) -> AreaClass:
    """COCO-style size bucket of a box; boundaries are half-open upward."""
    a = b.area
    if a < SMALL_AREA_MAX:
        return AreaClass.SMALL
    if a < MEDIUM_AREA_MAX:
        return AreaClass.MEDIUM
    return AreaClass.LARGE
