"""Axis-aligned rectangle arithmetic and spatial-relation predicates.

Boxes are stored as (left, top, right, bottom) in pixel coordinates.
Sub-pixel values are allowed and degenerate zero-area boxes are valid
inputs everywhere. All functions are pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Optional, Sequence


class Axis(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class SpatialRelation(NamedTuple):
    """Left-right / top-bottom relation flags for an ordered box pair."""

    lr: bool
    tb: bool


@dataclass(frozen=True)
class BBox:
    """Rectangle with x0 <= x1 and y0 <= y1."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError(f"inverted box: ({self.x0}, {self.y0}, {self.x1}, {self.y1})")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0

    def contains_point(self, x: float, y: float) -> bool:
        """Inclusive containment test."""
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)


def intersect(a: BBox, b: BBox) -> Optional[BBox]:
    """Overlap rectangle of two boxes, or None when the overlap area is zero.

    Boxes that merely touch along an edge or corner do not intersect.
    """
    x0 = max(a.x0, b.x0)
    y0 = max(a.y0, b.y0)
    x1 = min(a.x1, b.x1)
    y1 = min(a.y1, b.y1)
    if x1 <= x0 or y1 <= y0:
        return None
    return BBox(x0, y0, x1, y1)


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union in [0, 1]; 0 when the union area is 0."""
    inter = intersect(a, b)
    inter_area = inter.area if inter is not None else 0.0
    union_area = a.area + b.area - inter_area
    if union_area <= 0.0:
        return 0.0
    return inter_area / union_area


def hull(boxes: Sequence[BBox] | Iterable[BBox]) -> BBox:
    """Smallest box containing every box in a nonempty collection."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("hull of empty box list")
    return BBox(
        min(b.x0 for b in boxes),
        min(b.y0 for b in boxes),
        max(b.x1 for b in boxes),
        max(b.y1 for b in boxes),
    )


def projection_overlap(a: BBox, b: BBox, axis: Axis) -> float:
    """Length of the overlap of the two boxes' projections onto an axis."""
    if axis is Axis.HORIZONTAL:
        return max(0.0, min(a.x1, b.x1) - max(a.x0, b.x0))
    return max(0.0, min(a.y1, b.y1) - max(a.y0, b.y0))


def interval_gap(a: BBox, b: BBox, axis: Axis) -> float:
    """Distance between the boxes' projections onto an axis; 0 when they overlap."""
    if axis is Axis.HORIZONTAL:
        return max(0.0, max(a.x0, b.x0) - min(a.x1, b.x1))
    return max(0.0, max(a.y0, b.y0) - min(a.y1, b.y1))


def spatial_relation(a: BBox, b: BBox) -> SpatialRelation:
    """Classify a box pair as left-right and/or top-bottom related.

    lr holds when the vertical projections overlap with positive length
    while the horizontal intervals are disjoint (touching counts as
    disjoint); tb is the transpose. At most one of the two can hold, and
    both are symmetric in the argument order.
    """
    h_disjoint = a.x1 <= b.x0 or b.x1 <= a.x0
    v_disjoint = a.y1 <= b.y0 or b.y1 <= a.y0
    lr = h_disjoint and projection_overlap(a, b, Axis.VERTICAL) > 0.0
    tb = v_disjoint and projection_overlap(a, b, Axis.HORIZONTAL) > 0.0
    return SpatialRelation(lr=lr, tb=tb)
