"""Paragraph- and table-cell region extraction plus entity assignment.

The tabular branch works on an 8-bit grayscale page image: dark pixels are
opened with long thin kernels to isolate ruled lines, interior connected
components of the combined line mask become candidate cells, and a cell is
kept when it holds at least one word and does not overlap a cell kept
before it (smallest areas first). Words the tabular branch misses fall
back to distance-threshold paragraph clustering, so every word ends up
covered by some region.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .geometry import Axis, BBox, hull, intersect, interval_gap, iou

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import Document, Word

# Kernel length floor in pixels; short strokes in glyphs must not read as rules.
MIN_KERNEL_PX = 10
DEFAULT_KERNEL_FRACTION = 1.0 / 40.0
DEFAULT_BINARIZE_THRESHOLD = 128
DEFAULT_H_THS = 2.0
DEFAULT_V_THS = 1.0


class RegionKind(Enum):
    PARAGRAPH = "paragraph"
    TABULAR = "tabular"


@dataclass
class Region:
    id: int
    kind: RegionKind
    box: BBox


def region_from_dict(raw: dict) -> Region:
    return Region(id=raw["id"], kind=RegionKind(raw["kind"]), box=BBox(*raw["box"]))


@dataclass
class LineMask:
    """Boolean (height, width) grids of detected horizontal/vertical line pixels."""

    width: int
    height: int
    horizontal: np.ndarray
    vertical: np.ndarray

    def __post_init__(self) -> None:
        expected = (self.height, self.width)
        if self.horizontal.shape != expected or self.vertical.shape != expected:
            raise ValueError(f"mask grids must be {expected}")


def _keep_long_runs(mask: np.ndarray, k: int) -> np.ndarray:
    """Morphological open with a 1 x k kernel: keep row runs of length >= k."""
    out = np.zeros_like(mask)
    h = mask.shape[0]
    for y in range(h):
        row = mask[y]
        padded = np.empty(row.size + 2, dtype=np.int8)
        padded[0] = padded[-1] = 0
        padded[1:-1] = row
        edges = np.flatnonzero(np.diff(padded))
        starts, ends = edges[::2], edges[1::2]
        for s, e in zip(starts, ends):
            if e - s >= k:
                out[y, s:e] = True
    return out


def detect_lines(
    image: np.ndarray,
    kernel_fraction: float = DEFAULT_KERNEL_FRACTION,
    threshold: int = DEFAULT_BINARIZE_THRESHOLD,
    min_kernel: int = MIN_KERNEL_PX,
) -> LineMask:
    """Extract ruled-line pixels from a grayscale page image.

    The image is binarized at ``threshold`` (dark = ink) and opened with a
    1 x k kernel horizontally and k x 1 vertically, where
    k = max(min_kernel, kernel_fraction * extent along the run direction).
    """
    if not 0.0 < kernel_fraction <= 1.0:
        raise ValueError(f"kernel_fraction must be in (0, 1], got {kernel_fraction}")
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {image.shape}")
    h, w = image.shape
    if h == 0 or w == 0:
        empty = np.zeros((h, w), dtype=bool)
        return LineMask(width=w, height=h, horizontal=empty, vertical=empty.copy())
    dark = image < threshold
    k_h = max(min_kernel, int(round(kernel_fraction * w)))
    k_v = max(min_kernel, int(round(kernel_fraction * h)))
    horizontal = _keep_long_runs(dark, k_h)
    vertical = _keep_long_runs(dark.T, k_v).T
    return LineMask(width=w, height=h, horizontal=horizontal, vertical=vertical)


def _label_components(free: np.ndarray) -> tuple[list[BBox], list[bool]]:
    """4-connected components of a boolean grid via row-run union-find.

    Returns per-component bounding boxes (in continuous pixel coordinates,
    right/bottom exclusive) and whether each touches the image border.
    """
    h, w = free.shape
    parent: list[int] = []

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    runs_prev: list[tuple[int, int, int]] = []  # (x0, x1, run_id)
    run_rows: list[tuple[int, int, int]] = []  # per run: (y, x0, x1)
    for y in range(h):
        row = free[y]
        padded = np.empty(row.size + 2, dtype=np.int8)
        padded[0] = padded[-1] = 0
        padded[1:-1] = row
        edges = np.flatnonzero(np.diff(padded))
        runs_cur: list[tuple[int, int, int]] = []
        pi = 0
        for s, e in zip(edges[::2], edges[1::2]):
            rid = len(parent)
            parent.append(rid)
            run_rows.append((y, int(s), int(e)))
            # union with previous-row runs whose x-interval overlaps; pi only
            # skips runs ending at or before s, which cannot touch later runs
            while pi < len(runs_prev) and runs_prev[pi][1] <= s:
                pi += 1
            pj = pi
            while pj < len(runs_prev) and runs_prev[pj][0] < e:
                union(runs_prev[pj][2], rid)
                pj += 1
            runs_cur.append((int(s), int(e), rid))
        runs_prev = runs_cur

    boxes: dict[int, list[int]] = {}
    border: dict[int, bool] = {}
    for rid, (y, s, e) in enumerate(run_rows):
        root = find(rid)
        if root not in boxes:
            boxes[root] = [s, y, e, y + 1]
            border[root] = False
        else:
            b = boxes[root]
            b[0] = min(b[0], s)
            b[1] = min(b[1], y)
            b[2] = max(b[2], e)
            b[3] = max(b[3], y + 1)
        if y == 0 or y == h - 1 or s == 0 or e == w:
            border[root] = True
    out_boxes = []
    out_border = []
    for root in sorted(boxes):
        b = boxes[root]
        out_boxes.append(BBox(float(b[0]), float(b[1]), float(b[2]), float(b[3])))
        out_border.append(border[root])
    return out_boxes, out_border


def find_cell_boxes(mask: LineMask) -> list[BBox]:
    """Bounding boxes of interior (non-border) components of the free space."""
    lines = mask.horizontal | mask.vertical
    if not lines.any():
        return []
    boxes, border = _label_components(~lines)
    return [b for b, touches in zip(boxes, border) if not touches]


def select_tabular_regions(cells: Sequence[BBox], words: Sequence["Word"]) -> list[Region]:
    """Keep text-bearing cells, smallest first, that overlap nothing kept yet.

    "Contains text" means some word-box center lies inside the cell; kept
    cells are therefore pairwise non-intersecting (touching edges allowed).
    """
    centers = [w.box.center for w in words]
    kept: list[BBox] = []
    for cell in sorted(cells, key=lambda b: b.area):
        if not any(cell.contains_point(cx, cy) for cx, cy in centers):
            continue
        if any(intersect(cell, other) is not None for other in kept):
            continue
        kept.append(cell)
    return [Region(id=i, kind=RegionKind.TABULAR, box=b) for i, b in enumerate(kept)]


def cluster_paragraphs(
    words: Sequence["Word"],
    h_ths: float = DEFAULT_H_THS,
    v_ths: float = DEFAULT_V_THS,
) -> list[Region]:
    """Merge words into paragraph regions by gap thresholds.

    Two word boxes join the same cluster when their horizontal gap is at
    most ``h_ths`` and their vertical gap at most ``v_ths``, both measured
    in multiples of the median word-box height (a gap is 0 when the
    projections overlap); clusters are the transitive closure of that
    relation and each region box is the hull of its cluster.
    """
    if not words:
        return []
    heights = sorted(w.box.height for w in words)
    median_h = heights[len(heights) // 2]
    if median_h <= 0:
        median_h = 1.0
    h_limit = h_ths * median_h
    v_limit = v_ths * median_h

    n = len(words)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = sorted(range(n), key=lambda i: (words[i].box.y0, words[i].box.x0))
    for oi in range(n):
        i = order[oi]
        bi = words[i].box
        for oj in range(oi + 1, n):
            j = order[oj]
            bj = words[j].box
            if bj.y0 - bi.y1 > v_limit:
                break  # later rows only get farther in y
            if (
                interval_gap(bi, bj, Axis.HORIZONTAL) <= h_limit
                and interval_gap(bi, bj, Axis.VERTICAL) <= v_limit
            ):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    clusters: dict[int, list[BBox]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(words[i].box)
    ordered = sorted(clusters.values(), key=lambda boxes: (min(b.y0 for b in boxes), min(b.x0 for b in boxes)))
    return [Region(id=i, kind=RegionKind.PARAGRAPH, box=hull(boxes)) for i, boxes in enumerate(ordered)]


def extract_regions(
    doc: "Document",
    image: Optional[np.ndarray] = None,
    kernel_fraction: float = DEFAULT_KERNEL_FRACTION,
    h_ths: float = DEFAULT_H_THS,
    v_ths: float = DEFAULT_V_THS,
    threshold: int = DEFAULT_BINARIZE_THRESHOLD,
) -> list[Region]:
    """Tabular regions from the page image, paragraph fallback for the rest.

    Without an image only paragraph clustering runs. With one, cells are
    extracted first; any word whose center no kept cell covers is routed
    into paragraph clustering, so the union covers every word.
    """
    words = doc.words()
    regions: list[Region] = []
    missing = list(words)
    if image is not None:
        mask = detect_lines(image, kernel_fraction=kernel_fraction, threshold=threshold)
        cells = find_cell_boxes(mask)
        regions = select_tabular_regions(cells, words)
        missing = [
            w for w in words if not any(r.box.contains_point(*w.box.center) for r in regions)
        ]
    if missing:
        paragraphs = cluster_paragraphs(missing, h_ths=h_ths, v_ths=v_ths)
        base = len(regions)
        for r in paragraphs:
            regions.append(Region(id=base + r.id, kind=r.kind, box=r.box))
    return regions


def assign_region(entity, regions: Sequence[Region]) -> Optional[int]:
    """Region id with maximum IoU against the entity span box, if any overlap.

    Ties break toward the smaller region area, then the lower id.
    """
    best_id = None
    best_key = None
    for r in regions:
        score = iou(entity.span_box, r.box)
        if score <= 0.0:
            continue
        key = (score, -r.box.area, -r.id)
        if best_key is None or key > best_key:
            best_id = r.id
            best_key = key
    return best_id


def assign_all_regions(doc: "Document", regions: Sequence[Region]) -> None:
    """Attach regions to the document and set every entity's region id."""
    doc.regions = list(regions)
    for e in doc.entities:
        e.region_id = assign_region(e, regions)
