"""Deterministic SVG overlays of entities, regions, and predicted links.

Two color conventions are kept apart by mode: prediction overlays outline
questions in red, answers in green, and draw each link as a blue line
between box centers; region overlays use blue for entity boxes, red for
paragraph regions, and green for tabular regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

from .geometry import BBox
from .ingest import Document, Label

RenderMode = Literal["predictions", "regions"]

_ENTITY_COLORS = {
    Label.QUESTION: "#d62728",  # red
    Label.ANSWER: "#2ca02c",  # green
    Label.HEADER: "#7f7f7f",
    Label.OTHER: "#bbbbbb",
}
_REGION_COLORS = {"paragraph": "#d62728", "tabular": "#2ca02c"}
_LINK_COLOR = "#1f77b4"  # blue


@dataclass
class OverlayScene:
    """Resolved geometry for one page overlay."""

    page_width: float
    page_height: float
    entities: list[tuple[int, Label, BBox]]
    regions: list[tuple[int, str, BBox]] = field(default_factory=list)
    links: list[tuple[BBox, BBox, Optional[float]]] = field(default_factory=list)


def scene_from_document(
    doc: Document,
    links: Optional[list[tuple[int, int]]] = None,
    scores: Optional[list[float]] = None,
) -> OverlayScene:
    """Build a scene; links default to the document's gold links.

    Raises KeyError when a link names an entity the document lacks.
    """
    if links is None:
        links = sorted(doc.gold_links)
    resolved = []
    for idx, (q_id, a_id) in enumerate(links):
        q = doc.entity_by_id(q_id)
        a = doc.entity_by_id(a_id)
        score = scores[idx] if scores is not None else None
        resolved.append((q.span_box, a.span_box, score))
    return OverlayScene(
        page_width=doc.page_width,
        page_height=doc.page_height,
        entities=[(e.id, e.label, e.span_box) for e in doc.entities],
        regions=[(r.id, r.kind.value, r.box) for r in doc.regions],
        links=resolved,
    )


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _rect(box: BBox, color: str, width: float = 1.0) -> str:
    return (
        f'<rect x="{_fmt(box.x0)}" y="{_fmt(box.y0)}" width="{_fmt(box.width)}" '
        f'height="{_fmt(box.height)}" fill="none" stroke="{color}" stroke-width="{_fmt(width)}"/>'
    )


def render_overlay(scene: OverlayScene, mode: RenderMode = "predictions") -> str:
    """Render a scene to an SVG 1.1 document; identical scenes give identical bytes."""
    if mode not in ("predictions", "regions"):
        raise ValueError(f"unknown render mode: {mode!r}")
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(scene.page_width)}" height="{_fmt(scene.page_height)}" '
        f'viewBox="0 0 {_fmt(scene.page_width)} {_fmt(scene.page_height)}">',
        f'<rect x="0" y="0" width="{_fmt(scene.page_width)}" height="{_fmt(scene.page_height)}" '
        'fill="white" stroke="black" stroke-width="1"/>',
    ]
    if mode == "regions":
        for _, label, box in scene.entities:
            lines.append(_rect(box, "#1f77b4"))
        for _, kind, box in scene.regions:
            lines.append(_rect(box, _REGION_COLORS.get(kind, "#7f7f7f"), width=1.5))
    else:
        for _, label, box in scene.entities:
            lines.append(_rect(box, _ENTITY_COLORS[label]))
        for q_box, a_box, score in scene.links:
            qx, qy = q_box.center
            ax, ay = a_box.center
            title = f"<title>{score:.4f}</title>" if score is not None else ""
            lines.append(
                f'<line x1="{_fmt(qx)}" y1="{_fmt(qy)}" x2="{_fmt(ax)}" y2="{_fmt(ay)}" '
                f'stroke="{_LINK_COLOR}" stroke-width="1.5">{title}</line>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
