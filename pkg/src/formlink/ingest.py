"""FUNSD/XFUND annotation parsing into the internal document model.

The on-disk format is a JSON object with a top-level ``form`` array whose
elements carry ``id``, ``text``, ``label``, ``box`` ([x0, y0, x1, y1]),
``words`` ([{"text", "box"}]) and ``linking`` ([[id, id], ...]). Text is
treated as opaque; no language-specific assumptions are made.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .geometry import BBox, hull
from .regions import Region, region_from_dict

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    """Malformed annotation file; includes the byte offset when known."""


class ValidationError(ValueError):
    """Well-formed JSON whose content violates the annotation schema."""


class Label(Enum):
    QUESTION = "question"
    ANSWER = "answer"
    HEADER = "header"
    OTHER = "other"


@dataclass
class Word:
    text: str
    box: BBox


@dataclass
class Entity:
    id: int
    label: Label
    words: list[Word]
    span_box: BBox
    region_id: Optional[int] = None

    @property
    def text(self) -> str:
        return " ".join(w.text for w in self.words)


@dataclass
class Document:
    doc_id: str
    page_width: float
    page_height: float
    entities: list[Entity]
    regions: list[Region] = field(default_factory=list)
    gold_links: set[tuple[int, int]] = field(default_factory=set)
    image_path: Optional[str] = None

    def entity_by_id(self, entity_id: int) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(f"no entity {entity_id} in document {self.doc_id!r}")

    def questions(self) -> list[Entity]:
        return [e for e in self.entities if e.label is Label.QUESTION]

    def answers(self) -> list[Entity]:
        return [e for e in self.entities if e.label is Label.ANSWER]

    def words(self) -> list[Word]:
        return [w for e in self.entities for w in e.words]


def _box_from_list(raw, where: str) -> BBox:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise ValidationError(f"{where}: box must be [x0, y0, x1, y1], got {raw!r}")
    x0, y0, x1, y1 = (float(v) for v in raw)
    # Tolerate the occasional flipped corner seen in scanned-form annotations.
    return BBox(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))


def merge_span_box(entity: Entity) -> BBox:
    """Hull of the entity's word boxes; the stored span box when wordless."""
    if not entity.words:
        return entity.span_box
    return hull([w.box for w in entity.words])


def parse_document(
    data: bytes | str,
    page_size: tuple[float, float],
    doc_id: str = "",
    image_path: str | None = None,
) -> Document:
    """Parse one FUNSD-format annotation file.

    Span boxes are recomputed as the hull of the word boxes whenever words
    exist. ``linking`` pairs are oriented as (question, answer) using the
    entity labels; pairs that do not connect a question to an answer are
    dropped with a warning, while links naming unknown ids are errors.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON at byte offset {e.pos}: {e.msg}") from e
    if not isinstance(raw, dict) or not isinstance(raw.get("form"), list):
        raise ValidationError("annotation must be an object with a 'form' array")

    entities: list[Entity] = []
    seen_ids: set[int] = set()
    for element in raw["form"]:
        eid = element.get("id")
        if not isinstance(eid, int):
            raise ValidationError(f"entity id missing or not an integer: {eid!r}")
        if eid in seen_ids:
            raise ValidationError(f"duplicate entity id {eid}")
        seen_ids.add(eid)
        label_raw = str(element.get("label", ""))
        try:
            label = Label(label_raw.lower())
        except ValueError:
            raise ValidationError(f"entity {eid}: unknown label {label_raw!r}") from None
        words = [
            Word(text=str(w.get("text", "")), box=_box_from_list(w.get("box"), f"entity {eid} word"))
            for w in element.get("words", [])
        ]
        if words:
            span = hull([w.box for w in words])
        else:
            span = _box_from_list(element.get("box"), f"entity {eid}")
        entities.append(Entity(id=eid, label=label, words=words, span_box=span))

    by_id = {e.id: e for e in entities}
    gold_links: set[tuple[int, int]] = set()
    for element in raw["form"]:
        for pair in element.get("linking", []) or []:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ValidationError(f"bad linking entry {pair!r}")
            a, b = pair
            if a not in by_id or b not in by_id:
                raise ValidationError(f"linking entry {pair!r} names a missing entity id")
            la, lb = by_id[a].label, by_id[b].label
            if la is Label.QUESTION and lb is Label.ANSWER:
                gold_links.add((a, b))
            elif la is Label.ANSWER and lb is Label.QUESTION:
                gold_links.add((b, a))
            else:
                logger.warning(
                    "document %s: dropping link %s between labels (%s, %s)",
                    doc_id or "<unnamed>",
                    pair,
                    la.value,
                    lb.value,
                )

    return Document(
        doc_id=doc_id,
        page_width=float(page_size[0]),
        page_height=float(page_size[1]),
        entities=entities,
        gold_links=gold_links,
        image_path=image_path,
    )


def candidate_pairs(doc: Document) -> list[tuple[int, int, int]]:
    """Full question x answer cross product as (q_id, a_id, gold label)."""
    out = []
    for q in doc.questions():
        for a in doc.answers():
            label = 1 if (q.id, a.id) in doc.gold_links else 0
            out.append((q.id, a.id, label))
    return out


# ---------------------------------------------------------------------------
# debugging serialization of the internal model
# ---------------------------------------------------------------------------


def document_to_dict(doc: Document) -> dict:
    return {
        "doc_id": doc.doc_id,
        "page_width": doc.page_width,
        "page_height": doc.page_height,
        "image_path": doc.image_path,
        "entities": [
            {
                "id": e.id,
                "label": e.label.value,
                "span_box": list(e.span_box.as_tuple()),
                "region_id": e.region_id,
                "words": [{"text": w.text, "box": list(w.box.as_tuple())} for w in e.words],
            }
            for e in doc.entities
        ],
        "regions": [
            {"id": r.id, "kind": r.kind.value, "box": list(r.box.as_tuple())} for r in doc.regions
        ],
        "gold_links": sorted(doc.gold_links),
    }


def document_from_dict(raw: dict) -> Document:
    entities = [
        Entity(
            id=e["id"],
            label=Label(e["label"]),
            words=[Word(text=w["text"], box=BBox(*w["box"])) for w in e["words"]],
            span_box=BBox(*e["span_box"]),
            region_id=e.get("region_id"),
        )
        for e in raw["entities"]
    ]
    return Document(
        doc_id=raw["doc_id"],
        page_width=raw["page_width"],
        page_height=raw["page_height"],
        entities=entities,
        regions=[region_from_dict(r) for r in raw.get("regions", [])],
        gold_links={(q, a) for q, a in raw.get("gold_links", [])},
        image_path=raw.get("image_path"),
    )
