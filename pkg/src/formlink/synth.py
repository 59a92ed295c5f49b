"""Synthetic form generator with exact ground truth.

Produces FUNSD-format annotations (fed through the real parser), page
images for the ruled-table branch, known table-cell boxes, and known gold
question-answer links, so region extraction and training can be verified
end to end against construction-time truth. Layouts come in four kinds:

- tabular: an R x C ruled grid, one question-answer pair inside each cell
- paragraph: free-text groups of label/value lines, no rules
- mixed: a ruled grid in the top half plus paragraph groups below
- ambiguous: one answer per page whose candidate questions use three
  interchangeable spatial patterns; cross pages place all three candidates
  at once with a random gold, so a pair scorer cannot single one out
  (for studying over-prediction and the constraint objective)
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import BBox
from .ingest import Document, parse_document

WORD_H = 9
TOKENS = ["name", "date", "ref", "code", "qty", "total", "addr", "tel", "owner", "lot"]
VALUES = ["ok", "n/a", "blue", "42", "paris", "7mm", "x91", "none", "high", "low"]


@dataclass
class SynthSpec:
    docs: int = 10
    kind: str = "mixed"  # tabular | paragraph | mixed | ambiguous
    grid_rows: tuple[int, int] = (2, 3)
    grid_cols: tuple[int, int] = (2, 3)
    groups: tuple[int, int] = (2, 4)  # paragraph groups per page
    page_width: int = 480
    page_height: int = 640
    line_thickness: int = 2
    jitter: int = 4  # max random shift of each grid line, px
    distractors: int = 0  # extra unlinked header/other entities
    easy_share: float = 0.6  # ambiguous kind: exact share of single-candidate pages


@dataclass
class SynthDocument:
    annotation: dict
    doc: Document
    image: Optional[np.ndarray]
    cell_boxes: list[BBox]
    page_size: tuple[int, int]


def _word_width(text: str) -> int:
    return 4 + 3 * len(text)


class _Builder:
    """Accumulates FUNSD form elements for one page."""

    def __init__(self) -> None:
        self.form: list[dict] = []

    def add(self, label: str, words: list[tuple[str, BBox]], links: list[list[int]] | None = None) -> int:
        eid = len(self.form)
        boxes = [b for _, b in words]
        span = [
            min(b.x0 for b in boxes),
            min(b.y0 for b in boxes),
            max(b.x1 for b in boxes),
            max(b.y1 for b in boxes),
        ]
        self.form.append(
            {
                "id": eid,
                "text": " ".join(t for t, _ in words),
                "label": label,
                "box": [int(v) for v in span],
                "words": [{"text": t, "box": [int(b.x0), int(b.y0), int(b.x1), int(b.y1)]} for t, b in words],
                "linking": links or [],
            }
        )
        return eid

    def link(self, q_id: int, a_id: int, rng: np.random.Generator) -> None:
        # annotations in the wild carry either orientation; exercise both
        pair = [q_id, a_id] if rng.random() < 0.5 else [a_id, q_id]
        self.form[q_id]["linking"].append(pair)

    def annotation(self) -> dict:
        return {"form": self.form}


def _line_positions(rng, count, lo, hi, jitter, min_gap):
    base = np.linspace(lo, hi, count)
    pos = base + rng.integers(-jitter, jitter + 1, size=count)
    pos[0], pos[-1] = lo, hi
    pos = np.sort(pos)
    for i in range(1, count):  # jitter must never collapse a cell
        pos[i] = max(pos[i], pos[i - 1] + min_gap)
    return pos.astype(int)


def _qa_words(rng, x, y, cell_right):
    """A question word and an answer word side by side starting at (x, y)."""
    q_text = f"{TOKENS[rng.integers(0, len(TOKENS))]}:"
    a_text = str(VALUES[rng.integers(0, len(VALUES))])
    qw, aw = _word_width(q_text), _word_width(a_text)
    gap = int(rng.integers(4, 9))
    if x + qw + gap + aw > cell_right:  # clamp into the cell
        aw = max(6, cell_right - x - qw - gap)
    q_box = BBox(x, y, x + qw, y + WORD_H)
    a_box = BBox(x + qw + gap, y, x + qw + gap + aw, y + WORD_H)
    return (q_text, q_box), (a_text, a_box)


def _build_grid(builder, rng, image, spec, x_lo, x_hi, y_lo, y_hi, rows, cols):
    t = spec.line_thickness
    xs = _line_positions(rng, cols + 1, x_lo, x_hi, spec.jitter, 64)
    ys = _line_positions(rng, rows + 1, y_lo, y_hi, spec.jitter, 26)
    for x in xs:
        image[ys[0] : ys[-1] + t, x : x + t] = 0
    for y in ys:
        image[y : y + t, xs[0] : xs[-1] + t] = 0
    cells = []
    for r in range(rows):
        for c in range(cols):
            cell = BBox(float(xs[c] + t), float(ys[r] + t), float(xs[c + 1]), float(ys[r + 1]))
            cells.append(cell)
            y_word = int((cell.y0 + cell.y1) / 2 - WORD_H // 2)
            (q, q_box), (a, a_box) = _qa_words(rng, int(cell.x0) + 5, y_word, int(cell.x1) - 4)
            q_id = builder.add("question", [(q, q_box)])
            a_id = builder.add("answer", [(a, a_box)])
            builder.link(q_id, a_id, rng)
    return cells


def _build_groups(builder, rng, spec, y_lo, y_hi, count):
    """Stacked label/value paragraph groups; returns the next free y."""
    y = y_lo
    for _ in range(count):
        if y + 4 * WORD_H > y_hi:
            break
        x = int(rng.integers(12, max(13, spec.page_width // 3)))
        for _ in range(int(rng.integers(1, 4))):
            if y + WORD_H > y_hi:
                break
            (q, q_box), (a, a_box) = _qa_words(rng, x, y, spec.page_width - 10)
            q_id = builder.add("question", [(q, q_box)])
            a_id = builder.add("answer", [(a, a_box)])
            builder.link(q_id, a_id, rng)
            y += WORD_H + 4  # within the vertical merge threshold
        y += 4 * WORD_H  # beyond the merge threshold: next group is separate
    return y


def _candidate_boxes(rng, spec):
    """Anchor an answer and the three spatial patterns a question can take.

    The left and above candidates share the answer's paragraph cluster
    (left-right and top-bottom relations respectively); the far candidate
    sits in its own cluster to the left, giving the cross-region pattern.
    All three patterns appear as gold in easy pages, so none of them can
    be ruled out from the pair geometry alone. Texts are held constant so
    the only usable signals are the spatial patterns themselves.
    """
    a_text = "val"
    aw = _word_width(a_text)
    ax = int(rng.integers(170, spec.page_width - aw - 30))
    ay = int(rng.integers(80, spec.page_height - 60))
    a_box = BBox(ax, ay, ax + aw, ay + WORD_H)

    def q_box(text, pattern):
        qw = _word_width(text)
        if pattern == "left":
            return BBox(ax - 8 - qw, ay, ax - 8, ay + WORD_H)
        if pattern == "above":
            return BBox(ax, ay - WORD_H - 4, ax + qw, ay - 4)
        # far: separate cluster well to the left, same row
        return BBox(ax - 130 - qw, ay, ax - 130, ay + WORD_H)

    return a_text, a_box, q_box


def _ambiguous_page(builder, rng, spec, easy):
    """One answer per page; easy pages use a single gold question in one of
    the three patterns, cross pages place all three with gold drawn
    uniformly, so each pattern is linked often enough to look plausible
    while cross answers stay genuinely ambiguous."""
    a_text, a_box, q_box = _candidate_boxes(rng, spec)
    patterns = ["left", "above", "far"]
    q_text = "ref:"
    if easy:
        pattern = patterns[int(rng.integers(0, 3))]
        q_id = builder.add("question", [(q_text, q_box(q_text, pattern))])
        a_id = builder.add("answer", [(a_text, a_box)])
        builder.link(q_id, a_id, rng)
    else:
        q_ids = [builder.add("question", [(q_text, q_box(q_text, p))]) for p in patterns]
        a_id = builder.add("answer", [(a_text, a_box)])
        builder.link(q_ids[int(rng.integers(0, 3))], a_id, rng)


def _add_distractors(builder, rng, spec, y):
    for k in range(spec.distractors):
        if y + WORD_H > spec.page_height - 10:
            break
        text = f"note{k}"
        box = BBox(12, y, 12 + _word_width(text), y + WORD_H)
        builder.add("header" if k % 2 == 0 else "other", [(text, box)])
        y += 4 * WORD_H


def generate_document(
    spec: SynthSpec, rng: np.random.Generator, index: int, easy: bool = True
) -> SynthDocument:
    w, h = spec.page_width, spec.page_height
    builder = _Builder()
    image = np.full((h, w), 255, dtype=np.uint8)
    cells: list[BBox] = []
    kind = spec.kind
    if kind == "tabular":
        rows = int(rng.integers(spec.grid_rows[0], spec.grid_rows[1] + 1))
        cols = int(rng.integers(spec.grid_cols[0], spec.grid_cols[1] + 1))
        cells = _build_grid(builder, rng, image, spec, 24, w - 24, 24, h - 24, rows, cols)
    elif kind == "paragraph":
        count = int(rng.integers(spec.groups[0], spec.groups[1] + 1))
        y = _build_groups(builder, rng, spec, 20, h - 20, count)
        _add_distractors(builder, rng, spec, y)
    elif kind == "mixed":
        rows = int(rng.integers(spec.grid_rows[0], spec.grid_rows[1] + 1))
        cols = int(rng.integers(spec.grid_cols[0], spec.grid_cols[1] + 1))
        cells = _build_grid(builder, rng, image, spec, 24, w - 24, 24, h // 2 - 12, rows, cols)
        count = int(rng.integers(spec.groups[0], spec.groups[1] + 1))
        y = _build_groups(builder, rng, spec, h // 2 + 24, h - 20, count)
        _add_distractors(builder, rng, spec, y)
    elif kind == "ambiguous":
        _ambiguous_page(builder, rng, spec, easy)
    else:
        raise ValueError(f"unknown synthetic kind: {spec.kind!r}")

    annotation = builder.annotation()
    doc = parse_document(json.dumps(annotation).encode("utf-8"), (w, h), doc_id=f"synth_{kind}_{index:04d}")
    return SynthDocument(annotation=annotation, doc=doc, image=image, cell_boxes=cells, page_size=(w, h))


def make_synthetic_dataset(spec: SynthSpec, seed: int) -> list[SynthDocument]:
    """Deterministic corpus of `spec.docs` pages.

    Mixed corpora rotate page styles; ambiguous corpora pin the easy/cross
    page counts exactly at `easy_share` so pattern base rates do not drift
    with the seed.
    """
    rng = np.random.default_rng(seed)
    easy_flags = [True] * spec.docs
    if spec.kind == "ambiguous":
        n_easy = int(round(spec.easy_share * spec.docs))
        easy_flags = [i < n_easy for i in range(spec.docs)]
        rng.shuffle(easy_flags)
    out = []
    for i in range(spec.docs):
        doc_spec = spec
        if spec.kind == "mixed":
            # rotate page styles so the corpus covers all layout regimes
            style = ("tabular", "paragraph", "mixed")[i % 3]
            doc_spec = SynthSpec(**{**spec.__dict__, "kind": style})
        out.append(generate_document(doc_spec, rng, i, easy=easy_flags[i]))
    return out


def write_dataset(docs: list[SynthDocument], out_dir: str) -> list[str]:
    """Write <doc_id>.json plus <doc_id>.png pairs; returns the JSON paths."""
    from PIL import Image

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for sd in docs:
        base = os.path.join(out_dir, sd.doc.doc_id)
        with open(base + ".json", "w", encoding="utf-8") as fh:
            json.dump(sd.annotation, fh)
        if sd.image is not None:
            Image.fromarray(sd.image, mode="L").save(base + ".png")
        paths.append(base + ".json")
    return paths
