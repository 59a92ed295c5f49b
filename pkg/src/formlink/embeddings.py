"""Entity-embedding providers.

Two interchangeable sources feed the graph: exact vectors loaded from a
JSON-lines sidecar, or a trainable hashing featurizer that needs no
tokenizer and treats text as raw bytes, so it works for any language.
"""

from __future__ import annotations

import json
from typing import Iterable

import numpy as np

from .ingest import Document, Entity

GEOMETRY_FEATURES = 8
DEFAULT_HASH_DIM = 512
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_COUNT_CLIP = 3


class EmbeddingLookupError(KeyError):
    """A (doc_id, entity_id) pair is missing from the sidecar file."""


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


class PrecomputedEmbeddings:
    """Entity vectors from a sidecar of {"doc_id", "entity_id", "vector"} lines."""

    def __init__(self, path: str):
        self.path = path
        self._table: dict[tuple[str, int], np.ndarray] = {}
        self.dim: int | None = None
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                vec = np.asarray(row["vector"], dtype=np.float64)
                if vec.ndim != 1:
                    raise ValueError(f"{path}:{line_no}: vector must be 1-D")
                if self.dim is None:
                    self.dim = vec.shape[0]
                elif vec.shape[0] != self.dim:
                    raise ValueError(
                        f"{path}:{line_no}: ragged vector length {vec.shape[0]} != {self.dim}"
                    )
                self._table[(str(row["doc_id"]), int(row["entity_id"]))] = vec

    def require_dim(self, expected: int) -> None:
        if self.dim != expected:
            raise ValueError(f"embeddings in {self.path} have dimension {self.dim}, model wants {expected}")

    def vector(self, doc_id: str, entity_id: int) -> np.ndarray:
        key = (doc_id, entity_id)
        if key not in self._table:
            raise EmbeddingLookupError(f"no embedding for doc_id={doc_id!r} entity_id={entity_id}")
        return self._table[key]

    def matrix(self, doc: Document, entities: Iterable[Entity]) -> np.ndarray:
        entities = list(entities)
        if not entities:
            return np.zeros((0, self.dim or 0), dtype=np.float64)
        return np.stack([self.vector(doc.doc_id, e.id) for e in entities])


class HashFeaturizer:
    """Character-trigram hash counts plus normalized box geometry.

    Produces raw feature rows of width hash_dim + 8; the trainable
    projection down to the model dimension lives with the model parameters
    so it participates in end-to-end training.
    """

    def __init__(self, hash_dim: int = DEFAULT_HASH_DIM):
        self.hash_dim = hash_dim

    @property
    def feature_dim(self) -> int:
        return self.hash_dim + GEOMETRY_FEATURES

    def features(self, entity: Entity, page_width: float, page_height: float) -> np.ndarray:
        out = np.zeros(self.feature_dim, dtype=np.float64)
        text = entity.text
        for i in range(len(text) - 2):
            slot = _fnv1a(text[i : i + 3].encode("utf-8")) % self.hash_dim
            if out[slot] < _COUNT_CLIP:
                out[slot] += 1.0
        b = entity.span_box
        pw = page_width or 1.0
        ph = page_height or 1.0
        cx, cy = b.center
        out[self.hash_dim :] = (
            b.x0 / pw,
            b.y0 / ph,
            b.x1 / pw,
            b.y1 / ph,
            b.width / pw,
            b.height / ph,
            cx / pw,
            cy / ph,
        )
        return out

    def matrix(self, doc: Document, entities: Iterable[Entity]) -> np.ndarray:
        entities = list(entities)
        if not entities:
            return np.zeros((0, self.feature_dim), dtype=np.float64)
        return np.stack([self.features(e, doc.page_width, doc.page_height) for e in entities])
