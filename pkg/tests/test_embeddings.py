import json

import numpy as np
import pytest

from formlink.embeddings import EmbeddingLookupError, HashFeaturizer, PrecomputedEmbeddings
from formlink.geometry import BBox
from formlink.ingest import Document, Entity, Label, Word


def entity(text="hello world", box=(10, 20, 110, 40)):
    words = [Word(t, BBox(*box)) for t in text.split()] if text else []
    return Entity(0, Label.QUESTION, words, BBox(*box))


class TestHashFeaturizer:
    def test_deterministic(self):
        f = HashFeaturizer(64)
        e = entity()
        a = f.features(e, 200, 100)
        b = f.features(e, 200, 100)
        assert np.array_equal(a, b)

    def test_empty_text_zero_hash_part(self):
        f = HashFeaturizer(64)
        e = entity(text="")
        e.words = []
        feats = f.features(e, 200, 100)
        assert not feats[:64].any()
        assert feats[64:].any()

    def test_geometry_features_normalized(self):
        f = HashFeaturizer(16)
        feats = f.features(entity(box=(0, 0, 200, 100)), 200, 100)
        geo = feats[16:]
        assert np.all(geo >= 0) and np.all(geo <= 1)
        np.testing.assert_allclose(geo, [0, 0, 1, 1, 1, 1, 0.5, 0.5])

    def test_translation_changes_only_geometry(self):
        f = HashFeaturizer(64)
        a = f.features(entity(box=(10, 10, 60, 30)), 200, 100)
        b = f.features(entity(box=(50, 40, 100, 60)), 200, 100)
        assert np.array_equal(a[:64], b[:64])
        assert not np.array_equal(a[64:], b[64:])

    def test_counts_clipped(self):
        f = HashFeaturizer(8)
        e = entity(text="aaaaaaaaaaaaaaaaaaaa")
        feats = f.features(e, 100, 100)
        assert feats[:8].max() <= 3

    def test_matrix_shape(self):
        f = HashFeaturizer(32)
        doc = Document("d", 100, 100, [entity()])
        assert f.matrix(doc, doc.entities).shape == (1, 40)
        assert f.matrix(doc, []).shape == (0, 40)


def write_sidecar(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


class TestPrecomputedEmbeddings:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        vec = [0.125, -2.5, 3.0, 0.0]
        write_sidecar(path, [{"doc_id": "d0", "entity_id": 3, "vector": vec}])
        emb = PrecomputedEmbeddings(str(path))
        np.testing.assert_array_equal(emb.vector("d0", 3), vec)
        assert emb.dim == 4

    def test_missing_key_names_ids(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_sidecar(path, [{"doc_id": "d0", "entity_id": 0, "vector": [1.0]}])
        emb = PrecomputedEmbeddings(str(path))
        with pytest.raises(EmbeddingLookupError, match=r"doc_id='d1' entity_id=7"):
            emb.vector("d1", 7)

    def test_ragged_dimensions_rejected(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_sidecar(
            path,
            [
                {"doc_id": "d", "entity_id": 0, "vector": [1.0, 2.0]},
                {"doc_id": "d", "entity_id": 1, "vector": [1.0, 2.0, 3.0]},
            ],
        )
        with pytest.raises(ValueError, match="ragged"):
            PrecomputedEmbeddings(str(path))

    def test_model_dimension_mismatch(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        write_sidecar(path, [{"doc_id": "d", "entity_id": 0, "vector": [1.0] * 4}])
        emb = PrecomputedEmbeddings(str(path))
        with pytest.raises(ValueError, match="dimension 4, model wants 8"):
            emb.require_dim(8)
