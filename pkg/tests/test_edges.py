import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from formlink.edges import EdgeLink, edge_bit_matrix, edge_embed, encode_link
from formlink.geometry import BBox
from formlink.ingest import Entity, Label
from formlink.regions import Region, RegionKind


# ---------------------------------------------------------------------------
# Brute-force oracle: a from-scratch reading of the indicator definitions,
# written against raw tuples so it shares nothing with the implementation.
# ---------------------------------------------------------------------------


def _overlap(lo1, hi1, lo2, hi2):
    return max(0.0, min(hi1, hi2) - max(lo1, lo2))


def _lr(b1, b2):
    x_disjoint = b1[2] <= b2[0] or b2[2] <= b1[0]
    return x_disjoint and _overlap(b1[1], b1[3], b2[1], b2[3]) > 0


def _tb(b1, b2):
    y_disjoint = b1[3] <= b2[1] or b2[3] <= b1[1]
    return y_disjoint and _overlap(b1[0], b1[2], b2[0], b2[2]) > 0


def oracle_bits(q_box, a_box, q_region, a_region):
    """q_region/a_region: (region_id, region_box) tuples or None."""
    bits = [0] * 7
    same = q_region is not None and a_region is not None and q_region[0] == a_region[0]
    if same:
        bits[0] = 1
        bits[1] = int(_lr(q_box, a_box))
        bits[2] = int(_tb(q_box, a_box))
    else:
        bits[3] = int(_lr(q_box, a_box))
        bits[4] = int(_tb(q_box, a_box))
        if q_region is not None and a_region is not None:
            bits[5] = int(_lr(q_region[1], a_region[1]))
            bits[6] = int(_tb(q_region[1], a_region[1]))
    return tuple(bits)


def entity(eid, label, box, region_id=None):
    e = Entity(eid, label, [], BBox(*box))
    e.region_id = region_id
    return e


def random_config(rng):
    """Random pair-plus-regions geometry; returns call args and oracle args."""

    def box(lo=0, hi=60):
        x = np.sort(rng.integers(lo, hi, 2))
        y = np.sort(rng.integers(lo, hi, 2))
        return (float(x[0]), float(y[0]), float(x[1]), float(y[1]))

    regions = [Region(i, RegionKind.PARAGRAPH, BBox(*box(0, 80))) for i in range(3)]
    rid_q = [None, 0, 1, 2][rng.integers(0, 4)]
    rid_a = [None, 0, 1, 2][rng.integers(0, 4)]
    q_box, a_box = box(), box()
    q = entity(0, Label.QUESTION, q_box, rid_q)
    a = entity(1, Label.ANSWER, a_box, rid_a)
    reg_q = (rid_q, regions[rid_q].box.as_tuple()) if rid_q is not None else None
    reg_a = (rid_a, regions[rid_a].box.as_tuple()) if rid_a is not None else None
    return q, a, regions, (q_box, a_box, reg_q, reg_a)


class TestEncodeLink:
    REGIONS = [
        Region(0, RegionKind.PARAGRAPH, BBox(0, 0, 100, 30)),
        Region(1, RegionKind.PARAGRAPH, BBox(0, 50, 100, 80)),
    ]

    def test_same_region_left_right(self):
        q = entity(0, Label.QUESTION, (0, 0, 10, 10), 0)
        a = entity(1, Label.ANSWER, (20, 0, 30, 10), 0)
        assert encode_link(q, a, self.REGIONS) == EdgeLink(1, 1, 0, 0, 0, 0, 0)

    def test_stacked_regions_and_entities(self):
        q = entity(0, Label.QUESTION, (0, 0, 10, 10), 0)
        a = entity(1, Label.ANSWER, (0, 60, 10, 70), 1)
        assert encode_link(q, a, self.REGIONS) == EdgeLink(0, 0, 0, 0, 1, 0, 1)

    def test_zero_vector_case(self):
        # regions overlap each other; entities overlap each other too
        regions = [
            Region(0, RegionKind.PARAGRAPH, BBox(0, 0, 100, 60)),
            Region(1, RegionKind.PARAGRAPH, BBox(0, 40, 100, 100)),
        ]
        q = entity(0, Label.QUESTION, (10, 30, 30, 50), 0)
        a = entity(1, Label.ANSWER, (20, 40, 40, 60), 1)
        assert encode_link(q, a, regions) == EdgeLink(0, 0, 0, 0, 0, 0, 0)

    def test_unassigned_region_zeroes_region_bits(self):
        q = entity(0, Label.QUESTION, (0, 0, 10, 10), None)
        a = entity(1, Label.ANSWER, (20, 0, 30, 10), 0)
        link = encode_link(q, a, self.REGIONS)
        assert link == EdgeLink(0, 0, 0, 1, 0, 0, 0)

    def test_symmetry_in_relation_bits(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            q, a, regions, _ = random_config(rng)
            ab = encode_link(q, a, regions)
            ba = encode_link(a, q, regions)
            assert ab == ba

    def test_mutual_exclusion_families(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            q, a, regions, _ = random_config(rng)
            link = encode_link(q, a, regions)
            if link.i_r:
                assert (link.e_lr_nr, link.e_tb_nr, link.r_lr, link.r_tb) == (0, 0, 0, 0)
            else:
                assert (link.e_lr_r, link.e_tb_r) == (0, 0)

    def test_agreement_with_bruteforce_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            q, a, regions, oracle_args = random_config(rng)
            assert encode_link(q, a, regions).bits == oracle_bits(*oracle_args)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_encode_link_matches_oracle_property(seed):
    rng = np.random.default_rng(seed)
    q, a, regions, oracle_args = random_config(rng)
    assert encode_link(q, a, regions).bits == oracle_bits(*oracle_args)


class TestEdgeBitMatrix:
    def test_question_major_order(self):
        regions = TestEncodeLink.REGIONS
        qs = [entity(0, Label.QUESTION, (0, 0, 10, 10), 0), entity(1, Label.QUESTION, (0, 60, 10, 70), 1)]
        answers = [entity(2, Label.ANSWER, (20, 0, 30, 10), 0)]
        rows = edge_bit_matrix(qs, answers, regions)
        assert rows.shape == (2, 7)
        assert tuple(rows[0]) == encode_link(qs[0], answers[0], regions).bits
        assert tuple(rows[1]) == encode_link(qs[1], answers[0], regions).bits


class TestEdgeEmbed:
    def test_zero_params_zero_vector(self):
        out = edge_embed(EdgeLink(1, 1, 0, 0, 0, 0, 0), np.zeros((7, 4)), np.zeros(4))
        np.testing.assert_array_equal(out, np.zeros(4))

    def test_zero_link_gives_activated_bias(self):
        bias = np.array([0.5, -0.5])
        out = edge_embed(EdgeLink(0, 0, 0, 0, 0, 0, 0), np.eye(7, 2), bias)
        np.testing.assert_allclose(out, [0.5, np.expm1(-0.5)])

    def test_golden_vector(self):
        # frozen from seed 42; verified by hand as elu(row0 + row2 + bias)
        rng = np.random.default_rng(42)
        w = rng.uniform(-0.39, 0.39, size=(7, 4))
        b = rng.normal(0, 0.1, size=4)
        out = edge_embed(EdgeLink(1, 0, 1, 0, 0, 0, 0), w, b)
        np.testing.assert_allclose(
            out,
            [-0.0345030996, -0.0423679777, 0.3930935965, 0.4461822523],
            atol=1e-9,
        )

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError, match="edge FFN"):
            edge_embed(EdgeLink(0, 0, 0, 0, 0, 0, 0), np.zeros((6, 4)), np.zeros(4))
