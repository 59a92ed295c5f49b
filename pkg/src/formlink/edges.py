"""Seven-bit spatial indicator vectors for question-answer pairs.

Bit order: [i_r, e_lr_r, e_tb_r, e_lr_nr, e_tb_nr, r_lr, r_tb]. The first
bit says whether both entities sit in the same region; the e-bits hold the
span-box left-right / top-bottom relation (split by same region or not);
the r-bits hold the relation between the two region boxes and only apply
across distinct regions. A pair with no region or box relation at all
encodes as the zero vector.
"""

from __future__ import annotations

from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .geometry import spatial_relation
from .ingest import Entity
from .regions import Region


class EdgeLink(NamedTuple):
    i_r: int
    e_lr_r: int
    e_tb_r: int
    e_lr_nr: int
    e_tb_nr: int
    r_lr: int
    r_tb: int

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(self)


def encode_link(q: Entity, a: Entity, regions: Sequence[Region] | Mapping[int, Region]) -> EdgeLink:
    """Encode the spatial relationship of a question-answer pair.

    Same-region pairs populate only the same-region family of bits;
    different-region pairs populate the entity-level bits plus the
    region-box bits (which stay 0 when either region is unassigned).
    """
    if not isinstance(regions, Mapping):
        regions = {r.id: r for r in regions}
    same_region = q.region_id is not None and q.region_id == a.region_id
    ent = spatial_relation(q.span_box, a.span_box)
    if same_region:
        return EdgeLink(1, int(ent.lr), int(ent.tb), 0, 0, 0, 0)
    r_lr = r_tb = 0
    if q.region_id is not None and a.region_id is not None:
        reg = spatial_relation(regions[q.region_id].box, regions[a.region_id].box)
        r_lr, r_tb = int(reg.lr), int(reg.tb)
    return EdgeLink(0, 0, 0, int(ent.lr), int(ent.tb), r_lr, r_tb)


def edge_bit_matrix(
    questions: Sequence[Entity],
    answers: Sequence[Entity],
    regions: Sequence[Region],
    dtype=np.float64,
) -> np.ndarray:
    """(num_q * num_a, 7) indicator rows in question-major pair order."""
    by_id = {r.id: r for r in regions}
    rows = np.zeros((len(questions) * len(answers), 7), dtype=dtype)
    for i, q in enumerate(questions):
        for j, a in enumerate(answers):
            rows[i * len(answers) + j] = encode_link(q, a, by_id)
    return rows


def edge_embed(link: EdgeLink, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Dense edge embedding: ELU of a single linear layer over the bits."""
    if weight.shape[0] != 7 or bias.shape[0] != weight.shape[1]:
        raise ValueError(f"edge FFN wants (7, dim) weight + (dim,) bias, got {weight.shape} + {bias.shape}")
    pre = np.asarray(link, dtype=weight.dtype) @ weight + bias
    return np.where(pre > 0, pre, np.expm1(np.minimum(pre, 0.0)))
