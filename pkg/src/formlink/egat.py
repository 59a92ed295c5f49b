"""Edge-aware graph attention over a complete question-answer bipartite graph.

Attention is restricted to the opposite partition, which is the whole
neighborhood of any node in a complete bipartite graph. Raw pair logits
are LeakyReLU of a learned projection-and-score, scaled by the summed edge
embedding of the pair, then softmax-normalized over the neighbor axis.
Node updates add the attention-weighted neighbor projections to the layer
input (residual), average the attention heads, and pass through ELU.
Feature width is preserved at every layer, and the edge embeddings stay
fixed through the stack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import Tensor, add, elu, gather_rows, hadamard, leaky_relu, matmul, scalar_mul, softmax, transpose

LEAKY_SLOPE = 0.2


@dataclass
class EgatConfig:
    layers: int = 2
    heads: int = 2
    dim: int = 64  # node feature width; must be even

    def __post_init__(self) -> None:
        if self.dim % 2 != 0:
            raise ValueError(f"feature dim must be even, got {self.dim}")
        if self.layers < 1 or self.heads < 1:
            raise ValueError("layers and heads must be >= 1")


def attention_logit(q_vec: np.ndarray, a_vec: np.ndarray, w: np.ndarray, att: np.ndarray) -> float:
    """Raw (un-normalized, un-scaled) attention logit for one ordered pair."""
    projected = np.concatenate([q_vec @ w, a_vec @ w])
    z = float(projected @ att.reshape(-1))
    return z if z > 0 else LEAKY_SLOPE * z


def edge_scaled_attention(c: Tensor, e_sum: Tensor, axis: int) -> Tensor:
    """Scale pair logits by summed edge embeddings, then softmax over axis."""
    return softmax(hadamard(c, e_sum), axis=axis)


def layer_forward(
    q: Tensor,
    a: Tensor,
    e_sum: Tensor,
    heads: list[tuple[Tensor, Tensor]],
) -> tuple[Tensor, Tensor]:
    """One attention layer; heads holds (square projection, doubled-width score vector) pairs."""
    m = q.shape[0]
    n = a.shape[0]
    if m == 0 or n == 0:
        # Empty neighbor sums: only the residual survives the head mean.
        return elu(q), elu(a)
    dim = q.shape[1]
    idx_first = np.arange(dim)
    idx_second = np.arange(dim, 2 * dim)
    acc_q: Tensor | None = None
    acc_a: Tensor | None = None
    for w, att in heads:
        qp = matmul(q, w)
        ap = matmul(a, w)
        att_first = gather_rows(att, idx_first)
        att_second = gather_rows(att, idx_second)
        # question update: logit(q_i, a_j) puts q in att's first slot
        score_q = matmul(qp, att_first)  # (m, 1)
        score_a = matmul(ap, att_second)  # (n, 1)
        c_q = leaky_relu(add(score_q, transpose(score_a)), LEAKY_SLOPE)
        alpha_q = edge_scaled_attention(c_q, e_sum, axis=1)
        head_q = add(q, matmul(alpha_q, ap))
        # answer update: same pair grid, roles swapped inside att
        score_a1 = matmul(ap, att_first)  # (n, 1)
        score_q2 = matmul(qp, att_second)  # (m, 1)
        c_a = leaky_relu(add(score_q2, transpose(score_a1)), LEAKY_SLOPE)
        alpha_a = edge_scaled_attention(c_a, e_sum, axis=0)
        head_a = add(a, matmul(transpose(alpha_a), qp))
        acc_q = head_q if acc_q is None else add(acc_q, head_q)
        acc_a = head_a if acc_a is None else add(acc_a, head_a)
    k = float(len(heads))
    return elu(scalar_mul(1.0 / k, acc_q)), elu(scalar_mul(1.0 / k, acc_a))


def egat_forward(
    q: Tensor,
    a: Tensor,
    e_sum: Tensor,
    layer_heads: list[list[tuple[Tensor, Tensor]]],
) -> tuple[Tensor, Tensor]:
    """Run the full stack; returns final node embeddings, width preserved."""
    for heads in layer_heads:
        q, a = layer_forward(q, a, e_sum, heads)
    return q, a
