"""Pair scoring: twin feed-forward nets, biaffine classifier, losses, decoding.

Each candidate pair concatenates, in fixed order, the provider embedding,
the final graph-attention embedding, the pair's edge embedding, and the
shared per-type embedding, separately for the question and answer sides.
Class index 1 means "linked"; probabilities come from a two-class softmax.
"""

from __future__ import annotations

from typing import Iterable, Literal, Sequence

import numpy as np

from .nn import (
    Tensor,
    absolute,
    add,
    concat,
    constant,
    elu,
    gather_rows,
    hadamard,
    log,
    matmul,
    mean,
    pairwise_bilinear,
    reshape,
    scalar_mul,
    softmax,
    transpose,
    tsum,
)

DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 0.02

DecodeMode = Literal["argmax", "constrained"]


def pair_inputs(
    embed: Tensor,
    final: Tensor,
    edge_vecs: Tensor,
    type_vec: Tensor,
    index: np.ndarray,
) -> Tensor:
    """Per-pair concat rows: entity embedding, graph output, edge, type."""
    num_pairs = edge_vecs.shape[0]
    type_row = reshape(type_vec, (1, type_vec.shape[0]))
    return concat(
        [
            gather_rows(embed, index),
            gather_rows(final, index),
            edge_vecs,
            gather_rows(type_row, np.zeros(num_pairs, dtype=np.intp)),
        ],
        axis=1,
    )


def pair_representations(
    q_embed: Tensor,
    q_final: Tensor,
    a_embed: Tensor,
    a_final: Tensor,
    edge_vecs: Tensor,
    type_q: Tensor,
    type_a: Tensor,
    ffn_q: tuple[Tensor, Tensor],
    ffn_a: tuple[Tensor, Tensor],
) -> tuple[Tensor, Tensor]:
    """Project every question-major pair through the twin FFNs.

    edge_vecs holds one row per (question i, answer j) pair, i-major;
    both FFNs are one linear layer followed by ELU.
    """
    m = q_embed.shape[0]
    n = a_embed.shape[0]
    idx_q = np.repeat(np.arange(m, dtype=np.intp), n)
    idx_a = np.tile(np.arange(n, dtype=np.intp), m)
    x_q = pair_inputs(q_embed, q_final, edge_vecs, type_q, idx_q)
    x_a = pair_inputs(a_embed, a_final, edge_vecs, type_a, idx_a)
    h_q = elu(add(matmul(x_q, ffn_q[0]), ffn_q[1]))
    h_a = elu(add(matmul(x_a, ffn_a[0]), ffn_a[1]))
    return h_q, h_a


def biaffine_score(
    h_q: Tensor,
    h_a: Tensor,
    u: Tensor,
    w: Tensor,
    b: Tensor,
) -> tuple[Tensor, Tensor]:
    """Class scores s[r, k] = hq U_k ha + W_k . (hq ++ ha) + b_k, plus softmax."""
    bilinear = pairwise_bilinear(h_q, u, h_a)
    linear = matmul(concat([h_q, h_a], axis=1), transpose(w))
    scores = add(add(bilinear, linear), b)
    return scores, softmax(scores, axis=1)


def loss_binary(probs: Tensor, labels: np.ndarray) -> Tensor:
    """Mean two-class cross-entropy over all candidate pairs."""
    if probs.shape[0] == 0:
        return constant(0.0, dtype=probs.dtype)
    onehot = np.zeros(probs.shape, dtype=probs.dtype)
    onehot[np.arange(len(labels)), labels.astype(int)] = 1.0
    picked = tsum(hadamard(log(probs), constant(onehot)), axis=1)
    return scalar_mul(-1.0, mean(picked))


def loss_constraint(probs: Tensor, labels: np.ndarray, m: int, n: int) -> Tensor:
    """Answer-exclusivity regularizer over gold pairs.

    For each gold (q_i, a_j), penalize |log p1(i, j) - mean_k log(1 - p1(k, j))|
    over the other questions k paired with the same answer; pairs without
    competitors, and all non-gold pairs, contribute nothing.
    """
    gold = labels.reshape(m, n).astype(bool) if m * n else np.zeros((m, n), dtype=bool)
    num_gold = int(gold.sum())
    if m < 2 or num_gold == 0:
        return constant(0.0, dtype=probs.dtype)
    logp = log(probs)
    pick1 = constant(np.array([[0.0, 1.0]], dtype=probs.dtype))
    pick0 = constant(np.array([[1.0, 0.0]], dtype=probs.dtype))
    lp1 = reshape(tsum(hadamard(logp, pick1), axis=1), (m, n))
    # two-class softmax: 1 - p1 is exactly p0
    lp0 = reshape(tsum(hadamard(logp, pick0), axis=1), (m, n))
    averager = np.full((m, m), 1.0 / (m - 1), dtype=probs.dtype)
    np.fill_diagonal(averager, 0.0)
    competitors = matmul(constant(averager), lp0)
    gap = absolute(add(lp1, scalar_mul(-1.0, competitors)))
    masked = hadamard(gap, constant(gold.astype(probs.dtype)))
    return scalar_mul(1.0 / num_gold, tsum(masked))


def loss_total(l_b: Tensor, l_c: Tensor, alpha: float = DEFAULT_ALPHA, beta: float = DEFAULT_BETA) -> Tensor:
    return add(scalar_mul(alpha, l_b), scalar_mul(beta, l_c))


def decode(
    pairs: Iterable[tuple[int, int, float]],
    mode: DecodeMode = "argmax",
) -> set[tuple[int, int]]:
    """Turn per-pair link probabilities into a predicted link set.

    argmax keeps every pair with p1 > 0.5; constrained additionally keeps,
    per answer, only the best-scoring question (ties to the lower id), so
    no answer ever receives two links.
    """
    positive = [(q, a, p1) for q, a, p1 in pairs if p1 > 0.5]
    if mode == "argmax":
        return {(q, a) for q, a, _ in positive}
    if mode != "constrained":
        raise ValueError(f"unknown decode mode: {mode!r}")
    best: dict[int, tuple[float, int]] = {}
    for q, a, p1 in positive:
        key = (p1, -q)  # higher probability wins, then lower question id
        if a not in best or key > best[a]:
            best[a] = key
    return {(-neg_q, a) for a, (_, neg_q) in best.items()}
