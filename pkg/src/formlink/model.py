"""Wires providers, edge features, graph attention and the relation head
into one differentiable per-document forward pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .edges import edge_bit_matrix
from .egat import EgatConfig, egat_forward
from .embeddings import GEOMETRY_FEATURES, HashFeaturizer, PrecomputedEmbeddings
from .ingest import Document, candidate_pairs
from .nn import (
    ModelParams,
    ParamSpec,
    Tensor,
    add,
    constant,
    elu,
    init_params,
    matmul,
    reshape,
    tsum,
)
from .relation import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    biaffine_score,
    loss_binary,
    loss_constraint,
    loss_total,
    pair_representations,
)

Provider = HashFeaturizer | PrecomputedEmbeddings


@dataclass
class ModelConfig:
    dim: int = 64  # entity embedding width; must be even
    heads: int = 2
    layers: int = 2
    pair_dim: int = 64  # twin FFN output width
    type_dim: int = 32  # type embedding width
    hash_dim: int = 512  # featurizer hash buckets
    dtype: str = "float32"

    def __post_init__(self) -> None:
        if self.dim % 2 != 0:
            raise ValueError(f"embedding dim must be even, got {self.dim}")

    @property
    def np_dtype(self):
        return np.float64 if self.dtype == "float64" else np.float32

    @property
    def edge_dim(self) -> int:
        return self.dim // 2

    @property
    def pair_input_dim(self) -> int:
        return 2 * self.dim + self.edge_dim + self.type_dim

    def egat(self) -> EgatConfig:
        return EgatConfig(layers=self.layers, heads=self.heads, dim=self.dim)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "heads": self.heads,
            "layers": self.layers,
            "pair_dim": self.pair_dim,
            "type_dim": self.type_dim,
            "hash_dim": self.hash_dim,
            "dtype": self.dtype,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ModelConfig":
        return cls(**{k: raw[k] for k in cls().to_dict() if k in raw})


def param_specs(cfg: ModelConfig, with_featurizer: bool = True) -> list[ParamSpec]:
    cfg.egat()  # validates width/layer/head invariants up front
    specs: list[ParamSpec] = []
    if with_featurizer:
        feat_in = cfg.hash_dim + GEOMETRY_FEATURES
        specs.append(ParamSpec("embed.w", (feat_in, cfg.dim), "weight", fan=(feat_in, cfg.dim)))
        specs.append(ParamSpec("embed.b", (cfg.dim,), "bias"))
    specs.append(ParamSpec("edge.w", (7, cfg.edge_dim), "weight", fan=(7, cfg.edge_dim)))
    specs.append(ParamSpec("edge.b", (cfg.edge_dim,), "bias"))
    for layer in range(cfg.layers):
        for head in range(cfg.heads):
            prefix = f"egat.l{layer}.h{head}"
            specs.append(ParamSpec(f"{prefix}.w", (cfg.dim, cfg.dim), "weight", fan=(cfg.dim, cfg.dim)))
            specs.append(ParamSpec(f"{prefix}.att", (2 * cfg.dim, 1), "weight", fan=(2 * cfg.dim, 1)))
    specs.append(ParamSpec("type.q", (cfg.type_dim,), "embedding"))
    specs.append(ParamSpec("type.a", (cfg.type_dim,), "embedding"))
    for side in ("q", "a"):
        specs.append(
            ParamSpec(
                f"head.{side}.w",
                (cfg.pair_input_dim, cfg.pair_dim),
                "weight",
                fan=(cfg.pair_input_dim, cfg.pair_dim),
            )
        )
        specs.append(ParamSpec(f"head.{side}.b", (cfg.pair_dim,), "bias"))
    # Classifier tensors start at zero so untrained pair scores sit at
    # exactly p = (0.5, 0.5) regardless of the upstream activations.
    specs.append(ParamSpec("biaffine.u", (cfg.pair_dim, 2, cfg.pair_dim), "zero"))
    specs.append(ParamSpec("biaffine.w", (2, 2 * cfg.pair_dim), "zero"))
    specs.append(ParamSpec("biaffine.b", (2,), "bias"))
    return specs


def build_params(cfg: ModelConfig, seed: int, with_featurizer: bool = True) -> ModelParams:
    return init_params(param_specs(cfg, with_featurizer), seed=seed, dtype=cfg.np_dtype)


@dataclass
class PreparedDocument:
    """Per-document constants the forward pass consumes."""

    doc: Document
    q_ids: list[int]
    a_ids: list[int]
    q_feats: np.ndarray
    a_feats: np.ndarray
    bits: np.ndarray  # (num_pairs, 7), question-major
    labels: np.ndarray  # (num_pairs,)
    precomputed: bool

    @property
    def num_questions(self) -> int:
        return len(self.q_ids)

    @property
    def num_answers(self) -> int:
        return len(self.a_ids)

    @property
    def num_pairs(self) -> int:
        return len(self.labels)

    def pair_ids(self) -> list[tuple[int, int]]:
        return [(q, a) for q in self.q_ids for a in self.a_ids]


def prepare_document(doc: Document, provider: Provider, cfg: ModelConfig) -> PreparedDocument:
    """Freeze one document into feature arrays (regions must be assigned)."""
    questions = doc.questions()
    answers = doc.answers()
    dtype = cfg.np_dtype
    precomputed = isinstance(provider, PrecomputedEmbeddings)
    if precomputed:
        provider.require_dim(cfg.dim)
    q_feats = provider.matrix(doc, questions).astype(dtype)
    a_feats = provider.matrix(doc, answers).astype(dtype)
    bits = edge_bit_matrix(questions, answers, doc.regions, dtype=dtype)
    labels = np.array([y for _, _, y in candidate_pairs(doc)], dtype=np.int64)
    return PreparedDocument(
        doc=doc,
        q_ids=[e.id for e in questions],
        a_ids=[e.id for e in answers],
        q_feats=q_feats,
        a_feats=a_feats,
        bits=bits,
        labels=labels,
        precomputed=precomputed,
    )


@dataclass
class ForwardResult:
    probs: np.ndarray  # (num_pairs, 2) detached probabilities
    loss_b: Tensor
    loss_c: Tensor
    loss: Tensor

    def link_probs(self) -> np.ndarray:
        return self.probs[:, 1]


def _embed_nodes(feats: np.ndarray, params: ModelParams, precomputed: bool) -> Tensor:
    if precomputed:
        return constant(feats)
    return elu(add(matmul(constant(feats), params["embed.w"]), params["embed.b"]))


def forward_document(
    prep: PreparedDocument,
    params: ModelParams,
    cfg: ModelConfig,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
) -> ForwardResult:
    """Full differentiable pass for one document."""
    m, n = prep.num_questions, prep.num_answers
    dtype = cfg.np_dtype
    if prep.num_pairs == 0:
        zero = constant(np.zeros((), dtype=dtype))
        return ForwardResult(np.zeros((0, 2), dtype=dtype), zero, zero, zero)

    q0 = _embed_nodes(prep.q_feats, params, prep.precomputed)
    a0 = _embed_nodes(prep.a_feats, params, prep.precomputed)
    edge_vecs = elu(add(matmul(constant(prep.bits), params["edge.w"]), params["edge.b"]))
    e_sum = reshape(tsum(edge_vecs, axis=1), (m, n))
    layer_heads = [
        [(params[f"egat.l{l}.h{k}.w"], params[f"egat.l{l}.h{k}.att"]) for k in range(cfg.heads)]
        for l in range(cfg.layers)
    ]
    q_final, a_final = egat_forward(q0, a0, e_sum, layer_heads)
    h_q, h_a = pair_representations(
        q0,
        q_final,
        a0,
        a_final,
        edge_vecs,
        params["type.q"],
        params["type.a"],
        (params["head.q.w"], params["head.q.b"]),
        (params["head.a.w"], params["head.a.b"]),
    )
    _, probs = biaffine_score(h_q, h_a, params["biaffine.u"], params["biaffine.w"], params["biaffine.b"])
    l_b = loss_binary(probs, prep.labels)
    l_c = loss_constraint(probs, prep.labels, m, n)
    return ForwardResult(probs.value.copy(), l_b, l_c, loss_total(l_b, l_c, alpha, beta))
