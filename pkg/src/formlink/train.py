"""Training loop, micro-averaged link metrics, and experiment configuration."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import ForwardResult, ModelConfig, PreparedDocument, build_params, forward_document
from .nn import AdamState, DivergedError, ModelParams, adam_step, add, lr_schedule, scalar_mul
from .relation import DecodeMode, decode

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    steps: int = 4500
    batch_size: int = 4
    base_lr: float = 5e-5
    warmup_ratio: float = 0.1
    alpha: float = 1.0
    beta: float = 0.02
    seed: int = 0
    model: ModelConfig = field(default_factory=ModelConfig)
    eval_every: int = 0  # 0: evaluate only after the last step
    decode_mode: DecodeMode = "argmax"

    def __post_init__(self) -> None:
        if self.steps <= 0 or self.batch_size <= 0 or self.base_lr <= 0:
            raise ValueError("steps, batch_size and base_lr must be positive")
        if not 0.0 <= self.warmup_ratio < 1.0:
            raise ValueError(f"warmup_ratio must be in [0, 1), got {self.warmup_ratio}")

    def to_dict(self) -> dict:
        out = {
            "steps": self.steps,
            "batch_size": self.batch_size,
            "base_lr": self.base_lr,
            "warmup_ratio": self.warmup_ratio,
            "alpha": self.alpha,
            "beta": self.beta,
            "seed": self.seed,
            "eval_every": self.eval_every,
            "decode_mode": self.decode_mode,
        }
        out.update(self.model.to_dict())
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainConfig":
        own = {
            k: raw[k]
            for k in (
                "steps",
                "batch_size",
                "base_lr",
                "warmup_ratio",
                "alpha",
                "beta",
                "seed",
                "eval_every",
                "decode_mode",
            )
            if k in raw
        }
        return cls(model=ModelConfig.from_dict(raw), **own)

    @classmethod
    def from_file(cls, path: str) -> "TrainConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TraceRow:
    step: int
    lr: float
    loss_b: float
    loss_c: float
    loss: float


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    per_document: list[dict] = field(default_factory=list)

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, per_document: list[dict]) -> "EvalReport":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(precision, recall, f1, tp, fp, fn, per_document)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "per_document": self.per_document,
        }


@dataclass
class TrainResult:
    params: ModelParams
    trace: list[TraceRow]
    eval_history: list[tuple[int, EvalReport]]
    skipped_empty: int

    @property
    def best_f1(self) -> float:
        return max((r.f1 for _, r in self.eval_history), default=0.0)

    @property
    def final_report(self) -> Optional[EvalReport]:
        return self.eval_history[-1][1] if self.eval_history else None


def predicted_links(
    prep: PreparedDocument,
    result: ForwardResult,
    mode: DecodeMode = "argmax",
) -> set[tuple[int, int]]:
    pairs = [(q, a, p1) for (q, a), p1 in zip(prep.pair_ids(), result.link_probs())]
    return decode(pairs, mode)


def evaluate(
    docs: Sequence[PreparedDocument],
    params: ModelParams,
    cfg: ModelConfig,
    mode: DecodeMode = "argmax",
) -> EvalReport:
    """Micro-averaged precision/recall/F1 of predicted vs gold link sets."""
    tp = fp = fn = 0
    per_document = []
    for prep in docs:
        result = forward_document(prep, params, cfg)
        predicted = predicted_links(prep, result, mode)
        if mode == "constrained":
            answers = [a for _, a in predicted]
            assert len(answers) == len(set(answers)), "constrained decode emitted a duplicate answer"
        gold = prep.doc.gold_links
        doc_tp = len(predicted & gold)
        doc_fp = len(predicted - gold)
        doc_fn = len(gold - predicted)
        tp, fp, fn = tp + doc_tp, fp + doc_fp, fn + doc_fn
        per_document.append({"doc_id": prep.doc.doc_id, "tp": doc_tp, "fp": doc_fp, "fn": doc_fn})
    return EvalReport.from_counts(tp, fp, fn, per_document)


def multi_link_fraction(
    docs: Sequence[PreparedDocument],
    params: ModelParams,
    cfg: ModelConfig,
    mode: DecodeMode = "argmax",
) -> float:
    """Fraction of answers that receive two or more predicted questions."""
    total = multi = 0
    for prep in docs:
        result = forward_document(prep, params, cfg)
        predicted = predicted_links(prep, result, mode)
        counts = {a: 0 for a in prep.a_ids}
        for _, a in predicted:
            counts[a] += 1
        total += len(prep.a_ids)
        multi += sum(1 for c in counts.values() if c >= 2)
    return multi / total if total else 0.0


def train(
    dataset: Sequence[PreparedDocument],
    config: TrainConfig,
    eval_dataset: Sequence[PreparedDocument] | None = None,
) -> TrainResult:
    """Optimize from scratch over shuffled whole-document batches.

    Per-document losses are averaged within each batch; documents whose
    bipartite graph is empty are skipped up front (counted). When an eval
    set is given, it is scored every ``eval_every`` steps and after the
    final step; the per-checkpoint history is kept so the best checkpoint
    score is available.
    """
    usable = [d for d in dataset if d.num_pairs > 0]
    skipped = len(dataset) - len(usable)
    if skipped:
        logger.info("skipping %d documents with empty bipartite graphs", skipped)
    if not usable:
        raise ValueError("no documents with at least one question-answer pair")
    if any(d.precomputed != usable[0].precomputed for d in usable):
        raise ValueError("cannot mix precomputed and featurizer documents in one run")

    cfg = config.model
    params = build_params(cfg, config.seed, with_featurizer=not usable[0].precomputed)
    state = AdamState()
    rng = np.random.default_rng(config.seed)
    order: list[int] = []
    trace: list[TraceRow] = []
    eval_history: list[tuple[int, EvalReport]] = []

    for step in range(1, config.steps + 1):
        batch: list[PreparedDocument] = []
        while len(batch) < config.batch_size:
            if not order:
                order = list(rng.permutation(len(usable)))
            batch.append(usable[order.pop()])
        params.zero_grads()
        results = [forward_document(d, params, cfg, alpha=config.alpha, beta=config.beta) for d in batch]
        total = results[0].loss
        for r in results[1:]:
            total = add(total, r.loss)
        total = scalar_mul(1.0 / len(results), total)
        loss_value = float(total.value)
        if not np.isfinite(loss_value):
            raise DivergedError(f"non-finite loss at step {step}")
        total.backward()
        lr = lr_schedule(step, config.steps, config.warmup_ratio, config.base_lr)
        adam_step(params, state, lr)
        trace.append(
            TraceRow(
                step=step,
                lr=lr,
                loss_b=float(np.mean([r.loss_b.value for r in results])),
                loss_c=float(np.mean([r.loss_c.value for r in results])),
                loss=loss_value,
            )
        )
        if eval_dataset is not None and (
            step == config.steps or (config.eval_every and step % config.eval_every == 0)
        ):
            report = evaluate(eval_dataset, params, cfg, config.decode_mode)
            eval_history.append((step, report))
            logger.info("step %d: eval f1=%.4f p=%.4f r=%.4f", step, report.f1, report.precision, report.recall)

    return TrainResult(params=params, trace=trace, eval_history=eval_history, skipped_empty=skipped)


def write_trace(path: str, trace: Sequence[TraceRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "lr", "loss_b", "loss_c", "loss"])
        for row in trace:
            writer.writerow([row.step, f"{row.lr:.10g}", f"{row.loss_b:.10g}", f"{row.loss_c:.10g}", f"{row.loss:.10g}"])
