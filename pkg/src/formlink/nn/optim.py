"""Adam with bias correction and a linear warmup/decay schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ModelParams


class DivergedError(RuntimeError):
    """Raised when a gradient or loss stops being finite."""


@dataclass
class AdamState:
    """First/second moment buffers keyed by parameter name."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: ModelParams,
    state: AdamState,
    lr: float,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> None:
    """Apply one in-place Adam update using the grads stored on the params."""
    b1, b2 = betas
    state.t += 1
    t = state.t
    for name, tensor in params.items():
        g = tensor.grad
        if g is None:
            continue
        if not np.all(np.isfinite(g)):
            raise DivergedError(f"non-finite gradient for parameter {name!r}")
        if name not in state.m:
            state.m[name] = np.zeros_like(tensor.value)
            state.v[name] = np.zeros_like(tensor.value)
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        tensor.value -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(tensor.value.dtype)


def lr_schedule(step: int, total_steps: int, warmup_ratio: float, base_lr: float) -> float:
    """Linear ramp to base_lr over the warmup span, then linear decay to 0."""
    if not 0 <= step <= total_steps:
        raise ValueError(f"step {step} outside [0, {total_steps}]")
    warmup = warmup_ratio * total_steps
    if step < warmup:
        return base_lr * step / warmup
    if total_steps == warmup:
        return base_lr if step == warmup else 0.0
    return base_lr * (total_steps - step) / (total_steps - warmup)
