"""Reverse-mode automatic differentiation on dense numpy arrays.

Each operation returns a new `Tensor` holding the forward value plus a
closure that routes the output adjoint to the operands, so a forward pass
records the whole computation graph. `Tensor.backward()` replays the graph
in reverse topological order and accumulates exact adjoints into every
tensor created with `requires_grad=True`.

A graph is single-threaded; independent graphs on independent threads are
fine, and frozen leaf tensors may be shared read-only.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

DEFAULT_DTYPE = np.float32


class ShapeError(ValueError):
    """Operand shapes incompatible with the requested op."""


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        value,
        requires_grad: bool = False,
        _parents: tuple["Tensor", ...] = (),
        _backward: Callable[[np.ndarray], None] | None = None,
    ) -> None:
        self.value = np.asarray(value)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def dtype(self):
        return self.value.dtype

    def __repr__(self) -> str:
        return f"Tensor(shape={self.value.shape}, requires_grad={self.requires_grad})"

    def _accumulate(self, g: np.ndarray) -> None:
        if not (self.requires_grad or self._parents):
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += g

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, seed: np.ndarray | None = None) -> None:
        """Accumulate d(self)/d(leaf) into every requires_grad tensor below."""
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        if seed is None:
            seed = np.ones_like(self.value)
        self._accumulate(np.asarray(seed, dtype=self.value.dtype))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
        # Release interior grads so only leaves keep state across steps.
        for node in topo:
            if node is not self and node._backward is not None and not node.requires_grad:
                node.grad = None

    # Small amount of sugar; the op functions below are the real surface.
    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __mul__(self, other: "Tensor") -> "Tensor":
        return hadamard(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)


def constant(value, dtype=None) -> Tensor:
    """Wrap an array as a non-differentiable graph input."""
    return Tensor(np.asarray(value, dtype=dtype))


def leaf(value, dtype=None) -> Tensor:
    """Wrap an array as a trainable graph input."""
    return Tensor(np.asarray(value, dtype=dtype), requires_grad=True)


def _node(value: np.ndarray, parents: Sequence[Tensor], backward: Callable) -> Tensor:
    requires = any(p.requires_grad or p._parents for p in parents)
    return Tensor(value, _parents=tuple(parents), _backward=backward if requires else None)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise and linear-algebra ops
# ---------------------------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = a.value + b.value
    except ValueError as e:
        raise ShapeError(f"add: {a.shape} + {b.shape}") from e

    def backward(g: np.ndarray) -> None:
        a._accumulate(_unbroadcast(g, a.shape))
        b._accumulate(_unbroadcast(g, b.shape))

    return _node(out, (a, b), backward)


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    try:
        out = a.value * b.value
    except ValueError as e:
        raise ShapeError(f"hadamard: {a.shape} * {b.shape}") from e

    def backward(g: np.ndarray) -> None:
        a._accumulate(_unbroadcast(g * b.value, a.shape))
        b._accumulate(_unbroadcast(g * a.value, b.shape))

    return _node(out, (a, b), backward)


def scalar_mul(c: float, a: Tensor) -> Tensor:
    c = float(c)
    out = c * a.value

    def backward(g: np.ndarray) -> None:
        a._accumulate(c * g)

    return _node(out, (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    out = a.value @ b.value

    def backward(g: np.ndarray) -> None:
        a._accumulate(g @ b.value.T)
        b._accumulate(a.value.T @ g)

    return _node(out, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    if a.value.ndim != 2:
        raise ShapeError(f"transpose: {a.shape}")
    out = a.value.T

    def backward(g: np.ndarray) -> None:
        a._accumulate(g.T)

    return _node(out, (a,), backward)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = a.value.reshape(shape)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g.reshape(a.shape))

    return _node(out, (a,), backward)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not parts:
        raise ShapeError("concat: empty input list")
    try:
        out = np.concatenate([p.value for p in parts], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat axis={axis}: {[p.shape for p in parts]}") from e
    extents = [p.shape[axis] for p in parts]
    offsets = np.cumsum([0] + extents)

    def backward(g: np.ndarray) -> None:
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(lo, hi)
            p._accumulate(g[tuple(idx)])

    return _node(out, tuple(parts), backward)


def gather_rows(a: Tensor, index: np.ndarray) -> Tensor:
    """Select rows of a 2-D tensor, repeats allowed; adjoint scatter-adds."""
    if a.value.ndim != 2:
        raise ShapeError(f"gather_rows: {a.shape}")
    index = np.asarray(index, dtype=np.intp)
    out = a.value[index]

    def backward(g: np.ndarray) -> None:
        ga = np.zeros_like(a.value)
        np.add.at(ga, index, g)
        a._accumulate(ga)

    return _node(out, (a,), backward)


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    pos = a.value > 0
    out = np.where(pos, a.value, slope * a.value)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * np.where(pos, 1.0, slope))

    return _node(out, (a,), backward)


def elu(a: Tensor) -> Tensor:
    pos = a.value > 0
    expm1 = np.expm1(np.minimum(a.value, 0.0))
    out = np.where(pos, a.value, expm1)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * np.where(pos, 1.0, expm1 + 1.0))

    return _node(out, (a,), backward)


def log(a: Tensor) -> Tensor:
    out = np.log(a.value)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g / a.value)

    return _node(out, (a,), backward)


def absolute(a: Tensor) -> Tensor:
    out = np.abs(a.value)

    def backward(g: np.ndarray) -> None:
        a._accumulate(g * np.sign(a.value))

    return _node(out, (a,), backward)


def softmax(a: Tensor, axis: int) -> Tensor:
    shifted = a.value - a.value.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g: np.ndarray) -> None:
        inner = (g * out).sum(axis=axis, keepdims=True)
        a._accumulate(out * (g - inner))

    return _node(out, (a,), backward)


def tsum(a: Tensor, axis: int | None = None) -> Tensor:
    out = a.value.sum(axis=axis)

    def backward(g: np.ndarray) -> None:
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.shape).copy())
        else:
            a._accumulate(np.broadcast_to(np.expand_dims(g, axis), a.shape).copy())

    return _node(out, (a,), backward)


def mean(a: Tensor) -> Tensor:
    n = a.value.size
    out = a.value.mean()

    def backward(g: np.ndarray) -> None:
        a._accumulate(np.broadcast_to(g / n, a.shape).copy())

    return _node(out, (a,), backward)


def pairwise_bilinear(q: Tensor, u: Tensor, a: Tensor) -> Tensor:
    """Per-row bilinear form: out[r, k] = q[r] . u[:, k, :] . a[r]."""
    if (
        q.value.ndim != 2
        or a.value.ndim != 2
        or u.value.ndim != 3
        or q.shape[1] != u.shape[0]
        or a.shape[1] != u.shape[2]
        or q.shape[0] != a.shape[0]
    ):
        raise ShapeError(f"pairwise_bilinear: {q.shape}, {u.shape}, {a.shape}")
    out = np.einsum("ri,ikj,rj->rk", q.value, u.value, a.value, optimize=True)

    def backward(g: np.ndarray) -> None:
        q._accumulate(np.einsum("rk,ikj,rj->ri", g, u.value, a.value, optimize=True))
        u._accumulate(np.einsum("rk,ri,rj->ikj", g, q.value, a.value, optimize=True))
        a._accumulate(np.einsum("rk,ikj,ri->rj", g, u.value, q.value, optimize=True))

    return _node(out, (q, u, a), backward)


# ---------------------------------------------------------------------------
# gradient verification
# ---------------------------------------------------------------------------


def grad_check(
    f: Callable[[], Tensor],
    params: Iterable[tuple[str, Tensor]],
    eps: float = 1e-5,
    max_coords: int = 10_000,
    seed: int = 0,
) -> float:
    """Max relative error of tape gradients vs central finite differences.

    Evaluates ``f`` (a closure over the given leaf tensors, returning a
    scalar Tensor) and compares each parameter coordinate's tape gradient
    against (f(x+eps) - f(x-eps)) / 2eps. Above `max_coords` total
    coordinates, a seeded random subsample is checked instead. Use 64-bit
    parameters; coordinates where both sides are below 1e-6 count as exact.
    """
    params = list(params)
    for _, t in params:
        t.zero_grad()
    out = f()
    if out.value.size != 1:
        raise ShapeError(f"grad_check: f must be scalar, got {out.shape}")
    out.backward()
    analytic = {name: (np.zeros_like(t.value) if t.grad is None else t.grad.copy()) for name, t in params}

    coords = [(name, t, i) for name, t in params for i in range(t.value.size)]
    if len(coords) > max_coords:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[i] for i in pick]

    worst = 0.0
    for name, t, i in coords:
        flat = t.value.reshape(-1)
        orig = flat[i]
        flat[i] = orig + eps
        f_plus = float(f().value)
        flat[i] = orig - eps
        f_minus = float(f().value)
        flat[i] = orig
        fd = (f_plus - f_minus) / (2.0 * eps)
        an = float(analytic[name].reshape(-1)[i])
        scale = max(abs(an), abs(fd))
        if scale < 1e-6:
            continue
        worst = max(worst, abs(an - fd) / scale)
    return worst
