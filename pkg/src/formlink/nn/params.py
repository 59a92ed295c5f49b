"""Named trainable tensors: initialization, iteration, and checkpoint I/O.

Checkpoint format: magic ``FLNK``, one version byte, a little-endian
uint32-length JSON metadata block, then a tensor table of
(name, dtype code, shape, raw little-endian C-order values) records.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .tape import Tensor

_MAGIC = b"FLNK"
_VERSION = 1
_DTYPE_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8")}
_CODE_FOR_KIND = {"float32": 1, "float64": 2}


@dataclass
class ParamSpec:
    """Shape plus initialization class for one named tensor."""

    name: str
    shape: tuple[int, ...]
    init: str  # "weight" | "bias" | "embedding" | "zero"
    fan: tuple[int, int] | None = None  # (fan_in, fan_out) for "weight"


class ModelParams:
    """Ordered name -> leaf Tensor collection."""

    def __init__(self) -> None:
        self._tensors: dict[str, Tensor] = {}

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self._tensors:
            raise ValueError(f"duplicate parameter name: {name}")
        t = Tensor(value, requires_grad=True)
        self._tensors[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> list[str]:
        return list(self._tensors)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._tensors.items())

    def zero_grads(self) -> None:
        for t in self._tensors.values():
            t.zero_grad()

    def num_coordinates(self) -> int:
        return sum(t.value.size for t in self._tensors.values())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: t.value.copy() for name, t in self._tensors.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for name, value in state.items():
            t = self._tensors[name]
            if t.value.shape != value.shape:
                raise ValueError(f"shape mismatch for {name}: {t.value.shape} vs {value.shape}")
            t.value = value.astype(t.value.dtype, copy=True)


def init_params(specs: list[ParamSpec], seed: int, dtype=np.float32) -> ModelParams:
    """Deterministically initialize parameters from a seed.

    Weight matrices draw uniform(+-sqrt(6 / (fan_in + fan_out))), biases
    start at zero, embeddings draw normal(0, 0.02), and "zero" tensors
    start at zero regardless of shape.
    """
    rng = np.random.default_rng(seed)
    params = ModelParams()
    for spec in specs:
        if spec.init == "weight":
            fan_in, fan_out = spec.fan if spec.fan else (spec.shape[0], spec.shape[-1])
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            value = rng.uniform(-bound, bound, size=spec.shape)
        elif spec.init == "embedding":
            value = rng.normal(0.0, 0.02, size=spec.shape)
        elif spec.init in ("bias", "zero"):
            value = np.zeros(spec.shape)
        else:
            raise ValueError(f"unknown init kind: {spec.init}")
        params.add(spec.name, value.astype(dtype))
    return params


def save_checkpoint(path: str, params: ModelParams, meta: dict | None = None) -> None:
    meta_bytes = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<B", _VERSION))
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(struct.pack("<I", len(params)))
        for name, t in params.items():
            payload = np.ascontiguousarray(t.value)
            if payload.dtype == np.float64:
                code = 2
            else:
                code = 1
                payload = payload.astype(np.float32)
            name_bytes = name.encode("utf-8")
            fh.write(struct.pack("<H", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<BB", code, payload.ndim))
            fh.write(struct.pack(f"<{payload.ndim}I", *payload.shape))
            fh.write(payload.astype(_DTYPE_CODES[code]).tobytes(order="C"))


def load_checkpoint(path: str) -> tuple[ModelParams, dict]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise ValueError(f"not a checkpoint file: {path}")
    version = blob[4]
    if version > _VERSION:
        raise ValueError(f"unsupported checkpoint version {version} in {path}")
    offset = 5
    (meta_len,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    meta = json.loads(blob[offset : offset + meta_len].decode("utf-8"))
    offset += meta_len
    (count,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    params = ModelParams()
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset : offset + name_len].decode("utf-8")
        offset += name_len
        code, ndim = struct.unpack_from("<BB", blob, offset)
        offset += 2
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        dtype = _DTYPE_CODES[code]
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        value = np.frombuffer(blob, dtype=dtype, count=int(np.prod(shape, dtype=np.int64)), offset=offset)
        offset += nbytes
        params.add(name, value.reshape(shape).copy())
    return params, meta
