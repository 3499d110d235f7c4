"""Binary checkpoint format for separator parameters.

Layout (all integers little-endian, tensor data float64 little-endian):

    magic     8 bytes  b"SEPFORGE"
    version   u32      currently 1
    layers, hidden_per_direction, bins, embed_dim, speakers   5 x u32
    tensor_count  u32
    per tensor, in the canonical order of model.param_names:
        name_len u16, name utf-8, ndim u8, dims u32 x ndim, data f64 x prod(dims)

Identical parameters serialize to identical bytes, so retraining with the
same seeds reproduces the file exactly.
"""

from __future__ import annotations

import struct

import numpy as np

from .model import SeparatorConfig, param_names, param_shape

MAGIC = b"SEPFORGE"
VERSION = 1


class CheckpointError(Exception):
    """Raised for files that are not valid checkpoints."""


def save_checkpoint(path, params: dict, config: SeparatorConfig) -> None:
    names = param_names(config)
    missing = [n for n in names if n not in params]
    if missing:
        raise ValueError(f"params missing tensors: {missing}")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<5I", config.layers, config.hidden_per_direction,
                            config.bins, config.embed_dim, config.speakers))
        f.write(struct.pack("<I", len(names)))
        for name in names:
            tensor = np.ascontiguousarray(params[name], dtype=np.float64)
            if tensor.shape != param_shape(name, config):
                raise ValueError(
                    f"tensor {name} has shape {tensor.shape}, "
                    f"expected {param_shape(name, config)}")
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", tensor.ndim))
            f.write(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
            f.write(tensor.astype("<f8").tobytes())


def _read(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return data


def load_checkpoint(path):
    """Load (params, config); rejects wrong magic, version or tensor layout."""
    with open(path, "rb") as f:
        if _read(f, 8, "magic") != MAGIC:
            raise CheckpointError(f"{path}: not a separator checkpoint")
        (version,) = struct.unpack("<I", _read(f, 4, "version"))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        layers, hidden, bins, embed, speakers = struct.unpack("<5I", _read(f, 20, "config"))
        try:
            config = SeparatorConfig(layers=layers, hidden_per_direction=hidden,
                                     bins=bins, embed_dim=embed, speakers=speakers)
        except ValueError as exc:
            raise CheckpointError(f"{path}: invalid config in header: {exc}") from exc
        (count,) = struct.unpack("<I", _read(f, 4, "tensor count"))
        expected = param_names(config)
        if count != len(expected):
            raise CheckpointError(
                f"{path}: {count} tensors, expected {len(expected)} for this config")
        params = {}
        for want in expected:
            (name_len,) = struct.unpack("<H", _read(f, 2, "tensor name length"))
            name = _read(f, name_len, "tensor name").decode("utf-8")
            if name != want:
                raise CheckpointError(f"{path}: tensor {name!r} out of order, expected {want!r}")
            (ndim,) = struct.unpack("<B", _read(f, 1, "tensor rank"))
            dims = struct.unpack(f"<{ndim}I", _read(f, 4 * ndim, "tensor dims"))
            if dims != param_shape(want, config):
                raise CheckpointError(
                    f"{path}: tensor {name} has shape {dims}, "
                    f"expected {param_shape(want, config)}")
            n_items = int(np.prod(dims)) if dims else 1
            raw = _read(f, 8 * n_items, f"tensor {name} data")
            params[name] = np.frombuffer(raw, dtype="<f8").reshape(dims).copy()
        if f.read(1):
            raise CheckpointError(f"{path}: trailing bytes after last tensor")
    return params, config
