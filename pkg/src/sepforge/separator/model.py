"""Bidirectional GRU embedding network with an attractor masking head.

The network maps log-magnitude spectrogram frames (m, bins) through a stack
of bidirectional GRU layers to a unit-norm embedding per time-frequency bin,
V in R^(m, bins, D). Per-source attractors are mask-weighted means of V;
soft masks are a softmax over negative squared embedding-attractor
distances, trained with MSE against oracle binary masks.

Gradients are derived and accumulated by hand; the serial recurrence runs
on the kernel backend selected in sepforge._kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels

NORM_EPS = 1e-24
ATTRACTOR_EPS = 1e-12

_GATES = ("z", "r", "h")
_DIRECTIONS = ("f", "b")


@dataclass(frozen=True)
class SeparatorConfig:
    """Architecture hyperparameters."""

    layers: int = 4
    hidden_per_direction: int = 300
    bins: int = 129
    embed_dim: int = 20
    speakers: int = 2

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError(f"layers must be >= 1, got {self.layers}")
        if self.hidden_per_direction < 1:
            raise ValueError(f"hidden_per_direction must be >= 1, got {self.hidden_per_direction}")
        if self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")
        if self.embed_dim < 1:
            raise ValueError(f"embed_dim must be >= 1, got {self.embed_dim}")
        if self.speakers < 2:
            raise ValueError(f"speakers must be >= 2, got {self.speakers}")

    def layer_input_dim(self, layer: int) -> int:
        return self.bins if layer == 0 else 2 * self.hidden_per_direction


def param_names(config: SeparatorConfig) -> list[str]:
    """Canonical tensor order, also used by the checkpoint format."""
    names = []
    for layer in range(config.layers):
        for d in _DIRECTIONS:
            for g in _GATES:
                names.append(f"gru{layer}.{d}.w_{g}")
            for g in _GATES:
                names.append(f"gru{layer}.{d}.u_{g}")
            for g in _GATES:
                names.append(f"gru{layer}.{d}.b_{g}")
    names.append("proj.w")
    names.append("proj.b")
    return names


def param_shape(name: str, config: SeparatorConfig) -> tuple[int, ...]:
    h = config.hidden_per_direction
    if name == "proj.w":
        return (2 * h, config.bins * config.embed_dim)
    if name == "proj.b":
        return (config.bins * config.embed_dim,)
    layer = int(name[3: name.index(".")])
    kind = name.rsplit(".", 1)[1][0]
    if kind == "w":
        return (config.layer_input_dim(layer), h)
    if kind == "u":
        return (h, h)
    return (h,)


def init_params(config: SeparatorConfig, seed: int) -> dict[str, np.ndarray]:
    """Seeded uniform initialization, U(-1/sqrt(fan_in), +1/sqrt(fan_in)).

    Tensors are drawn in canonical order so the result is reproducible
    from (config, seed) alone. Biases start at zero.
    """
    rng = np.random.default_rng(seed)
    params = {}
    for name in param_names(config):
        shape = param_shape(name, config)
        if name.rsplit(".", 1)[1].startswith("b"):
            params[name] = np.zeros(shape)
        else:
            bound = 1.0 / np.sqrt(shape[0])
            params[name] = rng.uniform(-bound, bound, shape)
    return params


def zeros_like_params(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.items()}


def _run_direction(x: np.ndarray, p: dict, prefix: str):
    """One direction of one layer; returns (hidden_seq, cache)."""
    h = p[f"{prefix}.u_z"].shape[0]
    xz = x @ p[f"{prefix}.w_z"] + p[f"{prefix}.b_z"]
    xr = x @ p[f"{prefix}.w_r"] + p[f"{prefix}.b_r"]
    xh = x @ p[f"{prefix}.w_h"] + p[f"{prefix}.b_h"]
    h0 = np.zeros(h)
    hs, zs, rs, cs = _kernels.gru_forward_seq(
        np.ascontiguousarray(xz), np.ascontiguousarray(xr), np.ascontiguousarray(xh),
        np.ascontiguousarray(p[f"{prefix}.u_z"]), np.ascontiguousarray(p[f"{prefix}.u_r"]),
        np.ascontiguousarray(p[f"{prefix}.u_h"]), h0)
    return hs, (hs, zs, rs, cs, h0)


def _forward_stack(features: np.ndarray, params: dict, config: SeparatorConfig):
    """GRU stack + projection + normalization, returning all caches."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != config.bins:
        raise ValueError(f"features must be (frames, {config.bins}), got {x.shape}")
    layer_inputs = []
    caches = []
    for layer in range(config.layers):
        layer_inputs.append(x)
        hf, cache_f = _run_direction(x, params, f"gru{layer}.f")
        hb_rev, cache_b = _run_direction(x[::-1], params, f"gru{layer}.b")
        caches.append((cache_f, cache_b))
        x = np.concatenate([hf, hb_rev[::-1]], axis=1)
    pre = x @ params["proj.w"] + params["proj.b"]
    e = pre.reshape(x.shape[0], config.bins, config.embed_dim)
    norm = np.sqrt(np.sum(e * e, axis=-1, keepdims=True) + NORM_EPS)
    v = e / norm
    return v, (layer_inputs, caches, x, e, norm)


def forward(features: np.ndarray, params: dict, config: SeparatorConfig) -> np.ndarray:
    """Embed a feature matrix; returns unit-norm V of shape (frames, bins, D)."""
    v, _ = _forward_stack(features, params, config)
    return v


def attractors(v: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weight-averaged embedding per source.

    Args:
        v: embeddings (frames, bins, D).
        weights: per-source bin weights (sources, frames, bins), e.g.
            oracle binary masks during training.

    Returns:
        (sources, D) attractor matrix.
    """
    totals = weights.sum(axis=(1, 2)) + ATTRACTOR_EPS
    return np.einsum("kmn,mnd->kd", weights, v) / totals[:, None]


def estimate_masks(v: np.ndarray, attr: np.ndarray) -> np.ndarray:
    """Soft masks: softmax over sources of -||V - a_i||^2 per bin."""
    d2 = np.sum((v[None, :, :, :] - attr[:, None, None, :]) ** 2, axis=-1)
    logits = -d2
    logits -= logits.max(axis=0, keepdims=True)
    ex = np.exp(logits)
    return ex / ex.sum(axis=0, keepdims=True)


def mask_loss(masks: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error over all (source, frame, bin) cells."""
    if masks.shape != targets.shape:
        raise ValueError(f"mask shape {masks.shape} != target shape {targets.shape}")
    diff = masks - targets
    return float(np.mean(diff * diff))


def example_loss(features: np.ndarray, targets: np.ndarray, params: dict,
                 config: SeparatorConfig) -> float:
    """Forward-only training objective for one example."""
    v = forward(features, params, config)
    a = attractors(v, targets)
    return mask_loss(estimate_masks(v, a), targets)


def batch_loss(batch, params: dict, config: SeparatorConfig) -> float:
    """Mean example_loss over a list of (features, targets) pairs."""
    if not batch:
        raise ValueError("empty batch")
    return float(np.mean([example_loss(f, t, params, config) for f, t in batch]))


def _head_backward(v, targets, masks, attr):
    """Gradient of the MSE mask loss w.r.t. the normalized embeddings."""
    k = targets.shape[0]
    cells = targets.size
    dmask = 2.0 * (masks - targets) / cells
    # softmax over the source axis
    dlogit = masks * (dmask - np.sum(dmask * masks, axis=0, keepdims=True))
    dd2 = -dlogit
    diff = v[None, :, :, :] - attr[:, None, None, :]
    dv = 2.0 * np.einsum("kmn,kmnd->mnd", dd2, diff)
    da = -2.0 * np.einsum("kmn,kmnd->kd", dd2, diff)
    totals = targets.sum(axis=(1, 2)) + ATTRACTOR_EPS
    dv += np.einsum("kmn,kd->mnd", targets / totals[:, None, None], da)
    return dv


def _example_gradients(features, targets, params, config, grads):
    """Accumulate one example's parameter gradients into grads; returns loss."""
    v, (layer_inputs, caches, top, e, norm) = _forward_stack(features, params, config)
    a = attractors(v, targets)
    masks = estimate_masks(v, a)
    loss = mask_loss(masks, targets)

    dv = _head_backward(v, targets, masks, a)
    # V = E / norm with norm = sqrt(sum E^2 + eps)
    de = dv / norm - e * (np.sum(dv * e, axis=-1, keepdims=True) / norm**3)
    dpre = de.reshape(e.shape[0], -1)
    grads["proj.w"] += top.T @ dpre
    grads["proj.b"] += dpre.sum(axis=0)
    dx = dpre @ params["proj.w"].T

    h = config.hidden_per_direction
    for layer in range(config.layers - 1, -1, -1):
        cache_f, cache_b = caches[layer]
        x_in = layer_inputs[layer]
        dx_in = np.zeros_like(x_in)
        for d, cache, dh in (("f", cache_f, dx[:, :h]),
                             ("b", cache_b, dx[:, h:][::-1])):
            prefix = f"gru{layer}.{d}"
            hs, zs, rs, cs, h0 = cache
            dxz, dxr, dxh, duz, dur, duh, _ = _kernels.gru_backward_seq(
                hs, zs, rs, cs,
                np.ascontiguousarray(params[f"{prefix}.u_z"]),
                np.ascontiguousarray(params[f"{prefix}.u_r"]),
                np.ascontiguousarray(params[f"{prefix}.u_h"]),
                h0, np.ascontiguousarray(dh))
            grads[f"{prefix}.u_z"] += duz
            grads[f"{prefix}.u_r"] += dur
            grads[f"{prefix}.u_h"] += duh
            x_dir = x_in if d == "f" else x_in[::-1]
            dstep = np.zeros_like(x_in)
            for g, dxg in (("z", dxz), ("r", dxr), ("h", dxh)):
                grads[f"{prefix}.w_{g}"] += x_dir.T @ dxg
                grads[f"{prefix}.b_{g}"] += dxg.sum(axis=0)
                dstep += dxg @ params[f"{prefix}.w_{g}"].T
            dx_in += dstep if d == "f" else dstep[::-1]
        dx = dx_in
    return loss


def loss_and_gradients(batch, params: dict, config: SeparatorConfig):
    """Mean loss and mean parameter gradients over a batch.

    Args:
        batch: list of (features, target_masks) pairs; features (m, bins),
            target_masks (sources, m, bins).

    Returns:
        (loss, grads) with grads keyed like params.
    """
    if not batch:
        raise ValueError("empty batch")
    grads = zeros_like_params(params)
    total = 0.0
    for features, targets in batch:
        targets = np.asarray(targets, dtype=np.float64)
        if targets.shape[0] != config.speakers:
            raise ValueError(
                f"expected {config.speakers} target masks, got {targets.shape[0]}")
        total += _example_gradients(features, targets, params, config, grads)
    scale = 1.0 / len(batch)
    for name in grads:
        grads[name] *= scale
    return total * scale, grads


def param_gradients(batch, params: dict, config: SeparatorConfig) -> dict[str, np.ndarray]:
    """Gradient-only variant of loss_and_gradients."""
    return loss_and_gradients(batch, params, config)[1]
