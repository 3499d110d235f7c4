"""ADAM training loop with plateau-triggered learning-rate halving.

Both the training and validation objectives are the MSE between the soft
masks and the oracle binary masks. The learning rate is multiplied by
lr_factor after `plateau_patience` consecutive epochs without a new best
validation loss; the returned parameters are the snapshot from the best
validation epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SeparatorConfig, batch_loss, init_params, loss_and_gradients, zeros_like_params


class TrainingDivergedError(RuntimeError):
    """Raised when the loss or a gradient stops being finite."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_size: int = 128
    learning_rate: float = 1e-3
    plateau_patience: int = 3
    lr_factor: float = 0.5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.plateau_patience < 1:
            raise ValueError(f"plateau_patience must be >= 1, got {self.plateau_patience}")
        if not 0 < self.lr_factor < 1:
            raise ValueError(f"lr_factor must be in (0, 1), got {self.lr_factor}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid_loss: float
    learning_rate: float


@dataclass
class TrainResult:
    params: dict
    curve: list[EpochRecord]
    best_epoch: int
    best_valid_loss: float


class _Adam:
    def __init__(self, params, cfg: TrainConfig):
        self.m = zeros_like_params(params)
        self.v = zeros_like_params(params)
        self.t = 0
        self.cfg = cfg

    def step(self, params, grads, lr):
        cfg = self.cfg
        self.t += 1
        bc1 = 1.0 - cfg.beta1 ** self.t
        bc2 = 1.0 - cfg.beta2 ** self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * g * g
            params[name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)


def _mean_loss(dataset, params, sconfig, batch_size):
    total = 0.0
    for lo in range(0, len(dataset), batch_size):
        chunk = dataset[lo: lo + batch_size]
        total += batch_loss(chunk, params, sconfig) * len(chunk)
    return total / len(dataset)


def train(train_set, valid_set, sconfig: SeparatorConfig, tconfig: TrainConfig,
          progress=None) -> TrainResult:
    """Train on (features, targets) pairs; fully deterministic for one seed.

    Args:
        train_set, valid_set: lists of (features, target_masks) pairs.
        progress: optional callable invoked with each EpochRecord.
    """
    if not train_set or not valid_set:
        raise ValueError("train and validation sets must be non-empty")
    params = init_params(sconfig, tconfig.seed)
    adam = _Adam(params, tconfig)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence((tconfig.seed, 1)))
    lr = tconfig.learning_rate
    curve: list[EpochRecord] = []
    best_loss = np.inf
    best_params = {k: v.copy() for k, v in params.items()}
    best_epoch = 0
    stale = 0

    for epoch in range(1, tconfig.epochs + 1):
        perm = shuffle_rng.permutation(len(train_set))
        train_total = 0.0
        for lo in range(0, len(perm), tconfig.batch_size):
            batch = [train_set[i] for i in perm[lo: lo + tconfig.batch_size]]
            loss, grads = loss_and_gradients(batch, params, sconfig)
            if not np.isfinite(loss):
                raise TrainingDivergedError(f"non-finite training loss at epoch {epoch}")
            adam.step(params, grads, lr)
            train_total += loss * len(batch)
        train_loss = train_total / len(train_set)
        valid_loss = _mean_loss(valid_set, params, sconfig, tconfig.batch_size)
        if not np.isfinite(valid_loss):
            raise TrainingDivergedError(f"non-finite validation loss at epoch {epoch}")
        record = EpochRecord(epoch, train_loss, valid_loss, lr)
        curve.append(record)
        if progress is not None:
            progress(record)

        if valid_loss < best_loss:
            best_loss = valid_loss
            best_params = {k: v.copy() for k, v in params.items()}
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= tconfig.plateau_patience:
                lr *= tconfig.lr_factor
                stale = 0
    return TrainResult(params=best_params, curve=curve,
                       best_epoch=best_epoch, best_valid_loss=float(best_loss))


def curve_csv_text(curve: list[EpochRecord]) -> str:
    lines = ["epoch,train_loss,valid_loss,learning_rate"]
    for r in curve:
        lines.append(f"{r.epoch},{r.train_loss!r},{r.valid_loss!r},{r.learning_rate!r}")
    return "\n".join(lines) + "\n"
