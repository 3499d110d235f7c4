"""BGRU attractor separator: model, training, checkpoints, inference."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .infer import separate
from .kmeans import kmeans_embed
from .model import (
    SeparatorConfig,
    attractors,
    batch_loss,
    estimate_masks,
    example_loss,
    forward,
    init_params,
    loss_and_gradients,
    mask_loss,
    param_gradients,
    param_names,
    param_shape,
)
from .train import (
    EpochRecord,
    TrainConfig,
    TrainingDivergedError,
    TrainResult,
    curve_csv_text,
    train,
)

__all__ = [
    "CheckpointError", "load_checkpoint", "save_checkpoint", "separate",
    "kmeans_embed", "SeparatorConfig", "attractors", "batch_loss",
    "estimate_masks", "example_loss", "forward", "init_params",
    "loss_and_gradients", "mask_loss", "param_gradients", "param_names",
    "param_shape", "EpochRecord", "TrainConfig", "TrainingDivergedError",
    "TrainResult", "curve_csv_text", "train",
]
