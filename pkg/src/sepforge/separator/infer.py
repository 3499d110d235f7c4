"""End-to-end separation of a mixture clip with a trained model."""

from __future__ import annotations

from ..audio import AudioClip
from ..spectral import StftConfig, log_magnitude, mask_resynthesize, stft
from .kmeans import kmeans_embed
from .model import SeparatorConfig, estimate_masks, forward


def separate(mixture: AudioClip, params: dict, config: SeparatorConfig,
             stft_config: StftConfig | None = None,
             kmeans_iters: int = 25, kmeans_seed: int = 0) -> list[AudioClip]:
    """Split a mixture into `config.speakers` estimated source clips.

    Embeds the mixture spectrogram, clusters the per-bin embeddings with
    seeded k-means, converts cluster centers to soft masks and resynthesizes
    one clip per source (each the length of the input). Source order is the
    arbitrary cluster order; score with permutation-invariant metrics.
    """
    if stft_config is None:
        stft_config = StftConfig(rate=mixture.rate)
    spec = stft(mixture, stft_config)
    v = forward(log_magnitude(spec), params, config)
    centers, _ = kmeans_embed(v.reshape(-1, config.embed_dim), config.speakers,
                              iters=kmeans_iters, seed=kmeans_seed)
    masks = estimate_masks(v, centers)
    return [mask_resynthesize(spec, masks[i]) for i in range(config.speakers)]
