"""STFT analysis/resynthesis and time-frequency masking.

The analysis window is a half-sample-offset Hann, w[i] = sin^2(pi*(i+0.5)/W).
It is strictly positive, so the per-sample squared-window normalizer used by
the inverse transform never vanishes and the analysis/resynthesis round trip
is exact (to FFT rounding) for every clip length, including the first and
last samples. At the default geometry (256-sample window, hop 64) the
normalizer is the constant 1.5 away from the clip edges.

Frame count follows m = ceil(len / hop); the clip is end-padded (zeros) to
m*hop + (window - hop) before framing, and the inverse truncates back to the
original length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, pad_to

LOG_EPS = 1e-8


@dataclass(frozen=True)
class StftConfig:
    window_len: int = 256
    hop: int = 64
    rate: int = 8000

    def __post_init__(self):
        if self.window_len < 2 or self.window_len % 2:
            raise ValueError(f"window_len must be even and >= 2, got {self.window_len}")
        if not 0 < self.hop <= self.window_len:
            raise ValueError(f"hop must be in (0, window_len], got {self.hop}")
        if self.rate <= 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    @property
    def bins(self) -> int:
        return self.window_len // 2 + 1

    def frames_for(self, n_samples: int) -> int:
        return math.ceil(n_samples / self.hop)


def analysis_window(config: StftConfig) -> np.ndarray:
    i = np.arange(config.window_len)
    return np.sin(np.pi * (i + 0.5) / config.window_len) ** 2


@dataclass
class Spectrogram:
    """Complex STFT, shape (frames, bins), plus the originating clip length."""

    data: np.ndarray
    config: StftConfig
    original_len: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2 or self.data.shape[1] != self.config.bins:
            raise ValueError(
                f"spectrogram must be (frames, {self.config.bins}), got {self.data.shape}"
            )

    @property
    def frames(self) -> int:
        return self.data.shape[0]


@dataclass
class MaskSet:
    """Per-source time-frequency masks, shape (sources, frames, bins), in [0, 1]."""

    masks: np.ndarray

    def __post_init__(self):
        self.masks = np.asarray(self.masks, dtype=np.float64)
        if self.masks.ndim != 3:
            raise ValueError(f"masks must be (sources, frames, bins), got {self.masks.shape}")

    @property
    def sources(self) -> int:
        return self.masks.shape[0]


def stft(clip: AudioClip, config: StftConfig) -> Spectrogram:
    """Forward transform. The clip must be non-empty and match config.rate."""
    if clip.rate != config.rate:
        raise ValueError(f"rate mismatch: clip {clip.rate} Hz vs config {config.rate} Hz")
    n = len(clip)
    if n == 0:
        raise ValueError("cannot transform an empty clip")
    m = config.frames_for(n)
    padded_len = m * config.hop + (config.window_len - config.hop)
    x = np.zeros(padded_len, dtype=np.float64)
    x[:n] = clip.samples
    w = analysis_window(config)
    starts = np.arange(m) * config.hop
    frames = x[starts[:, None] + np.arange(config.window_len)] * w
    return Spectrogram(np.fft.rfft(frames, axis=1), config, n)


def istft(spec: Spectrogram) -> AudioClip:
    """Weighted overlap-add inverse, exact for unmodified spectrograms."""
    cfg = spec.config
    w = analysis_window(cfg)
    m = spec.frames
    padded_len = m * cfg.hop + (cfg.window_len - cfg.hop)
    num = np.zeros(padded_len, dtype=np.float64)
    den = np.zeros(padded_len, dtype=np.float64)
    segments = np.fft.irfft(spec.data, n=cfg.window_len, axis=1) * w
    for k in range(m):
        lo = k * cfg.hop
        num[lo: lo + cfg.window_len] += segments[k]
        den[lo: lo + cfg.window_len] += w * w
    return AudioClip((num / den)[: spec.original_len], cfg.rate)


def log_magnitude(spec: Spectrogram) -> np.ndarray:
    """Log-magnitude features ln(|X| + 1e-8), shape (frames, bins)."""
    return np.log(np.abs(spec.data) + LOG_EPS)


def ideal_binary_mask(source_specs: list[Spectrogram]) -> MaskSet:
    """One-hot masks assigning each bin to the source with the largest magnitude.

    Ties go to the lowest source index. All spectrograms must share one shape.
    """
    if len(source_specs) < 2:
        raise ValueError("need at least two sources for a separation mask")
    shapes = {s.data.shape for s in source_specs}
    if len(shapes) != 1:
        raise ValueError(f"source spectrograms disagree in shape: {sorted(shapes)}")
    mags = np.stack([np.abs(s.data) for s in source_specs])
    winner = np.argmax(mags, axis=0)
    masks = np.zeros(mags.shape, dtype=np.float64)
    for i in range(len(source_specs)):
        masks[i] = winner == i
    return MaskSet(masks)


def mask_resynthesize(mixture: Spectrogram, mask: np.ndarray) -> AudioClip:
    """Apply one source's mask to the mixture spectrogram and invert."""
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != mixture.data.shape:
        raise ValueError(f"mask shape {mask.shape} != spectrogram shape {mixture.data.shape}")
    masked = Spectrogram(mixture.data * mask, mixture.config, mixture.original_len)
    return istft(masked)


def training_example(mixture: AudioClip, refs: list[AudioClip], config: StftConfig):
    """(features, target_masks) for one mixture and its reference sources.

    Features are the mixture's log magnitudes; targets are the sources'
    ideal binary masks. References shorter than the mixture are end-padded.
    """
    spec = stft(mixture, config)
    ref_specs = [stft(pad_to(r, len(mixture)), config) for r in refs]
    return log_magnitude(spec), ideal_binary_mask(ref_specs).masks
