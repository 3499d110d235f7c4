"""Audio clip container, WAV file I/O, resampling and pointwise mixing.

All in-memory audio is float64 in [-1, 1]. WAV support is deliberately
narrow: 16-bit PCM and 32-bit float, mono or stereo; writing is 16-bit PCM
mono only.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

TARGET_RATE = 8000
SUPPORTED_INPUT_RATES = (8000, 16000, 48000)

_PCM16_SCALE = 32768.0
_SINC_TAPS = 64
_KAISER_BETA = 8.6


class WavFormatError(Exception):
    """Raised for WAV payloads this package cannot or will not decode."""


@dataclass
class AudioClip:
    """A mono signal plus its sample rate.

    samples: float64 array, amplitudes nominally in [-1, 1].
    """

    samples: np.ndarray
    rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"clip samples must be 1-D, got shape {self.samples.shape}")
        if self.rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.rate}")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return len(self) / self.rate


@dataclass
class ImpulseResponse:
    """Finite impulse response with the rate it was sampled at."""

    taps: np.ndarray
    rate: int

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.shape[0] == 0:
            raise ValueError("impulse response must be a non-empty 1-D array")
        if self.rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.rate}")


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise WavFormatError(f"truncated WAV file while reading {what}")
    return data


def load_wav(path) -> list[AudioClip]:
    """Load a WAV file; returns one AudioClip per channel.

    Accepts 16-bit PCM and 32-bit IEEE float, 1 or 2 channels. Anything
    else (24-bit, extensible, compressed, >2 channels) raises
    WavFormatError, as does an empty data payload. A missing file raises
    FileNotFoundError untouched.
    """
    with open(path, "rb") as f:
        header = f.read(12)
        if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
            raise WavFormatError(f"{path}: not a RIFF/WAVE file")
        fmt = None
        data = None
        while True:
            chunk_head = f.read(8)
            if len(chunk_head) < 8:
                break
            tag, size = struct.unpack("<4sI", chunk_head)
            if tag == b"fmt ":
                fmt = _read_exact(f, size, "fmt chunk")
            elif tag == b"data":
                data = _read_exact(f, size, "data chunk")
            else:
                f.seek(size, 1)
            if size % 2:  # chunks are word-aligned
                f.seek(1, 1)
        if fmt is None or data is None:
            raise WavFormatError(f"{path}: missing fmt or data chunk")
        if len(fmt) < 16:
            raise WavFormatError(f"{path}: malformed fmt chunk")
        codec, channels, rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])

    if channels not in (1, 2):
        raise WavFormatError(f"{path}: unsupported channel count {channels}")
    if codec == 1 and bits == 16:
        raw = np.frombuffer(data, dtype="<i2").astype(np.float64) / _PCM16_SCALE
    elif codec == 3 and bits == 32:
        raw = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise WavFormatError(
            f"{path}: unsupported encoding (format tag {codec}, {bits}-bit); "
            "only 16-bit PCM and 32-bit float are readable"
        )
    if raw.size == 0:
        raise WavFormatError(f"{path}: zero-length data payload")
    if raw.size % channels:
        raise WavFormatError(f"{path}: data payload not a whole number of frames")
    return [AudioClip(raw[c::channels].copy(), rate) for c in range(channels)]


def save_wav(path, clip: AudioClip) -> None:
    """Write a mono clip as 16-bit PCM.

    Samples are clamped to [-1, 1] and rounded to the nearest level, so a
    load/save round trip is exact to within one quantization step (1/32768).
    """
    x = np.clip(clip.samples, -1.0, 1.0)
    q = np.clip(np.round(x * _PCM16_SCALE), -32768, 32767).astype("<i2")
    payload = q.tobytes()
    with open(path, "wb") as f:
        f.write(b"RIFF")
        f.write(struct.pack("<I", 36 + len(payload)))
        f.write(b"WAVE")
        f.write(struct.pack("<4sIHHIIHH", b"fmt ", 16, 1, 1,
                            clip.rate, clip.rate * 2, 2, 16))
        f.write(struct.pack("<4sI", b"data", len(payload)))
        f.write(payload)
        if len(payload) % 2:
            f.write(b"\x00")


def _decimation_filter(factor: int) -> np.ndarray:
    """Linear-phase windowed-sinc lowpass for integer decimation."""
    n = np.arange(_SINC_TAPS)
    center = (_SINC_TAPS - 1) / 2.0
    h = np.sinc((n - center) / factor) * np.kaiser(_SINC_TAPS, _KAISER_BETA)
    return h / h.sum()


def resample_to_8k(clip: AudioClip) -> AudioClip:
    """Resample a clip to 8 kHz.

    Input rates 8000 (pass-through copy), 16000 and 48000 are supported;
    any other rate raises ValueError. Output length is
    ceil(len * 8000 / rate).
    """
    if clip.rate == TARGET_RATE:
        return AudioClip(clip.samples.copy(), TARGET_RATE)
    if clip.rate not in SUPPORTED_INPUT_RATES:
        raise ValueError(
            f"unsupported input rate {clip.rate}; expected one of {SUPPORTED_INPUT_RATES}"
        )
    factor = clip.rate // TARGET_RATE
    out_len = math.ceil(len(clip) / factor)
    h = _decimation_filter(factor)
    filtered = np.convolve(clip.samples, h, mode="full")
    # pick every factor-th sample at the filter's (integer part of) group delay
    start = (_SINC_TAPS - 1) // 2
    idx = start + factor * np.arange(out_len)
    return AudioClip(filtered[idx], TARGET_RATE)


def convolve(clip: AudioClip, ir: ImpulseResponse) -> AudioClip:
    """Full linear convolution of a clip with an impulse response."""
    if clip.rate != ir.rate:
        raise ValueError(f"rate mismatch: clip {clip.rate} Hz vs impulse response {ir.rate} Hz")
    return AudioClip(np.convolve(clip.samples, ir.taps, mode="full"), clip.rate)


def mix_pointwise(clips: list[AudioClip], gains=None) -> AudioClip:
    """Pointwise sum of clips (the synthetic, channel-free mixing model).

    Shorter clips are end-padded with zeros to the longest. All clips must
    share one sample rate. Optional per-clip gains are applied before
    summing; the result is not renormalized.
    """
    if not clips:
        raise ValueError("mix_pointwise needs at least one clip")
    rates = {c.rate for c in clips}
    if len(rates) != 1:
        raise ValueError(f"rate mismatch across clips: {sorted(rates)}")
    if gains is None:
        gains = [1.0] * len(clips)
    if len(gains) != len(clips):
        raise ValueError("one gain per clip required")
    n = max(len(c) for c in clips)
    out = np.zeros(n, dtype=np.float64)
    for clip, g in zip(clips, gains):
        out[: len(clip)] += g * clip.samples
    return AudioClip(out, clips[0].rate)


def pad_to(clip: AudioClip, length: int) -> AudioClip:
    """End-pad with zeros to `length` (error if the clip is longer)."""
    if len(clip) > length:
        raise ValueError(f"clip of length {len(clip)} does not fit in {length}")
    out = np.zeros(length, dtype=np.float64)
    out[: len(clip)] = clip.samples
    return AudioClip(out, clip.rate)
