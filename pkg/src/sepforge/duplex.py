"""Full-duplex play/record rig simulation.

Models a loudspeaker->room->microphone channel (propagation delay, 1/distance
spreading loss, impulse response, sensor noise) and the buffer-level timing
behavior of a duplex audio device: a writer thread feeds the output buffer
one device cycle at a time, and a reader thread must drain the single input
buffer within the cycle it was captured in. Host-timing stalls cause

  * underruns - a stalled writer misses its slot, the device plays silence
    in place of that buffer (the clip cursor still advances), and
  * overruns  - a stalled reader misses its drain deadline and that cycle's
    captured buffer is overwritten before it is ever read (data lost).

Counters are in frames. With jitter off the recording equals the pure
channel application exactly, and a stereo capture equals the sum of the
per-source channel outputs (superposition).

Stall schedules are seeded: writer and reader draw from independent child
streams of the device seed, one uniform per active cycle, entering a stall
of `stall_cycles` cycles when the draw falls below `stall_probability`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioClip, ImpulseResponse, pad_to

SPEED_OF_SOUND = 343.0

_WRITER_STREAM = 0
_READER_STREAM = 1

JITTER_MODES = ("off", "reader", "writer", "both")


@dataclass
class ChannelModel:
    """Acoustic path from one source to the microphone."""

    distance_m: float
    ir: ImpulseResponse
    gain_ref: float = 1.0
    noise_std: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError(f"distance must be positive, got {self.distance_m}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be non-negative, got {self.noise_std}")

    @property
    def delay_samples(self) -> int:
        return int(round(self.distance_m / SPEED_OF_SOUND * self.ir.rate))

    @property
    def gain(self) -> float:
        return self.gain_ref / self.distance_m

    def output_length(self, input_length: int) -> int:
        return self.delay_samples + input_length + len(self.ir.taps) - 1


@dataclass(frozen=True)
class DeviceConfig:
    """Duplex device parameters."""

    sample_rate: int = 8000
    buffer_frames: int = 256
    seed: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        if self.buffer_frames < 64:
            raise ValueError(f"buffer_frames must be >= 64, got {self.buffer_frames}")


@dataclass(frozen=True)
class JitterModel:
    """Host-timing stall model for the writer/reader threads."""

    stall_probability: float = 0.0
    stall_cycles: int = 1
    mode: str = "off"

    def __post_init__(self):
        if not 0.0 <= self.stall_probability <= 1.0:
            raise ValueError(f"stall_probability must be in [0, 1], got {self.stall_probability}")
        if self.stall_cycles < 1:
            raise ValueError(f"stall_cycles must be >= 1, got {self.stall_cycles}")
        if self.mode not in JITTER_MODES:
            raise ValueError(f"mode must be one of {JITTER_MODES}, got {self.mode!r}")

    @property
    def writer_active(self) -> bool:
        return self.mode in ("writer", "both")

    @property
    def reader_active(self) -> bool:
        return self.mode in ("reader", "both")


@dataclass
class Recording:
    """Captured samples plus the corruption counters for the run."""

    samples: np.ndarray
    rate: int
    overrun_lost: int = 0
    underrun_inserted: int = 0

    @property
    def clean(self) -> bool:
        return self.overrun_lost == 0 and self.underrun_inserted == 0


def apply_channel(clip: AudioClip, channel: ChannelModel) -> AudioClip:
    """Propagate a clip through a channel (the reference, jitter-free path).

    Output is gain * (delayed clip convolved with the IR) plus seeded
    Gaussian sensor noise; length is delay + len(clip) + len(ir) - 1.
    """
    if clip.rate != channel.ir.rate:
        raise ValueError(f"rate mismatch: clip {clip.rate} Hz vs channel {channel.ir.rate} Hz")
    delay = channel.delay_samples
    out_len = channel.output_length(len(clip))
    y = np.zeros(out_len, dtype=np.float64)
    if len(clip):
        delayed = np.concatenate([np.zeros(delay), clip.samples])
        y[: len(delayed) + len(channel.ir.taps) - 1] = channel.gain * np.convolve(
            delayed, channel.ir.taps, mode="full"
        )
    if channel.noise_std > 0:
        rng = np.random.default_rng(channel.noise_seed)
        y += rng.normal(0.0, channel.noise_std, out_len)
    return AudioClip(y, clip.rate)


def stall_schedule(jitter: JitterModel, active: bool, n_cycles: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Boolean per-cycle stall flags for one thread.

    One uniform draw is consumed per non-stalled cycle; a draw below
    stall_probability starts a stall covering `stall_cycles` cycles.
    """
    flags = np.zeros(n_cycles, dtype=bool)
    if not active:
        return flags
    remaining = 0
    for k in range(n_cycles):
        if remaining > 0:
            flags[k] = True
            remaining -= 1
        elif rng.random() < jitter.stall_probability:
            flags[k] = True
            remaining = jitter.stall_cycles - 1
    return flags


def _thread_rng(device: DeviceConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((device.seed, stream)))


def _run_duplex(clips: list[AudioClip], channels: list[ChannelModel],
                device: DeviceConfig, jitter: JitterModel) -> Recording:
    if len(clips) != len(channels) or not clips:
        raise ValueError("need one channel per clip")
    for clip, channel in zip(clips, channels):
        if clip.rate != device.sample_rate or channel.ir.rate != device.sample_rate:
            raise ValueError("clip, channel and device sample rates must all match")

    buf = device.buffer_frames
    n_play = max(len(c) for c in clips)
    play_cycles = math.ceil(n_play / buf)
    n_cap = max(ch.output_length(n_play) for ch in channels)
    cap_cycles = math.ceil(n_cap / buf)

    writer_stall = stall_schedule(jitter, jitter.writer_active, play_cycles,
                                  _thread_rng(device, _WRITER_STREAM))
    reader_stall = stall_schedule(jitter, jitter.reader_active, cap_cycles,
                                  _thread_rng(device, _READER_STREAM))

    # Writer stage: assemble what the DAC actually emitted. A stalled cycle
    # plays silence in place of the pending buffer; the cursor advances.
    underrun = 0
    played = [pad_to(c, n_play).samples.copy() for c in clips]
    for k in range(play_cycles):
        if writer_stall[k]:
            lo, hi = k * buf, min((k + 1) * buf, n_play)
            for p in played:
                p[lo:hi] = 0.0
            underrun += hi - lo

    # The room sums the emitted channels at the microphone.
    capture = np.zeros(n_cap, dtype=np.float64)
    for p, channel in zip(played, channels):
        y = apply_channel(AudioClip(p, device.sample_rate), channel)
        capture[: len(y)] += y.samples

    # Capture stage: each cycle's buffer must be drained before the next
    # arrives; a stalled reader loses exactly that cycle's buffer.
    overrun = 0
    kept: list[np.ndarray] = []
    for k in range(cap_cycles):
        segment = capture[k * buf: min((k + 1) * buf, n_cap)]
        if reader_stall[k]:
            overrun += len(segment)
        else:
            kept.append(segment)

    samples = np.concatenate(kept) if kept else np.zeros(0)
    return Recording(samples=samples, rate=device.sample_rate,
                     overrun_lost=overrun, underrun_inserted=underrun)


def play_record(clip: AudioClip, channel: ChannelModel,
                device: DeviceConfig, jitter: JitterModel) -> Recording:
    """Play one clip through its channel while recording the microphone."""
    return _run_duplex([clip], [channel], device, jitter)


def play_record_stereo(clips: list[AudioClip], channels: list[ChannelModel],
                       device: DeviceConfig, jitter: JitterModel) -> Recording:
    """Play two clips simultaneously (one per output channel) and record the mix.

    The rig has a single writer and reader, so a stall silences or drops
    both sources at once and counters count device frames, not per-source
    frames.
    """
    if len(clips) != 2:
        raise ValueError(f"stereo playback needs exactly 2 clips, got {len(clips)}")
    return _run_duplex(clips, channels, device, jitter)


def room_impulse_response(rate: int, tail_ms: float, level: float,
                          distance_m: float, seed: int) -> ImpulseResponse:
    """Unit direct tap followed by a seeded exponentially decaying tail.

    The tail norm is level * distance_m, so after the channel's 1/distance
    spreading gain the reverberant energy is independent of distance while
    the direct path falls off; larger distances therefore mean a lower
    direct-to-reverberant ratio, as in a real room.
    """
    if tail_ms < 0 or level < 0:
        raise ValueError("tail_ms and level must be non-negative")
    n_tail = round(tail_ms / 1000.0 * rate)
    ir = np.zeros(1 + n_tail)
    ir[0] = 1.0
    if n_tail and level > 0:
        rng = np.random.default_rng(seed)
        t = np.arange(1, n_tail + 1)
        tail = rng.standard_normal(n_tail) * np.exp(-3.0 * t / n_tail)
        ir[1:] = tail * (level * distance_m / np.linalg.norm(tail))
    return ImpulseResponse(ir, rate)


def two_speaker_channels(rate: int, mic_distance_m: float, spacing_m: float,
                         gain_ref: float = 1.0, reverb_tail_ms: float = 40.0,
                         reverb_level: float = 0.2, reverb_seed: int = 0,
                         noise_std: float = 0.0, noise_seed: int = 0):
    """Channels for two speakers spacing_m apart, facing a mic mic_distance_m away.

    The path length of each speaker is the hypotenuse of the mic distance
    and half the spacing. Reverb and noise streams get distinct per-speaker
    seeds (seed, seed + 1).
    """
    if mic_distance_m <= 0 or spacing_m < 0:
        raise ValueError("mic_distance_m must be positive and spacing_m non-negative")
    path = math.sqrt(mic_distance_m ** 2 + (spacing_m / 2.0) ** 2)
    channels = []
    for i in range(2):
        ir = room_impulse_response(rate, reverb_tail_ms, reverb_level, path, reverb_seed + i)
        channels.append(ChannelModel(distance_m=path, ir=ir, gain_ref=gain_ref,
                                     noise_std=noise_std, noise_seed=noise_seed + i))
    return channels[0], channels[1]
