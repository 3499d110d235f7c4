"""Harness configuration: strict JSON schema, defaults, canonical hashing.

Unknown keys, missing required keys, wrong types and out-of-range values
are all rejected with the offending key path (e.g. "device.jitter.mode").
The fully-defaulted canonical form of a config is hashed (sha256) and
stamped into every artifact so runs can be traced to their settings.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .duplex import JITTER_MODES, DeviceConfig, JitterModel
from .separator import SeparatorConfig, TrainConfig


class ConfigError(ValueError):
    """Raised for malformed harness configs; the message names the key path."""


_REQUIRED = object()


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _take_int(data: dict, key: str, path: str, default=_REQUIRED, minimum=None,
              allow_none: bool = False):
    return _take_number(data, key, path, default, minimum, allow_none, integral=True)


def _take_float(data: dict, key: str, path: str, default=_REQUIRED, minimum=None,
                maximum=None, exclusive_min: bool = False, exclusive_max: bool = False):
    value = _take_number(data, key, path, default, None, False, integral=False)
    where = f"{path}.{key}"
    if minimum is not None:
        if exclusive_min:
            _expect(value > minimum, where, f"must be > {minimum}, got {value}")
        else:
            _expect(value >= minimum, where, f"must be >= {minimum}, got {value}")
    if maximum is not None:
        if exclusive_max:
            _expect(value < maximum, where, f"must be < {maximum}, got {value}")
        else:
            _expect(value <= maximum, where, f"must be <= {maximum}, got {value}")
    return value


def _take_number(data, key, path, default, minimum, allow_none, integral):
    where = f"{path}.{key}"
    if key not in data:
        if default is _REQUIRED:
            raise ConfigError(f"{where}: missing required key")
        return default
    value = data.pop(key)
    if value is None and allow_none:
        return None
    if integral:
        _expect(isinstance(value, int) and not isinstance(value, bool), where,
                f"must be an integer, got {value!r}")
    else:
        _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
                where, f"must be a number, got {value!r}")
        value = float(value)
        _expect(math.isfinite(value), where, "must be finite")
    if minimum is not None:
        _expect(value >= minimum, where, f"must be >= {minimum}, got {value}")
    return value


def _take_str(data: dict, key: str, path: str, default=_REQUIRED, choices=None):
    where = f"{path}.{key}"
    if key not in data:
        if default is _REQUIRED:
            raise ConfigError(f"{where}: missing required key")
        return default
    value = data.pop(key)
    _expect(isinstance(value, str) and value != "", where,
            f"must be a non-empty string, got {value!r}")
    if choices is not None:
        _expect(value in choices, where, f"must be one of {list(choices)}, got {value!r}")
    return value


def _take_section(data: dict, key: str, path: str) -> dict:
    where = f"{path}.{key}" if path else key
    value = data.pop(key, {})
    _expect(isinstance(value, dict), where, f"must be an object, got {type(value).__name__}")
    return dict(value)


def _reject_unknown(data: dict, path: str) -> None:
    if data:
        name = sorted(data)[0]
        where = f"{path}.{name}" if path else name
        raise ConfigError(f"{where}: unknown key")


@dataclass(frozen=True)
class CorpusSection:
    source_kind: str
    source_params: dict
    mixture_count: int
    split_ratio: tuple[int, int, int]
    length_ratio_min: float
    max_uses_per_speaker: int | None
    max_uses_per_sentence: int | None
    max_retries: int
    seed: int
    output_dir: str


@dataclass(frozen=True)
class ChannelSection:
    mic_distance_m: float
    speaker_spacing_m: float
    gain_ref: float
    reverb_tail_ms: float
    reverb_level: float
    reverb_seed: int
    noise_std: float
    noise_seed: int


@dataclass(frozen=True)
class EvalSection:
    distances_m: tuple[float, ...]
    kmeans_iters: int
    kmeans_seed: int
    output_dir: str


@dataclass(frozen=True)
class HarnessConfig:
    corpus: CorpusSection
    device: DeviceConfig
    jitter: JitterModel
    channel: ChannelSection
    model: SeparatorConfig
    train: TrainConfig
    eval: EvalSection
    canonical: dict

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.canonical, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _parse_source(section: dict, path: str) -> tuple[str, dict, dict]:
    kind = _take_str(section, "kind", path, choices=("toy", "wav_dir"))
    if kind == "toy":
        speakers = _take_int(section, "speakers", path, default=8, minimum=2)
        sentences = _take_int(section, "sentences_per_speaker", path, default=6, minimum=1)
        where = f"{path}.duration_range_s"
        rng = section.pop("duration_range_s", [1.25, 1.65])
        _expect(isinstance(rng, list) and len(rng) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rng),
                where, f"must be a [lo, hi] number pair, got {rng!r}")
        lo, hi = float(rng[0]), float(rng[1])
        _expect(0.5 <= lo <= hi <= 5.0, where,
                f"must satisfy 0.5 <= lo <= hi <= 5.0, got {rng!r}")
        params = {"speakers": speakers, "sentences_per_speaker": sentences,
                  "duration_range_s": [lo, hi]}
    else:
        params = {"path": _take_str(section, "path", path)}
    _reject_unknown(section, path)
    canonical = {"kind": kind, **params}
    return kind, params, canonical


def validate_config(raw: dict) -> HarnessConfig:
    """Check a parsed JSON object against the schema and apply defaults."""
    _expect(isinstance(raw, dict), "<root>", "config must be a JSON object")
    data = dict(raw)

    corpus_raw = _take_section(data, "corpus", "")
    _expect("source" in corpus_raw, "corpus.source", "missing required key")
    source_kind, source_params, source_canon = _parse_source(
        _take_section(corpus_raw, "source", "corpus"), "corpus.source")
    ratio_raw = corpus_raw.pop("split_ratio", [6, 2, 1])
    _expect(isinstance(ratio_raw, list) and len(ratio_raw) == 3
            and all(isinstance(v, int) and not isinstance(v, bool) and v >= 1
                    for v in ratio_raw),
            "corpus.split_ratio", f"must be three integers >= 1, got {ratio_raw!r}")
    corpus = CorpusSection(
        source_kind=source_kind,
        source_params=source_params,
        mixture_count=_take_int(corpus_raw, "mixture_count", "corpus", minimum=1),
        split_ratio=tuple(ratio_raw),
        length_ratio_min=_take_float(corpus_raw, "length_ratio_min", "corpus",
                                     default=0.8, minimum=0.0, maximum=1.0,
                                     exclusive_min=True),
        max_uses_per_speaker=_take_int(corpus_raw, "max_uses_per_speaker", "corpus",
                                       default=None, minimum=1, allow_none=True),
        max_uses_per_sentence=_take_int(corpus_raw, "max_uses_per_sentence", "corpus",
                                        default=None, minimum=1, allow_none=True),
        max_retries=_take_int(corpus_raw, "max_retries", "corpus", default=25, minimum=1),
        seed=_take_int(corpus_raw, "seed", "corpus", default=0),
        output_dir=_take_str(corpus_raw, "output_dir", "corpus", default="corpus"),
    )
    _reject_unknown(corpus_raw, "corpus")

    device_raw = _take_section(data, "device", "")
    jitter_raw = _take_section(device_raw, "jitter", "device")
    jitter_kwargs = {
        "mode": _take_str(jitter_raw, "mode", "device.jitter", default="off",
                          choices=JITTER_MODES),
        "stall_probability": _take_float(jitter_raw, "stall_probability", "device.jitter",
                                         default=0.0, minimum=0.0, maximum=1.0),
        "stall_cycles": _take_int(jitter_raw, "stall_cycles", "device.jitter",
                                  default=1, minimum=1),
    }
    _reject_unknown(jitter_raw, "device.jitter")
    device_kwargs = {
        "sample_rate": _take_int(device_raw, "sample_rate", "device", default=8000, minimum=1),
        "buffer_frames": _take_int(device_raw, "buffer_frames", "device", default=256,
                                   minimum=64),
        "seed": _take_int(device_raw, "seed", "device", default=0),
    }
    _reject_unknown(device_raw, "device")

    channel_raw = _take_section(data, "channel", "")
    reverb_raw = _take_section(channel_raw, "reverb", "channel")
    reverb = {
        "tail_ms": _take_float(reverb_raw, "tail_ms", "channel.reverb", default=40.0,
                               minimum=0.0),
        "level": _take_float(reverb_raw, "level", "channel.reverb", default=0.2,
                             minimum=0.0),
        "seed": _take_int(reverb_raw, "seed", "channel.reverb", default=0),
    }
    _reject_unknown(reverb_raw, "channel.reverb")
    channel = ChannelSection(
        mic_distance_m=_take_float(channel_raw, "mic_distance_m", "channel", default=2.0,
                                   minimum=0.0, exclusive_min=True),
        speaker_spacing_m=_take_float(channel_raw, "speaker_spacing_m", "channel",
                                      default=0.5, minimum=0.0),
        gain_ref=_take_float(channel_raw, "gain_ref", "channel", default=1.0,
                             minimum=0.0, exclusive_min=True),
        reverb_tail_ms=reverb["tail_ms"],
        reverb_level=reverb["level"],
        reverb_seed=reverb["seed"],
        noise_std=_take_float(channel_raw, "noise_std", "channel", default=0.0, minimum=0.0),
        noise_seed=_take_int(channel_raw, "noise_seed", "channel", default=0),
    )
    _reject_unknown(channel_raw, "channel")

    model_raw = _take_section(data, "model", "")
    model_kwargs = {
        "layers": _take_int(model_raw, "layers", "model", default=4, minimum=1),
        "hidden_per_direction": _take_int(model_raw, "hidden_per_direction", "model",
                                          default=300, minimum=1),
        "bins": _take_int(model_raw, "bins", "model", default=129, minimum=2),
        "embed_dim": _take_int(model_raw, "embed_dim", "model", default=20, minimum=1),
        "speakers": _take_int(model_raw, "speakers", "model", default=2, minimum=2),
    }
    _reject_unknown(model_raw, "model")

    train_raw = _take_section(data, "train", "")
    train_kwargs = {
        "epochs": _take_int(train_raw, "epochs", "train", default=300, minimum=1),
        "batch_size": _take_int(train_raw, "batch_size", "train", default=128, minimum=1),
        "learning_rate": _take_float(train_raw, "learning_rate", "train", default=1e-3,
                                     minimum=0.0, exclusive_min=True),
        "plateau_patience": _take_int(train_raw, "plateau_patience", "train", default=3,
                                      minimum=1),
        "lr_factor": _take_float(train_raw, "lr_factor", "train", default=0.5,
                                 minimum=0.0, maximum=1.0, exclusive_min=True,
                                 exclusive_max=True),
        "beta1": _take_float(train_raw, "beta1", "train", default=0.9, minimum=0.0,
                             maximum=1.0, exclusive_max=True),
        "beta2": _take_float(train_raw, "beta2", "train", default=0.999, minimum=0.0,
                             maximum=1.0, exclusive_max=True),
        "eps": _take_float(train_raw, "eps", "train", default=1e-8, minimum=0.0,
                           exclusive_min=True),
        "seed": _take_int(train_raw, "seed", "train", default=0),
    }
    _reject_unknown(train_raw, "train")

    eval_raw = _take_section(data, "eval", "")
    distances_raw = eval_raw.pop("distances_m", [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    _expect(isinstance(distances_raw, list) and distances_raw
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0
                    for v in distances_raw),
            "eval.distances_m", f"must be a non-empty list of positive numbers, "
            f"got {distances_raw!r}")
    eval_section = EvalSection(
        distances_m=tuple(float(v) for v in distances_raw),
        kmeans_iters=_take_int(eval_raw, "kmeans_iters", "eval", default=25, minimum=1),
        kmeans_seed=_take_int(eval_raw, "kmeans_seed", "eval", default=0),
        output_dir=_take_str(eval_raw, "output_dir", "eval", default="results"),
    )
    _reject_unknown(eval_raw, "eval")

    _reject_unknown(data, "")

    canonical = {
        "corpus": {
            "source": source_canon,
            "mixture_count": corpus.mixture_count,
            "split_ratio": list(corpus.split_ratio),
            "length_ratio_min": corpus.length_ratio_min,
            "max_uses_per_speaker": corpus.max_uses_per_speaker,
            "max_uses_per_sentence": corpus.max_uses_per_sentence,
            "max_retries": corpus.max_retries,
            "seed": corpus.seed,
            "output_dir": corpus.output_dir,
        },
        "device": {**device_kwargs, "jitter": jitter_kwargs},
        "channel": {
            "mic_distance_m": channel.mic_distance_m,
            "speaker_spacing_m": channel.speaker_spacing_m,
            "gain_ref": channel.gain_ref,
            "reverb": reverb,
            "noise_std": channel.noise_std,
            "noise_seed": channel.noise_seed,
        },
        "model": model_kwargs,
        "train": train_kwargs,
        "eval": {
            "distances_m": list(eval_section.distances_m),
            "kmeans_iters": eval_section.kmeans_iters,
            "kmeans_seed": eval_section.kmeans_seed,
            "output_dir": eval_section.output_dir,
        },
    }

    try:
        return HarnessConfig(
            corpus=corpus,
            device=DeviceConfig(**device_kwargs),
            jitter=JitterModel(**jitter_kwargs),
            channel=channel,
            model=SeparatorConfig(**model_kwargs),
            train=TrainConfig(**train_kwargs),
            eval=eval_section,
            canonical=canonical,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


PAPER_SCALE_OVERRIDES = {
    "model": {"layers": 4, "hidden_per_direction": 300, "embed_dim": 20},
    "train": {"epochs": 300, "batch_size": 128, "learning_rate": 1e-3},
}


def load_config(path, seed: int | None = None, paper_scale: bool = False) -> HarnessConfig:
    """Read, validate and finalize a harness config file.

    `seed` (the CLI --seed flag) replaces corpus.seed with N and train.seed
    with N + 1. `paper_scale` restores the full-scale model and training
    hyperparameters (4x300 GRU, 20-dim embeddings, 300 epochs, batch 128).
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if seed is not None or paper_scale:
        if not isinstance(raw, dict):
            raise ConfigError("<root>: config must be a JSON object")
        raw = json.loads(json.dumps(raw))  # deep copy before mutation
        if seed is not None:
            raw.setdefault("corpus", {})["seed"] = seed
            raw.setdefault("train", {})["seed"] = seed + 1
        if paper_scale:
            for section, overrides in PAPER_SCALE_OVERRIDES.items():
                raw.setdefault(section, {}).update(overrides)
    return validate_config(raw)
