"""Corpus forging: toy utterances, mixture planning, paired capture, manifest.

A corpus pairs every planned two-speaker mixture with three captured files
(solo ground truths gts1/gts2 and the stereo realmix, all recorded through
the simulated duplex rig until their corruption counters are zero) plus a
synthetic twin (plain pointwise sum of the same sources, no rig). The
manifest records sources, file paths, split membership and retry counts,
and is byte-stable for a given configuration.

Utterance files follow `<dialect>_<gender><speaker_id>_<sentence_id>.wav`
(an optional dash after the gender letter is accepted when parsing, never
emitted).
"""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .audio import AudioClip, load_wav, mix_pointwise, pad_to, resample_to_8k, save_wav
from .duplex import (
    ChannelModel,
    DeviceConfig,
    JitterModel,
    Recording,
    play_record,
    play_record_stereo,
)

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA = "sepforge-corpus/1"
SPLIT_NAMES = ("train", "valid", "test")

_NAME_RE = re.compile(
    r"^(?P<dialect>[A-Za-z0-9]+)_(?P<gender>[MF])-?(?P<speaker>[A-Za-z0-9]+)"
    r"_(?P<sentence>[A-Za-z0-9]+)\.wav$"
)


class UtteranceNameError(ValueError):
    """Raised for file names that do not follow the utterance grammar."""


class PlanningError(RuntimeError):
    """Raised when a mixture plan cannot satisfy its constraints."""


class CaptureRetryError(RuntimeError):
    """Raised when a capture stays corrupted for every allowed attempt."""


def parse_utterance_name(name: str) -> dict:
    """Parse `<dialect>_<gender><speaker_id>_<sentence_id>.wav`."""
    m = _NAME_RE.match(name)
    if not m:
        raise UtteranceNameError(
            f"bad utterance file name {name!r}; expected "
            "<dialect>_<gender><speaker_id>_<sentence_id>.wav with gender M or F")
    return {
        "dialect": m.group("dialect"),
        "gender": m.group("gender"),
        "speaker_id": m.group("speaker"),
        "sentence_id": m.group("sentence"),
    }


def format_utterance_name(dialect: str, gender: str, speaker_id: str, sentence_id: str) -> str:
    name = f"{dialect}_{gender}{speaker_id}_{sentence_id}.wav"
    parsed = parse_utterance_name(name)  # reject parts that break the grammar
    if (parsed["dialect"], parsed["speaker_id"], parsed["sentence_id"]) != (
            dialect, speaker_id, sentence_id):
        raise UtteranceNameError(
            f"fields {dialect!r}, {gender!r}, {speaker_id!r}, {sentence_id!r} "
            "do not round-trip through the name grammar")
    return name


@dataclass(frozen=True)
class UtteranceInfo:
    """One catalog entry: a parsed utterance file plus its 8 kHz length."""

    path: str
    dialect: str
    gender: str
    speaker_id: str
    sentence_id: str
    n_samples: int

    @property
    def name(self) -> str:
        return Path(self.path).name


# ---------------------------------------------------------------------------
# Toy utterance synthesis

@dataclass(frozen=True)
class ToySpeakerProfile:
    """Source-filter voice recipe: pitch plus formant resonances."""

    f0: float
    formants: tuple[float, ...]
    bandwidths: tuple[float, ...]

    def __post_init__(self):
        if not 70.0 <= self.f0 <= 300.0:
            raise ValueError(f"f0 must be within [70, 300] Hz, got {self.f0}")
        if len(self.formants) != len(self.bandwidths) or not self.formants:
            raise ValueError("formants and bandwidths must be non-empty and parallel")
        for f in self.formants:
            if not 200.0 <= f <= 3800.0:
                raise ValueError(f"formant {f} Hz outside (200, 3800)")


TOY_PROFILES = (
    ToySpeakerProfile(208.0, (310.0, 2790.0, 3310.0), (50.0, 75.0, 110.0)),
    ToySpeakerProfile(118.0, (270.0, 2290.0, 3010.0), (45.0, 70.0, 100.0)),
    ToySpeakerProfile(234.0, (860.0, 2050.0, 2850.0), (55.0, 85.0, 110.0)),
    ToySpeakerProfile(132.0, (660.0, 1720.0, 2410.0), (50.0, 75.0, 105.0)),
    ToySpeakerProfile(190.0, (560.0, 920.0, 2710.0), (55.0, 70.0, 105.0)),
    ToySpeakerProfile(104.0, (460.0, 1060.0, 2350.0), (50.0, 65.0, 100.0)),
    ToySpeakerProfile(246.0, (980.0, 1850.0, 3150.0), (50.0, 75.0, 105.0)),
    ToySpeakerProfile(124.0, (500.0, 1500.0, 2500.0), (50.0, 75.0, 105.0)),
)

TOY_RATE = 8000
TOY_LEAD_SAMPLES = 256
_TOY_PEAK = 0.45


def toy_profile_for_speaker(index: int) -> ToySpeakerProfile:
    """Profile table lookup; extra speakers get pitch/formant-shifted variants."""
    base = TOY_PROFILES[index % len(TOY_PROFILES)]
    rounds = index // len(TOY_PROFILES)
    if rounds == 0:
        return base
    f0 = min(300.0, max(70.0, base.f0 * (1.0 + 0.05 * rounds)))
    formants = tuple(min(3800.0, f * (1.0 + 0.03 * rounds)) for f in base.formants)
    return ToySpeakerProfile(f0, formants, base.bandwidths)


def _resonator(x: np.ndarray, freq: float, bandwidth: float, rate: int) -> np.ndarray:
    r = math.exp(-math.pi * bandwidth / rate)
    theta = 2.0 * math.pi * freq / rate
    return lfilter([1.0 - r], [1.0, -2.0 * r * math.cos(theta), r * r], x)


def generate_toy_utterance(profile: ToySpeakerProfile, duration_s: float, seed) -> AudioClip:
    """Deterministic vowel-like babble for one synthetic speaker.

    A jittered glottal pulse train at the profile's pitch is shaped by a
    spectral-tilt pole and the profile's formant resonators, then modulated
    with a seeded syllable-rate envelope behind a short silent lead-in.
    Duration must lie in [0.5, 5] s; the output has
    round(duration_s * 8000) samples at 8 kHz.
    """
    if not 0.5 <= duration_s <= 5.0:
        raise ValueError(f"duration must be within [0.5, 5] s, got {duration_s}")
    n = round(duration_s * TOY_RATE)
    rng = np.random.default_rng(seed)

    excitation = np.zeros(n)
    pos = 0.0
    base_period = TOY_RATE / profile.f0
    while pos < n:
        excitation[int(pos)] += 1.0
        period = base_period * (1.0 + 0.04 * rng.standard_normal())
        pos += max(period, TOY_RATE / 350.0)
    excitation += 0.008 * rng.standard_normal(n)

    voiced = lfilter([1.0], [1.0, -0.65], excitation)  # glottal spectral tilt
    for freq, bw in zip(profile.formants, profile.bandwidths):
        voiced = _resonator(voiced, freq, bw, TOY_RATE)

    # syllable-rate amplitude movement
    n_nodes = max(3, math.ceil(duration_s * 3.5) + 2)
    nodes = rng.uniform(0.25, 1.0, n_nodes)
    node_pos = np.linspace(0.0, n - 1, n_nodes)
    envelope = np.interp(np.arange(n), node_pos, nodes)
    smooth_len = min(n, 401)
    kernel = np.hanning(smooth_len)
    envelope = np.convolve(envelope, kernel / kernel.sum(), mode="same")
    # room-tone lead-in: keeps the first analysis frame of any mixture silent
    lead = min(TOY_LEAD_SAMPLES, n // 4)
    envelope[:lead] = 0.0
    fade = min(80, (n - lead) // 2)
    if fade:
        ramp = np.sin(0.5 * np.pi * np.linspace(0.0, 1.0, fade)) ** 2
        envelope[lead:lead + fade] *= ramp
        envelope[-fade:] *= ramp[::-1]

    out = voiced * envelope
    peak = np.max(np.abs(out))
    if peak > 0:
        out *= _TOY_PEAK / peak
    return AudioClip(out, TOY_RATE)


def build_toy_catalog(utterance_dir, n_speakers: int, sentences_per_speaker: int,
                      duration_range_s: tuple[float, float], seed: int) -> list[UtteranceInfo]:
    """Synthesize and save a toy utterance set; returns the catalog.

    Speakers alternate F/M and cycle through 8 dialect labels. Every
    utterance is deterministic in (seed, speaker index, sentence index).
    """
    if n_speakers < 2:
        raise ValueError(f"need at least 2 speakers, got {n_speakers}")
    if sentences_per_speaker < 1:
        raise ValueError("need at least one sentence per speaker")
    lo, hi = duration_range_s
    if not 0.5 <= lo <= hi <= 5.0:
        raise ValueError(f"duration range must lie within [0.5, 5] s, got {duration_range_s}")
    utterance_dir = Path(utterance_dir)
    utterance_dir.mkdir(parents=True, exist_ok=True)
    catalog = []
    for s in range(n_speakers):
        profile = toy_profile_for_speaker(s)
        gender = "F" if s % 2 == 0 else "M"
        dialect = f"DR{1 + s % 8}"
        speaker_id = f"S{s:02d}"
        for j in range(sentences_per_speaker):
            ss = np.random.SeedSequence((seed, s, j))
            dur_rng = np.random.default_rng(ss.spawn(1)[0])
            duration = float(dur_rng.uniform(lo, hi))
            clip = generate_toy_utterance(profile, duration, ss)
            name = format_utterance_name(dialect, gender, speaker_id, f"SX{j:02d}")
            save_wav(utterance_dir / name, clip)
            catalog.append(UtteranceInfo(
                path=str(utterance_dir / name), dialect=dialect, gender=gender,
                speaker_id=speaker_id, sentence_id=f"SX{j:02d}", n_samples=len(clip)))
    return catalog


def load_utterance(info: UtteranceInfo) -> AudioClip:
    """Load a catalog entry as mono 8 kHz."""
    channels = load_wav(info.path)
    if len(channels) != 1:
        raise ValueError(f"{info.path}: utterances must be mono")
    return resample_to_8k(channels[0])


def scan_wav_catalog(directory) -> list[UtteranceInfo]:
    """Catalog an existing directory of utterance WAV files (sorted by name)."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.wav"))
    if not paths:
        raise FileNotFoundError(f"no .wav files under {directory}")
    catalog = []
    for path in paths:
        fields = parse_utterance_name(path.name)
        channels = load_wav(path)
        if len(channels) != 1:
            raise ValueError(f"{path}: utterances must be mono")
        n_8k = math.ceil(len(channels[0]) * TOY_RATE / channels[0].rate)
        catalog.append(UtteranceInfo(path=str(path), n_samples=n_8k, **fields))
    return catalog


# ---------------------------------------------------------------------------
# Mixture planning

@dataclass(frozen=True)
class MixturePlan:
    src_a: UtteranceInfo
    src_b: UtteranceInfo
    gain_a: float = 1.0
    gain_b: float = 1.0


def plan_mixtures(catalog: list[UtteranceInfo], count: int, seed: int, *,
                  length_ratio_min: float = 0.8,
                  max_uses_per_speaker: int | None = None,
                  max_uses_per_sentence: int | None = None) -> list[MixturePlan]:
    """Draw `count` two-speaker pairings from the catalog.

    Every plan pairs utterances of two distinct speakers whose 8 kHz length
    ratio (short/long) is at least length_ratio_min. Selection favors the
    least-used speakers, then sentences, then utterances, with a seeded
    random tie-break, keeping usage balanced; optional hard caps bound how
    often one speaker or sentence id may appear across all plans.

    Raises:
        PlanningError: fewer than two distinct speakers, or the constraints
            leave no legal pair for some plan (the message names the
            binding constraint).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if not 0.0 < length_ratio_min <= 1.0:
        raise ValueError(f"length_ratio_min must be in (0, 1], got {length_ratio_min}")
    if len({u.speaker_id for u in catalog}) < 2:
        raise PlanningError("planning needs utterances from at least two distinct speakers")
    cap_speaker = math.inf if max_uses_per_speaker is None else max_uses_per_speaker
    cap_sentence = math.inf if max_uses_per_sentence is None else max_uses_per_sentence

    rng = np.random.default_rng(seed)
    speaker_use: dict[str, int] = {}
    sentence_use: dict[str, int] = {}
    utt_use: dict[int, int] = {}
    plans = []

    def usable(ci: int) -> bool:
        u = catalog[ci]
        return (speaker_use.get(u.speaker_id, 0) < cap_speaker
                and sentence_use.get(u.sentence_id, 0) < cap_sentence)

    def ratio_ok(a: UtteranceInfo, b: UtteranceInfo) -> bool:
        lo, hi = sorted((a.n_samples, b.n_samples))
        return lo >= length_ratio_min * hi

    def bump(u: UtteranceInfo, ci: int) -> None:
        speaker_use[u.speaker_id] = speaker_use.get(u.speaker_id, 0) + 1
        sentence_use[u.sentence_id] = sentence_use.get(u.sentence_id, 0) + 1
        utt_use[ci] = utt_use.get(ci, 0) + 1

    for plan_idx in range(count):
        pool = [ci for ci in range(len(catalog)) if usable(ci)]
        if not pool:
            raise PlanningError(
                f"cannot plan mixture {plan_idx + 1}/{count}: usage caps exhausted "
                "every utterance (binding constraint: max_uses_per_speaker/"
                "max_uses_per_sentence)")
        jitter = rng.random(len(catalog))

        def key(ci: int):
            u = catalog[ci]
            return (speaker_use.get(u.speaker_id, 0), sentence_use.get(u.sentence_id, 0),
                    utt_use.get(ci, 0), jitter[ci], ci)

        blocked_speaker = 0
        blocked_ratio = 0
        chosen = None
        for a_ci in sorted(pool, key=key):
            a = catalog[a_ci]
            partners = []
            for b_ci in pool:
                if b_ci == a_ci:
                    continue
                b = catalog[b_ci]
                if b.speaker_id == a.speaker_id:
                    blocked_speaker += 1
                    continue
                if not ratio_ok(a, b):
                    blocked_ratio += 1
                    continue
                partners.append(b_ci)
            if partners:
                b_ci = min(partners, key=key)
                chosen = (a_ci, b_ci)
                break
        if chosen is None:
            reasons = []
            if blocked_ratio:
                reasons.append(f"length ratio < {length_ratio_min} blocked {blocked_ratio} pairings")
            if blocked_speaker:
                reasons.append(f"same-speaker rule blocked {blocked_speaker} pairings")
            if not reasons:
                reasons.append("usage caps left no partner utterances")
            raise PlanningError(
                f"cannot plan mixture {plan_idx + 1}/{count}: no legal pair remains "
                f"({'; '.join(reasons)})")
        a_ci, b_ci = chosen
        bump(catalog[a_ci], a_ci)
        bump(catalog[b_ci], b_ci)
        plans.append(MixturePlan(src_a=catalog[a_ci], src_b=catalog[b_ci]))
    return plans


def split_counts(n: int, ratio: tuple[int, int, int] = (6, 2, 1)) -> tuple[int, int, int]:
    """Apportion n plans to train/valid/test by largest remainder."""
    if n < 1:
        raise ValueError("need at least one plan")
    if len(ratio) != 3 or any(r <= 0 for r in ratio):
        raise ValueError(f"ratio must be three positive numbers, got {ratio}")
    total = sum(ratio)
    quotas = [n * r / total for r in ratio]
    counts = [math.floor(q) for q in quotas]
    leftovers = sorted(range(3), key=lambda i: (counts[i] - quotas[i], i))
    for i in range(n - sum(counts)):
        counts[leftovers[i]] += 1
    return tuple(counts)


def assign_splits(plans: list[MixturePlan], ratio=(6, 2, 1)) -> list[str]:
    """Split name per plan, in plan order (plans are already seeded-shuffled)."""
    n_train, n_valid, n_test = split_counts(len(plans), ratio)
    return (["train"] * n_train) + (["valid"] * n_valid) + (["test"] * n_test)


# ---------------------------------------------------------------------------
# Capture

@dataclass
class RecordedPair:
    """The three captures for one plan, padded to one common length."""

    gts1: AudioClip
    gts2: AudioClip
    realmix: AudioClip
    retries: dict[str, int]


def _derived_seed(base_seed: int, capture_index: int, attempt: int) -> int:
    ss = np.random.SeedSequence((base_seed, capture_index, attempt))
    return int(ss.generate_state(1, np.uint64)[0])


def record_pair(clip_a: AudioClip, clip_b: AudioClip,
                channel_a: ChannelModel, channel_b: ChannelModel,
                device: DeviceConfig, jitter: JitterModel,
                max_retries: int = 25) -> RecordedPair:
    """Capture gts1 (a solo), gts2 (b solo) and realmix (both) cleanly.

    Each capture replays with a fresh derived device seed until its overrun
    and underrun counters are both zero; with jitter off the first attempt
    always succeeds. Sources are padded to a common length before any
    capture, so the three recordings line up sample-for-sample and
    realmix equals gts1 + gts2 exactly.

    Raises:
        CaptureRetryError: a capture stayed corrupted for max_retries attempts.
    """
    if max_retries < 1:
        raise ValueError(f"max_retries must be >= 1, got {max_retries}")
    n = max(len(clip_a), len(clip_b))
    pa = pad_to(clip_a, n)
    pb = pad_to(clip_b, n)

    def capture(name: str, index: int, run) -> tuple[Recording, int]:
        for attempt in range(max_retries):
            dev = dataclasses.replace(device, seed=_derived_seed(device.seed, index, attempt))
            rec = run(dev)
            if rec.clean:
                return rec, attempt
        raise CaptureRetryError(
            f"capture {name!r} still corrupted after {max_retries} attempts "
            f"(device seed {device.seed})")

    rec1, r1 = capture("gts1", 0, lambda d: play_record(pa, channel_a, d, jitter))
    rec2, r2 = capture("gts2", 1, lambda d: play_record(pb, channel_b, d, jitter))
    rec3, r3 = capture("realmix", 2,
                       lambda d: play_record_stereo([pa, pb], [channel_a, channel_b], d, jitter))

    out_len = max(len(rec1.samples), len(rec2.samples), len(rec3.samples))
    clips = [pad_to(AudioClip(r.samples, r.rate), out_len) for r in (rec1, rec2, rec3)]
    return RecordedPair(gts1=clips[0], gts2=clips[1], realmix=clips[2],
                        retries={"gts1": r1, "gts2": r2, "realmix": r3})


def build_synthetic_twin(clip_a: AudioClip, clip_b: AudioClip,
                         gain_a: float = 1.0, gain_b: float = 1.0) -> AudioClip:
    """Channel-free twin mixture: plain pointwise sum of the scaled sources."""
    return mix_pointwise([clip_a, clip_b], [gain_a, gain_b])


# ---------------------------------------------------------------------------
# Manifest and corpus build

@dataclass
class Manifest:
    root: Path
    data: dict

    @property
    def entries(self) -> list[dict]:
        return self.data["entries"]

    def entries_for(self, split: str) -> list[dict]:
        if split not in SPLIT_NAMES:
            raise ValueError(f"unknown split {split!r}, expected one of {SPLIT_NAMES}")
        return [e for e in self.entries if e["split"] == split]

    def path(self, relative: str) -> Path:
        return self.root / relative

    def save(self) -> None:
        text = json.dumps(self.data, indent=2, sort_keys=True) + "\n"
        (self.root / MANIFEST_NAME).write_text(text)

    @classmethod
    def load(cls, root) -> "Manifest":
        root = Path(root)
        data = json.loads((root / MANIFEST_NAME).read_text())
        if data.get("schema") != MANIFEST_SCHEMA:
            raise ValueError(
                f"{root / MANIFEST_NAME}: schema {data.get('schema')!r} is not {MANIFEST_SCHEMA!r}")
        return cls(root=root, data=data)


def _import_catalog(catalog: list[UtteranceInfo], utterance_dir: Path) -> list[UtteranceInfo]:
    """Copy external utterances into the corpus as mono 8 kHz PCM."""
    utterance_dir.mkdir(parents=True, exist_ok=True)
    imported = []
    for info in catalog:
        clip = load_utterance(info)
        dest = utterance_dir / info.name
        save_wav(dest, clip)
        imported.append(dataclasses.replace(info, path=str(dest), n_samples=len(clip)))
    return imported


def build_corpus(root, *, source_kind: str, source_params: dict, mixture_count: int,
                 seed: int, device: DeviceConfig, jitter: JitterModel,
                 channel_a: ChannelModel, channel_b: ChannelModel,
                 split_ratio=(6, 2, 1), length_ratio_min: float = 0.8,
                 max_uses_per_speaker: int | None = None,
                 max_uses_per_sentence: int | None = None,
                 max_retries: int = 25, config_hash: str = "",
                 log=None) -> Manifest:
    """Forge a complete corpus under `root` and return its manifest.

    source_kind "toy" synthesizes utterances from source_params
    (speakers, sentences_per_speaker, duration_range_s); "wav_dir" imports
    `source_params["path"]`. Every entry stores gts1/gts2/realmix captures
    (clean by construction), the synthetic twin, source metadata, per-capture
    retry counts and its split.
    """
    root = Path(root)
    say = log or (lambda msg: None)
    utterance_dir = root / "utterances"
    if source_kind == "toy":
        catalog = build_toy_catalog(
            utterance_dir,
            n_speakers=source_params["speakers"],
            sentences_per_speaker=source_params["sentences_per_speaker"],
            duration_range_s=tuple(source_params["duration_range_s"]),
            seed=seed)
    elif source_kind == "wav_dir":
        catalog = _import_catalog(scan_wav_catalog(source_params["path"]), utterance_dir)
    else:
        raise ValueError(f"unknown source kind {source_kind!r}")
    say(f"catalog ready: {len(catalog)} utterances")

    plans = plan_mixtures(catalog, mixture_count, seed,
                          length_ratio_min=length_ratio_min,
                          max_uses_per_speaker=max_uses_per_speaker,
                          max_uses_per_sentence=max_uses_per_sentence)
    splits = assign_splits(plans, split_ratio)

    for sub in ("GTS", "RealMix", "SynthMix"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    entries = []
    for idx, (plan, split) in enumerate(zip(plans, splits)):
        mix_id = f"mix{idx:04d}"
        clip_a = load_utterance(plan.src_a)
        clip_b = load_utterance(plan.src_b)
        clip_a = AudioClip(clip_a.samples * plan.gain_a, clip_a.rate)
        clip_b = AudioClip(clip_b.samples * plan.gain_b, clip_b.rate)
        pair = record_pair(clip_a, clip_b, channel_a, channel_b, device, jitter,
                           max_retries=max_retries)
        synth = build_synthetic_twin(clip_a, clip_b)

        files = {
            "gts1": f"GTS/{mix_id}_s1.wav",
            "gts2": f"GTS/{mix_id}_s2.wav",
            "realmix": f"RealMix/{mix_id}.wav",
            "synthmix": f"SynthMix/{mix_id}.wav",
        }
        save_wav(root / files["gts1"], pair.gts1)
        save_wav(root / files["gts2"], pair.gts2)
        save_wav(root / files["realmix"], pair.realmix)
        save_wav(root / files["synthmix"], synth)

        entries.append({
            "id": mix_id,
            "split": split,
            "sources": [
                _source_record(plan.src_a, plan.gain_a, root),
                _source_record(plan.src_b, plan.gain_b, root),
            ],
            "files": files,
            "retries": pair.retries,
            "samples": {"captured": len(pair.realmix), "synthetic": len(synth)},
        })
        say(f"{mix_id} [{split}] {plan.src_a.name} + {plan.src_b.name} "
            f"retries={pair.retries}")

    manifest = Manifest(root=root, data={
        "schema": MANIFEST_SCHEMA,
        "config_hash": config_hash,
        "sample_rate": device.sample_rate,
        "seed": seed,
        "entries": entries,
    })
    manifest.save()
    say(f"manifest written: {len(entries)} mixtures")
    return manifest


def _source_record(info: UtteranceInfo, gain: float, root: Path) -> dict:
    return {
        "path": str(Path(info.path).relative_to(root)),
        "dialect": info.dialect,
        "gender": info.gender,
        "speaker_id": info.speaker_id,
        "sentence_id": info.sentence_id,
        "gain": gain,
    }


def load_entry_clips(manifest: Manifest, entry: dict, condition: str):
    """Mixture and reference clips for one manifest entry.

    condition "realistic": the captured realmix with the captured solo
    ground truths as references. condition "synthetic": the pointwise-sum
    mixture with the gain-scaled raw sources (padded to the mixture length)
    as references.
    """
    files = entry["files"]
    if condition == "realistic":
        mixture = load_wav(manifest.path(files["realmix"]))[0]
        refs = [load_wav(manifest.path(files["gts1"]))[0],
                load_wav(manifest.path(files["gts2"]))[0]]
    elif condition == "synthetic":
        mixture = load_wav(manifest.path(files["synthmix"]))[0]
        refs = []
        for source in entry["sources"]:
            clip = resample_to_8k(load_wav(manifest.path(source["path"]))[0])
            refs.append(AudioClip(clip.samples * source["gain"], clip.rate))
        refs = [pad_to(r, len(mixture)) for r in refs]
    else:
        raise ValueError(f"condition must be 'realistic' or 'synthetic', got {condition!r}")
    return mixture, refs
