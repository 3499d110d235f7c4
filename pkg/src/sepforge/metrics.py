"""Scale-invariant SDR, permutation-invariant scoring, and test-set reports.

For an estimate s_hat scored against a reference s:

    s_target = (<s_hat, s> / ||s||^2) * s
    e_noise  = s_hat - s_target
    si_sdr   = 10 * log10(||s_target||^2 / ||e_noise||^2)

The value is capped at +100 dB when ||e_noise||^2 < 1e-20 * ||s_target||^2
(numerically perfect reconstruction) and floored at -100 dB when the
projection is zero. Multi-source scoring takes the best of the k!
estimate-to-reference assignments (PIT).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip
from .corpus import Manifest, load_entry_clips

SI_SDR_CAP_DB = 100.0
_CAP_RATIO = 1e-20


def _as_array(signal) -> np.ndarray:
    if isinstance(signal, AudioClip):
        return signal.samples
    return np.asarray(signal, dtype=np.float64)


def si_sdr(estimate, reference) -> float:
    """Scale-invariant SDR in dB of `estimate` against `reference`.

    Accepts AudioClips or plain arrays; lengths must match and the
    reference must not be all zeros.
    """
    est = _as_array(estimate)
    ref = _as_array(reference)
    if est.shape != ref.shape:
        raise ValueError(f"length mismatch: estimate {est.shape} vs reference {ref.shape}")
    ref_energy = float(ref @ ref)
    if ref_energy == 0.0:
        raise ValueError("reference signal is all zeros")
    alpha = float(est @ ref) / ref_energy
    target = alpha * ref
    noise = est - target
    p_target = float(target @ target)
    p_noise = float(noise @ noise)
    if p_noise < _CAP_RATIO * p_target:
        return SI_SDR_CAP_DB
    if p_target == 0.0:
        return -SI_SDR_CAP_DB
    return 10.0 * math.log10(p_target / p_noise)


@dataclass(frozen=True)
class PitScore:
    """Best-assignment scores: permutation[i] is the 1-based estimate index
    matched to reference i."""

    per_source_db: tuple[float, ...]
    mean_db: float
    permutation: tuple[int, ...]


def si_sdr_pit(estimates, references) -> PitScore:
    """Permutation-invariant SI-SDR across equal-count estimate/reference lists."""
    if len(estimates) != len(references) or not estimates:
        raise ValueError("need equally many (>= 1) estimates and references")
    k = len(references)
    table = np.empty((k, k))
    for i, est in enumerate(estimates):
        for j, ref in enumerate(references):
            table[i, j] = si_sdr(est, ref)
    best = None
    for perm in itertools.permutations(range(k)):
        scores = tuple(table[perm[j], j] for j in range(k))
        mean = sum(scores) / k
        if best is None or mean > best[0]:
            best = (mean, scores, perm)
    mean, scores, perm = best
    return PitScore(per_source_db=scores, mean_db=mean,
                    permutation=tuple(p + 1 for p in perm))


@dataclass
class EvalRow:
    mix_id: str
    mean_db: float
    per_source_db: tuple[float, ...]
    permutation: tuple[int, ...]


@dataclass
class EvalReport:
    """Per-mixture PIT scores plus aggregate statistics for one condition."""

    condition: str
    split: str
    rows: list[EvalRow]

    def aggregate(self) -> dict:
        values = [r.mean_db for r in self.rows]
        return {
            "count": len(values),
            "mean_db": float(np.mean(values)),
            "median_db": float(np.median(values)),
            "min_db": float(np.min(values)),
            "max_db": float(np.max(values)),
        }

    def to_csv_text(self) -> str:
        lines = ["mix_id,mean_db,per_source_db,permutation"]
        for r in self.rows:
            srcs = ";".join(repr(v) for v in r.per_source_db)
            perm = ";".join(str(p) for p in r.permutation)
            lines.append(f"{r.mix_id},{r.mean_db!r},{srcs},{perm}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "condition": self.condition,
            "split": self.split,
            "rows": [
                {
                    "mix_id": r.mix_id,
                    "mean_db": r.mean_db,
                    "per_source_db": list(r.per_source_db),
                    "permutation": list(r.permutation),
                }
                for r in self.rows
            ],
            "aggregate": self.aggregate(),
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def evaluate_testset(manifest: Manifest, condition: str, separate_fn,
                     split: str = "test") -> EvalReport:
    """Run a separator over one split and score every mixture with PIT SI-SDR.

    Args:
        condition: "realistic" or "synthetic" (which mixture/reference
            pairing to load).
        separate_fn: callable mapping a mixture AudioClip to a list of
            estimated source clips.
    """
    entries = manifest.entries_for(split)
    if not entries:
        raise ValueError(f"manifest has no entries in split {split!r}")
    rows = []
    for entry in entries:
        mixture, refs = load_entry_clips(manifest, entry, condition)
        estimates = separate_fn(mixture)
        if len(estimates) != len(refs):
            raise ValueError(
                f"separator returned {len(estimates)} sources, expected {len(refs)}")
        score = si_sdr_pit(estimates, refs)
        rows.append(EvalRow(mix_id=entry["id"], mean_db=score.mean_db,
                            per_source_db=score.per_source_db,
                            permutation=score.permutation))
    return EvalReport(condition=condition, split=split, rows=rows)
