"""`forge` command line harness.

Subcommands:
    build-corpus     forge the paired realistic/synthetic corpus
    train            train separator models on the corpus
    evaluate         score trained models on the test split
    distance-sweep   re-capture the test mixtures over a range of mic
                     distances and score both models at each one
    twin-experiment  run the whole pipeline and write a verdict

Common flags: --config PATH (required), --seed N (replaces corpus.seed
with N and train.seed with N+1), --force (rebuild/retrain over existing
outputs), --paper-scale (full-size model and training schedule).

Outputs land under $FORGE_OUT if set, else next to the config file, in the
config's corpus/eval output_dir subdirectories. Exit codes: 0 success,
1 runtime failure (capture retries exhausted, training divergence, missing
inputs), 2 usage or config errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import functools
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import _kernels
from .audio import AudioClip, WavFormatError, load_wav, resample_to_8k
from .config import ConfigError, HarnessConfig, load_config
from .corpus import (
    CaptureRetryError,
    Manifest,
    PlanningError,
    build_corpus,
    load_entry_clips,
    record_pair,
)
from .duplex import two_speaker_channels
from .metrics import evaluate_testset, si_sdr_pit
from .separator import (
    CheckpointError,
    SeparatorConfig,
    TrainingDivergedError,
    curve_csv_text,
    load_checkpoint,
    save_checkpoint,
    separate,
    train,
)
from .spectral import StftConfig, training_example

VERDICT_SCHEMA = "sepforge-verdict/1"
CONDITIONS = ("synthetic", "realistic")


def _log(message: str) -> None:
    print(message, flush=True)


def _out_root(config_path: Path) -> Path:
    env = os.environ.get("FORGE_OUT", "").strip()
    if env:
        return Path(env)
    return config_path.resolve().parent


def _stft_for(cfg: HarnessConfig) -> StftConfig:
    stft_cfg = StftConfig(rate=cfg.device.sample_rate)
    if cfg.model.bins != stft_cfg.bins:
        raise ConfigError(
            f"model.bins: must equal the spectrogram bin count "
            f"{stft_cfg.bins}, got {cfg.model.bins}")
    return stft_cfg


def _channels_at(cfg: HarnessConfig, mic_distance_m: float):
    return two_speaker_channels(
        rate=cfg.device.sample_rate,
        mic_distance_m=mic_distance_m,
        spacing_m=cfg.channel.speaker_spacing_m,
        gain_ref=cfg.channel.gain_ref,
        reverb_tail_ms=cfg.channel.reverb_tail_ms,
        reverb_level=cfg.channel.reverb_level,
        reverb_seed=cfg.channel.reverb_seed,
        noise_std=cfg.channel.noise_std,
        noise_seed=cfg.channel.noise_seed,
    )


def cmd_build_corpus(cfg: HarnessConfig, out_root: Path, force: bool) -> Manifest:
    corpus_dir = out_root / cfg.corpus.output_dir
    manifest_path = corpus_dir / "manifest.json"
    if manifest_path.exists() and not force:
        manifest = Manifest.load(corpus_dir)
        if manifest.data.get("config_hash") == cfg.config_hash:
            _log(f"corpus already built at {corpus_dir} (config hash matches); "
                 "use --force to rebuild")
            return manifest
        raise CaptureRetryError(
            f"corpus at {corpus_dir} was built from a different config "
            f"(hash {manifest.data.get('config_hash')!r} != {cfg.config_hash!r}); "
            "use --force to rebuild")
    channel_a, channel_b = _channels_at(cfg, cfg.channel.mic_distance_m)
    _log(f"building corpus at {corpus_dir} ({cfg.corpus.mixture_count} mixtures)")
    return build_corpus(
        corpus_dir,
        source_kind=cfg.corpus.source_kind,
        source_params=cfg.corpus.source_params,
        mixture_count=cfg.corpus.mixture_count,
        seed=cfg.corpus.seed,
        device=cfg.device,
        jitter=cfg.jitter,
        channel_a=channel_a,
        channel_b=channel_b,
        split_ratio=cfg.corpus.split_ratio,
        length_ratio_min=cfg.corpus.length_ratio_min,
        max_uses_per_speaker=cfg.corpus.max_uses_per_speaker,
        max_uses_per_sentence=cfg.corpus.max_uses_per_sentence,
        max_retries=cfg.corpus.max_retries,
        config_hash=cfg.config_hash,
        log=_log,
    )


def _load_manifest(cfg: HarnessConfig, out_root: Path) -> Manifest:
    corpus_dir = out_root / cfg.corpus.output_dir
    if not (corpus_dir / "manifest.json").exists():
        raise FileNotFoundError(
            f"no corpus manifest under {corpus_dir}; run `forge build-corpus` first")
    return Manifest.load(corpus_dir)


def _prepare_split(manifest: Manifest, split: str, condition: str, stft_cfg: StftConfig):
    examples = []
    for entry in manifest.entries_for(split):
        mixture, refs = load_entry_clips(manifest, entry, condition)
        examples.append(training_example(mixture, refs, stft_cfg))
    return examples


def cmd_train(cfg: HarnessConfig, out_root: Path, force: bool,
              conditions=CONDITIONS) -> dict:
    manifest = _load_manifest(cfg, out_root)
    stft_cfg = _stft_for(cfg)
    results_dir = out_root / cfg.eval.output_dir
    results_dir.mkdir(parents=True, exist_ok=True)
    summaries = {}
    for condition in conditions:
        ckpt_path = results_dir / f"{condition}.ckpt"
        summary_path = results_dir / f"train_{condition}.json"
        if ckpt_path.exists() and not force:
            _log(f"{condition} model already trained ({ckpt_path}); use --force to retrain")
            summaries[condition] = json.loads(summary_path.read_text())
            continue
        _log(f"training {condition} model "
             f"(backend={_kernels.ACTIVE_BACKEND}, epochs={cfg.train.epochs})")
        train_set = _prepare_split(manifest, "train", condition, stft_cfg)
        valid_set = _prepare_split(manifest, "valid", condition, stft_cfg)
        start = time.monotonic()
        result = train(train_set, valid_set, cfg.model, cfg.train,
                       progress=lambda r: _log(
                           f"  epoch {r.epoch:3d} train {r.train_loss:.6f} "
                           f"valid {r.valid_loss:.6f} lr {r.learning_rate:g}"))
        elapsed = time.monotonic() - start
        save_checkpoint(ckpt_path, result.params, cfg.model)
        (results_dir / f"curve_{condition}.csv").write_text(curve_csv_text(result.curve))
        summary = {
            "condition": condition,
            "config_hash": cfg.config_hash,
            "checkpoint": ckpt_path.name,
            "best_epoch": result.best_epoch,
            "best_valid_loss": result.best_valid_loss,
            "epochs": len(result.curve),
        }
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        summaries[condition] = summary
        _log(f"{condition} model done: best valid {result.best_valid_loss:.6f} "
             f"at epoch {result.best_epoch} ({elapsed:.1f}s)")
    return summaries


def _load_model(results_dir: Path, condition: str):
    ckpt_path = results_dir / f"{condition}.ckpt"
    if not ckpt_path.exists():
        raise FileNotFoundError(
            f"missing checkpoint {ckpt_path}; run `forge train` first")
    return load_checkpoint(ckpt_path)


def _separator_fn(cfg: HarnessConfig, params: dict, model_cfg: SeparatorConfig,
                  stft_cfg: StftConfig):
    return functools.partial(separate, params=params, config=model_cfg,
                             stft_config=stft_cfg,
                             kmeans_iters=cfg.eval.kmeans_iters,
                             kmeans_seed=cfg.eval.kmeans_seed)


def cmd_evaluate(cfg: HarnessConfig, out_root: Path) -> dict:
    manifest = _load_manifest(cfg, out_root)
    stft_cfg = _stft_for(cfg)
    results_dir = out_root / cfg.eval.output_dir
    results_dir.mkdir(parents=True, exist_ok=True)
    means: dict[str, dict[str, float]] = {}
    for model_cond in CONDITIONS:
        params, model_cfg = _load_model(results_dir, model_cond)
        fn = _separator_fn(cfg, params, model_cfg, stft_cfg)
        means[model_cond] = {}
        for test_cond in CONDITIONS:
            report = evaluate_testset(manifest, test_cond, fn)
            base = results_dir / f"eval_{model_cond}_on_{test_cond}"
            base.with_suffix(".csv").write_text(report.to_csv_text())
            base.with_suffix(".json").write_text(report.to_json_text())
            agg = report.aggregate()
            means[model_cond][test_cond] = agg["mean_db"]
            _log(f"eval {model_cond} model on {test_cond} test: "
                 f"mean {agg['mean_db']:.2f} dB over {agg['count']} mixtures")
    comparison = {
        "config_hash": cfg.config_hash,
        "mean_db": means,
        "realistic_test_gap_db": means["realistic"]["realistic"] - means["synthetic"]["realistic"],
        "synthetic_test_gap_db": means["realistic"]["synthetic"] - means["synthetic"]["synthetic"],
    }
    (results_dir / "comparison.json").write_text(
        json.dumps(comparison, indent=2, sort_keys=True) + "\n")
    _log(f"realistic-test gap (realistic-trained minus synthetic-trained): "
         f"{comparison['realistic_test_gap_db']:.2f} dB")
    return comparison


def cmd_distance_sweep(cfg: HarnessConfig, out_root: Path) -> dict:
    manifest = _load_manifest(cfg, out_root)
    stft_cfg = _stft_for(cfg)
    results_dir = out_root / cfg.eval.output_dir
    results_dir.mkdir(parents=True, exist_ok=True)
    models = {}
    for condition in CONDITIONS:
        params, model_cfg = _load_model(results_dir, condition)
        models[condition] = _separator_fn(cfg, params, model_cfg, stft_cfg)
    entries = manifest.entries_for("test")
    if not entries:
        raise ValueError("manifest has no test entries to sweep")

    sweep: dict[str, list[float]] = {c: [] for c in CONDITIONS}
    csv_lines = ["distance_m,model,mean_db,count"]
    for di, distance in enumerate(cfg.eval.distances_m):
        channel_a, channel_b = _channels_at(cfg, distance)
        scores: dict[str, list[float]] = {c: [] for c in CONDITIONS}
        for ei, entry in enumerate(entries):
            clips = []
            for source in entry["sources"]:
                clip = resample_to_8k(load_wav(manifest.path(source["path"]))[0])
                clips.append(AudioClip(clip.samples * source["gain"], clip.rate))
            seed = int(np.random.SeedSequence((cfg.device.seed, 9000 + di, ei))
                       .generate_state(1, np.uint64)[0])
            device = dataclasses.replace(cfg.device, seed=seed)
            pair = record_pair(clips[0], clips[1], channel_a, channel_b,
                               device, cfg.jitter, max_retries=cfg.corpus.max_retries)
            refs = [pair.gts1, pair.gts2]
            for condition, fn in models.items():
                estimates = fn(pair.realmix)
                scores[condition].append(si_sdr_pit(estimates, refs).mean_db)
        for condition in CONDITIONS:
            mean = float(np.mean(scores[condition]))
            sweep[condition].append(mean)
            csv_lines.append(f"{distance!r},{condition},{mean!r},{len(entries)}")
        _log(f"distance {distance:.1f} m: synthetic {sweep['synthetic'][-1]:.2f} dB, "
             f"realistic {sweep['realistic'][-1]:.2f} dB")

    data = {
        "config_hash": cfg.config_hash,
        "distances_m": list(cfg.eval.distances_m),
        "mean_db": sweep,
        "mixtures_per_distance": len(entries),
    }
    (results_dir / "distance_sweep.csv").write_text("\n".join(csv_lines) + "\n")
    (results_dir / "distance_sweep.json").write_text(
        json.dumps(data, indent=2, sort_keys=True) + "\n")
    return data


def _sweep_drop(data: dict, condition: str, from_m: float = 2.0, to_m: float = 3.0):
    distances = data["distances_m"]
    if from_m not in distances or to_m not in distances:
        return None
    values = data["mean_db"][condition]
    return values[distances.index(from_m)] - values[distances.index(to_m)]


def cmd_twin_experiment(cfg: HarnessConfig, out_root: Path, force: bool) -> dict:
    start = time.monotonic()
    cmd_build_corpus(cfg, out_root, force)
    summaries = cmd_train(cfg, out_root, force)
    comparison = cmd_evaluate(cfg, out_root)
    sweep = cmd_distance_sweep(cfg, out_root)

    drop_synth = _sweep_drop(sweep, "synthetic")
    drop_real = _sweep_drop(sweep, "realistic")
    verdict = {
        "schema": VERDICT_SCHEMA,
        "config_hash": cfg.config_hash,
        "models": {c: summaries[c] for c in CONDITIONS},
        "evaluations": {
            "realistic_test": {
                "synthetic_model_mean_db": comparison["mean_db"]["synthetic"]["realistic"],
                "realistic_model_mean_db": comparison["mean_db"]["realistic"]["realistic"],
                "gap_db": comparison["realistic_test_gap_db"],
            },
            "synthetic_test": {
                "synthetic_model_mean_db": comparison["mean_db"]["synthetic"]["synthetic"],
                "realistic_model_mean_db": comparison["mean_db"]["realistic"]["synthetic"],
                "gap_db": comparison["synthetic_test_gap_db"],
            },
        },
        "distance_sweep": {
            "distances_m": sweep["distances_m"],
            "mean_db": sweep["mean_db"],
            "drop_2m_to_3m_db": {"synthetic": drop_synth, "realistic": drop_real},
        },
        "paper_direction_reproduced": comparison["realistic_test_gap_db"] > 0.0,
        "sweep_direction_holds": (None if drop_synth is None or drop_real is None
                                  else drop_synth >= drop_real),
    }
    results_dir = out_root / cfg.eval.output_dir
    (results_dir / "verdict.json").write_text(
        json.dumps(verdict, indent=2, sort_keys=True) + "\n")
    _log(f"twin experiment done in {time.monotonic() - start:.1f}s")
    _log(f"paper_direction_reproduced: {verdict['paper_direction_reproduced']} "
         f"(realistic-test gap {comparison['realistic_test_gap_db']:.2f} dB)")
    if verdict["sweep_direction_holds"] is not None:
        _log(f"sweep_direction_holds: {verdict['sweep_direction_holds']} "
             f"(drops 2m->3m: synthetic {drop_synth:.2f} dB, realistic {drop_real:.2f} dB)")
    return verdict


def check_verdict_schema(verdict: dict) -> list[str]:
    """Structural check of a verdict document; returns a list of problems."""
    problems = []

    def need(cond: bool, msg: str) -> None:
        if not cond:
            problems.append(msg)

    need(isinstance(verdict, dict), "verdict must be an object")
    if not isinstance(verdict, dict):
        return problems
    need(verdict.get("schema") == VERDICT_SCHEMA,
         f"schema must be {VERDICT_SCHEMA!r}")
    need(isinstance(verdict.get("config_hash"), str) and len(verdict.get("config_hash", "")) == 64,
         "config_hash must be a 64-char sha256 hex string")
    models = verdict.get("models")
    need(isinstance(models, dict) and set(models or {}) == set(CONDITIONS),
         "models must have exactly the synthetic/realistic entries")
    if isinstance(models, dict):
        for name, summary in models.items():
            need(isinstance(summary, dict) and isinstance(summary.get("best_epoch"), int),
                 f"models.{name}.best_epoch must be an integer")
            need(isinstance(summary, dict)
                 and isinstance(summary.get("best_valid_loss"), float),
                 f"models.{name}.best_valid_loss must be a number")
    evaluations = verdict.get("evaluations")
    need(isinstance(evaluations, dict)
         and set(evaluations or {}) == {"realistic_test", "synthetic_test"},
         "evaluations must have realistic_test and synthetic_test")
    if isinstance(evaluations, dict):
        for name, section in evaluations.items():
            for key in ("synthetic_model_mean_db", "realistic_model_mean_db", "gap_db"):
                need(isinstance(section, dict)
                     and isinstance(section.get(key), (int, float)),
                     f"evaluations.{name}.{key} must be a number")
    sweep = verdict.get("distance_sweep")
    need(isinstance(sweep, dict), "distance_sweep must be an object")
    if isinstance(sweep, dict):
        distances = sweep.get("distances_m")
        need(isinstance(distances, list) and distances
             and all(isinstance(v, (int, float)) for v in distances),
             "distance_sweep.distances_m must be a non-empty number list")
        mean_db = sweep.get("mean_db")
        need(isinstance(mean_db, dict) and set(mean_db or {}) == set(CONDITIONS),
             "distance_sweep.mean_db must map both conditions")
        if isinstance(mean_db, dict) and isinstance(distances, list):
            for name, values in mean_db.items():
                need(isinstance(values, list) and len(values) == len(distances),
                     f"distance_sweep.mean_db.{name} must align with distances_m")
        drops = sweep.get("drop_2m_to_3m_db")
        need(isinstance(drops, dict) and set(drops or {}) == set(CONDITIONS),
             "distance_sweep.drop_2m_to_3m_db must map both conditions")
    need(isinstance(verdict.get("paper_direction_reproduced"), bool),
         "paper_direction_reproduced must be a boolean")
    need(verdict.get("sweep_direction_holds") is None
         or isinstance(verdict.get("sweep_direction_holds"), bool),
         "sweep_direction_holds must be a boolean or null")
    return problems


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Forge realistic two-speaker corpora and benchmark separator models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="harness config JSON path")
        p.add_argument("--seed", type=int, default=None,
                       help="override corpus.seed with N and train.seed with N+1")
        p.add_argument("--force", action="store_true",
                       help="rebuild or retrain even when outputs already exist")
        p.add_argument("--paper-scale", action="store_true",
                       help="use the full-scale model and training schedule")

    add_common(sub.add_parser("build-corpus", help="forge the mixture corpus"))
    train_p = sub.add_parser("train", help="train separator models")
    add_common(train_p)
    train_p.add_argument("--condition", choices=("synthetic", "realistic", "both"),
                         default="both", help="which training condition to run")
    add_common(sub.add_parser("evaluate", help="score both models on the test split"))
    add_common(sub.add_parser("distance-sweep",
                              help="score both models while varying the mic distance"))
    add_common(sub.add_parser("twin-experiment",
                              help="full pipeline: corpus, training, evaluation, verdict"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, paper_scale=args.paper_scale)
        out_root = _out_root(Path(args.config))
        if args.command == "build-corpus":
            cmd_build_corpus(cfg, out_root, args.force)
        elif args.command == "train":
            conditions = CONDITIONS if args.condition == "both" else (args.condition,)
            cmd_train(cfg, out_root, args.force, conditions)
        elif args.command == "evaluate":
            cmd_evaluate(cfg, out_root)
        elif args.command == "distance-sweep":
            cmd_distance_sweep(cfg, out_root)
        elif args.command == "twin-experiment":
            cmd_twin_experiment(cfg, out_root, args.force)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CaptureRetryError, PlanningError, TrainingDivergedError, CheckpointError,
            WavFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
