"""End-to-end command line tests on a miniature configuration."""

import json
from pathlib import Path

import numpy as np
import pytest

from sepforge.cli import check_verdict_schema, main
from sepforge.corpus import Manifest

TINY_CONFIG = {
    "corpus": {
        "source": {"kind": "toy", "speakers": 4, "sentences_per_speaker": 2,
                   "duration_range_s": [0.8, 1.0]},
        "mixture_count": 6,
        "seed": 13,
        "max_retries": 10,
    },
    "device": {"sample_rate": 8000, "buffer_frames": 256, "seed": 3,
               "jitter": {"mode": "off"}},
    "channel": {"mic_distance_m": 1.0, "speaker_spacing_m": 0.4,
                "reverb": {"tail_ms": 10.0, "level": 0.1, "seed": 2},
                "noise_std": 0.0},
    "model": {"layers": 1, "hidden_per_direction": 4, "bins": 129,
              "embed_dim": 3},
    "train": {"epochs": 2, "batch_size": 2, "learning_rate": 0.001,
              "seed": 5},
    "eval": {"distances_m": [0.5, 1.0], "kmeans_iters": 5, "kmeans_seed": 1},
}


def write_config(tmp_path, mutate=None):
    raw = json.loads(json.dumps(TINY_CONFIG))
    if mutate:
        mutate(raw)
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(raw, indent=2))
    return path


class TestExitCodes:
    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["build-corpus", "--config", str(tmp_path / "no.json")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_malformed_config(self, tmp_path, capsys):
        path = write_config(tmp_path, lambda raw: raw.update({"what": 1}))
        assert main(["build-corpus", "--config", str(path)]) == 2
        assert "unknown key" in capsys.readouterr().err

    def test_bad_usage_exits_two(self):
        with pytest.raises(SystemExit) as info:
            main(["no-such-command", "--config", "x.json"])
        assert info.value.code == 2
        with pytest.raises(SystemExit) as info:
            main(["build-corpus"])  # --config is required
        assert info.value.code == 2

    def test_missing_inputs_exit_one(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("FORGE_OUT", str(tmp_path / "out"))
        path = write_config(tmp_path)
        assert main(["evaluate", "--config", str(path)]) == 1
        assert "build-corpus" in capsys.readouterr().err

    def test_bins_must_match_spectrogram(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("FORGE_OUT", str(tmp_path / "out"))
        good = write_config(tmp_path)
        assert main(["build-corpus", "--config", str(good)]) == 0
        bad = tmp_path / "bad.json"
        raw = json.loads(good.read_text())
        raw["model"]["bins"] = 65
        bad.write_text(json.dumps(raw))
        assert main(["train", "--config", str(bad)]) == 2
        assert "model.bins" in capsys.readouterr().err


class TestPipeline:
    def test_full_pipeline_and_reuse_semantics(self, tmp_path, monkeypatch, capsys):
        out = tmp_path / "out"
        monkeypatch.setenv("FORGE_OUT", str(out))
        path = write_config(tmp_path)

        assert main(["build-corpus", "--config", str(path)]) == 0
        manifest_path = out / "corpus" / "manifest.json"
        assert manifest_path.exists()
        first_bytes = manifest_path.read_bytes()
        manifest = Manifest.load(out / "corpus")
        assert len(manifest.entries) == 6
        assert len(manifest.entries_for("test")) == 1

        # same config: reused without rebuilding
        capsys.readouterr()
        assert main(["build-corpus", "--config", str(path)]) == 0
        assert "already built" in capsys.readouterr().out
        assert manifest_path.read_bytes() == first_bytes

        # changed config without --force: refuse; with --force: rebuild
        changed = write_config(tmp_path, lambda raw: raw["corpus"].__setitem__("seed", 14))
        assert main(["build-corpus", "--config", str(changed)]) == 1
        assert "different config" in capsys.readouterr().err
        assert main(["build-corpus", "--config", str(changed), "--force"]) == 0
        assert json.loads(manifest_path.read_text())["seed"] == 14
        assert main(["build-corpus", "--config", str(path), "--force"]) == 0

        assert main(["train", "--config", str(path)]) == 0
        results = out / "results"
        for condition in ("synthetic", "realistic"):
            assert (results / f"{condition}.ckpt").exists()
            curve = (results / f"curve_{condition}.csv").read_text().splitlines()
            assert curve[0] == "epoch,train_loss,valid_loss,learning_rate"
            assert len(curve) == 3
            summary = json.loads((results / f"train_{condition}.json").read_text())
            assert summary["condition"] == condition
            assert summary["epochs"] == 2

        # retrain without --force: checkpoints reused
        before = (results / "synthetic.ckpt").read_bytes()
        capsys.readouterr()
        assert main(["train", "--config", str(path)]) == 0
        assert "already trained" in capsys.readouterr().out
        assert (results / "synthetic.ckpt").read_bytes() == before

        assert main(["evaluate", "--config", str(path)]) == 0
        comparison = json.loads((results / "comparison.json").read_text())
        assert set(comparison["mean_db"]) == {"synthetic", "realistic"}
        for model_cond in ("synthetic", "realistic"):
            for test_cond in ("synthetic", "realistic"):
                base = results / f"eval_{model_cond}_on_{test_cond}"
                assert base.with_suffix(".csv").exists()
                report = json.loads(base.with_suffix(".json").read_text())
                assert report["condition"] == test_cond
                assert len(report["rows"]) == 1

        assert main(["distance-sweep", "--config", str(path)]) == 0
        sweep = json.loads((results / "distance_sweep.json").read_text())
        assert sweep["distances_m"] == [0.5, 1.0]
        assert len(sweep["mean_db"]["synthetic"]) == 2
        csv_lines = (results / "distance_sweep.csv").read_text().splitlines()
        assert csv_lines[0] == "distance_m,model,mean_db,count"
        assert len(csv_lines) == 5

    def test_train_single_condition(self, tmp_path, monkeypatch):
        out = tmp_path / "out"
        monkeypatch.setenv("FORGE_OUT", str(out))
        path = write_config(tmp_path)
        assert main(["build-corpus", "--config", str(path)]) == 0
        assert main(["train", "--config", str(path),
                     "--condition", "synthetic"]) == 0
        assert (out / "results" / "synthetic.ckpt").exists()
        assert not (out / "results" / "realistic.ckpt").exists()

    def test_outputs_default_next_to_config(self, tmp_path, monkeypatch):
        monkeypatch.delenv("FORGE_OUT", raising=False)
        path = write_config(tmp_path)
        assert main(["build-corpus", "--config", str(path)]) == 0
        assert (tmp_path / "corpus" / "manifest.json").exists()

    def test_seed_flag_overrides_corpus_seed(self, tmp_path, monkeypatch):
        out = tmp_path / "out"
        monkeypatch.setenv("FORGE_OUT", str(out))
        path = write_config(tmp_path)
        assert main(["build-corpus", "--config", str(path), "--seed", "77"]) == 0
        assert json.loads((out / "corpus" / "manifest.json").read_text())["seed"] == 77


class TestTwinExperiment:
    def test_tiny_twin_run_writes_valid_verdict(self, tmp_path, monkeypatch):
        out = tmp_path / "out"
        monkeypatch.setenv("FORGE_OUT", str(out))
        path = write_config(tmp_path)
        assert main(["twin-experiment", "--config", str(path)]) == 0
        verdict = json.loads((out / "results" / "verdict.json").read_text())
        assert check_verdict_schema(verdict) == []
        assert isinstance(verdict["paper_direction_reproduced"], bool)
        assert verdict["distance_sweep"]["distances_m"] == [0.5, 1.0]
        # 2.0/3.0 m are not in the tiny sweep, so the drop is undefined
        assert verdict["sweep_direction_holds"] is None
        assert verdict["distance_sweep"]["drop_2m_to_3m_db"] == {
            "synthetic": None, "realistic": None}


def valid_verdict():
    return {
        "schema": "sepforge-verdict/1",
        "config_hash": "0" * 64,
        "models": {
            c: {"condition": c, "config_hash": "0" * 64, "checkpoint": f"{c}.ckpt",
                "best_epoch": 3, "best_valid_loss": 0.125, "epochs": 5}
            for c in ("synthetic", "realistic")
        },
        "evaluations": {
            t: {"synthetic_model_mean_db": 10.0, "realistic_model_mean_db": 11.0,
                "gap_db": 1.0}
            for t in ("realistic_test", "synthetic_test")
        },
        "distance_sweep": {
            "distances_m": [2.0, 3.0],
            "mean_db": {"synthetic": [10.0, 8.0], "realistic": [10.0, 9.0]},
            "drop_2m_to_3m_db": {"synthetic": 2.0, "realistic": 1.0},
        },
        "paper_direction_reproduced": True,
        "sweep_direction_holds": True,
    }


class TestVerdictSchema:
    def test_valid_document_passes(self):
        assert check_verdict_schema(valid_verdict()) == []

    def test_null_sweep_direction_allowed(self):
        verdict = valid_verdict()
        verdict["sweep_direction_holds"] = None
        assert check_verdict_schema(verdict) == []

    @pytest.mark.parametrize("mutate,fragment", [
        (lambda v: v.__setitem__("schema", "other/2"), "schema"),
        (lambda v: v.__setitem__("config_hash", "abc"), "config_hash"),
        (lambda v: v["models"].pop("realistic"), "models"),
        (lambda v: v["models"]["synthetic"].__setitem__("best_epoch", "3"),
         "best_epoch"),
        (lambda v: v["evaluations"]["realistic_test"].pop("gap_db"), "gap_db"),
        (lambda v: v["evaluations"].pop("synthetic_test"), "evaluations"),
        (lambda v: v["distance_sweep"].__setitem__("distances_m", []),
         "distances_m"),
        (lambda v: v["distance_sweep"]["mean_db"].__setitem__("synthetic", [1.0]),
         "mean_db.synthetic"),
        (lambda v: v["distance_sweep"].pop("drop_2m_to_3m_db"),
         "drop_2m_to_3m_db"),
        (lambda v: v.__setitem__("paper_direction_reproduced", "yes"),
         "paper_direction_reproduced"),
        (lambda v: v.__setitem__("sweep_direction_holds", 1.5),
         "sweep_direction_holds"),
    ])
    def test_problems_name_the_field(self, mutate, fragment):
        verdict = valid_verdict()
        mutate(verdict)
        problems = check_verdict_schema(verdict)
        assert problems
        assert any(fragment in p for p in problems)

    def test_non_object_rejected(self):
        assert check_verdict_schema([]) == ["verdict must be an object"]
