import json
import math

import numpy as np
import pytest

from landauer_ann.checkpoint import (
    CheckpointError,
    checkpoint_from_json,
    checkpoint_to_json,
    load_checkpoint,
    save_checkpoint,
)
from landauer_ann.cli import EXIT_CONFIG, EXIT_DATA, main, sample_manifest
from landauer_ann.config import ConfigError, RunConfig, env_overrides, resolve_config
from landauer_ann.data import Image, SyntheticPattern, save_image, synthetic_dataset
from landauer_ann.experiment import train_on


def csv_body(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


class TestConfig:
    def test_defaults(self):
        c = RunConfig()
        assert (c.input_size, c.hidden_size, c.output_size) == (9, 12, 1)
        assert (c.lr, c.beta1, c.beta2, c.epsilon) == (1e-3, 0.9, 0.999, 1e-8)
        assert (c.batch_size, c.max_epochs, c.patience) == (128, 100, 5)
        assert c.temperature == 300.0 and c.hidden_bins == 16

    def test_json_round_trip(self):
        c = RunConfig(seed=7, hidden_bins=8, temperature=77.0)
        assert RunConfig.from_json(c.to_json()) == c

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"seed": 1, "learning_rate": 0.1})

    @pytest.mark.parametrize("field,value", [("lr", 0.0), ("batch_size", 0), ("temperature", -1.0), ("hidden_bins", 1)])
    def test_invalid_values(self, field, value):
        with pytest.raises(ConfigError):
            RunConfig(**{field: value})

    def test_precedence_file_env_flag(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(RunConfig(seed=1, hidden_bins=4, temperature=10.0).to_json())
        env = {"LANDAUER_ANN_SEED": "2", "LANDAUER_ANN_HIDDEN_BINS": "6"}
        c = resolve_config(str(p), {"seed": 3}, env)
        assert (c.seed, c.hidden_bins, c.temperature) == (3, 6, 10.0)

    def test_unknown_env_key(self):
        with pytest.raises(ConfigError):
            env_overrides({"LANDAUER_ANN_BOGUS": "1"})

    def test_hash_ignores_paths(self):
        a = RunConfig(seed=1, out_dir="a")
        assert a.config_hash() == RunConfig(seed=1, out_dir="b").config_hash()
        assert a.config_hash() != RunConfig(seed=2, out_dir="a").config_hash()
        assert len(a.config_hash()) == 16


@pytest.fixture(scope="module")
def ckpt():
    ds = synthetic_dataset(SyntheticPattern("merged"))
    return train_on(RunConfig(max_epochs=4), ds, ds)


class TestCheckpoint:
    def test_round_trip_bit_identical(self, ckpt, tmp_path):
        save_checkpoint(ckpt, tmp_path / "c.json")
        back = load_checkpoint(tmp_path / "c.json")
        for name, p in ckpt.net.params().items():
            np.testing.assert_array_equal(back.net.params()[name], p)
            assert back.net.params()[name].tobytes() == p.tobytes()
        assert back.history == ckpt.history
        assert checkpoint_to_json(back) == checkpoint_to_json(ckpt)

    def test_wrong_format(self):
        with pytest.raises(CheckpointError):
            checkpoint_from_json(json.dumps({"format": "other", "version": 1}))

    def test_not_json(self):
        with pytest.raises(CheckpointError):
            checkpoint_from_json("{nope")


class TestCli:
    def run(self, tmp_path, *argv):
        return main([*argv, "--out-dir", str(tmp_path)])

    def test_train_one_epoch(self, tmp_path, capsys):
        assert self.run(tmp_path, "train", "--synthetic", "merged", "--epochs", "1") == 0
        ckpt = load_checkpoint(tmp_path / "checkpoint.json")
        assert len(ckpt.history.records) == 1
        assert len(csv_body(tmp_path / "history.csv")) == 2
        assert "stopped at epoch 1 (max epochs reached)" in capsys.readouterr().out

    def test_train_reports_early_stop(self, tmp_path, capsys):
        assert self.run(tmp_path, "train", "--manifest", "sample", "--epochs", "60", "--patience", "1", "--lr", "0.05") == 0
        out = capsys.readouterr().out
        ckpt = load_checkpoint(tmp_path / "checkpoint.json")
        assert ckpt.history.early_stopped and ckpt.history.stopped_epoch < 60
        assert f"stopped at epoch {ckpt.history.stopped_epoch} (early stopping)" in out
        assert len(ckpt.history.records) == ckpt.history.stopped_epoch

    def test_train_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["train", "--manifest", "sample", "--epochs", "3", "--seed", "5", "--out-dir", str(d)]) == 0
        assert (a / "checkpoint.json").read_bytes() == (b / "checkpoint.json").read_bytes()

    def test_analyze_single_epoch(self, tmp_path, capsys):
        self.run(tmp_path, "train", "--synthetic", "merged", "--epochs", "3")
        assert self.run(tmp_path, "analyze", "--checkpoint", str(tmp_path / "checkpoint.json"), "--synthetic", "merged", "--epochs", "1") == 0
        body = csv_body(tmp_path / "ledger.csv")
        assert len(body) == 1 + 2
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["training_epochs"] == 1
        assert report["task_joules"] == pytest.approx(report["task_bits"] * 1.380649e-23 * 300 * math.log(2), rel=1e-12)
        assert report["reference_ann_bits"] == 2.0574
        assert "backward-pass erasure excluded" in (tmp_path / "ledger.csv").read_text()
        assert "ratio" in capsys.readouterr().out

    def test_analyze_temperature(self, tmp_path):
        self.run(tmp_path, "train", "--synthetic", "merged", "--epochs", "2")
        self.run(tmp_path, "analyze", "--checkpoint", str(tmp_path / "checkpoint.json"), "--synthetic", "merged", "--temperature", "77")
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["task_joules"] == pytest.approx(report["task_bits"] * 1.380649e-23 * 77 * math.log(2), rel=1e-12)

    def test_analyze_separate_image(self, tmp_path):
        self.run(tmp_path, "train", "--synthetic", "merged", "--epochs", "2")
        img, gt = tmp_path / "i.pbm", tmp_path / "g.pbm"
        save_image(Image(np.eye(8)), img)
        save_image(Image(np.zeros((8, 8))), gt)
        rc = self.run(tmp_path, "analyze", "--checkpoint", str(tmp_path / "checkpoint.json"), "--synthetic", "merged", "--image", str(img), "--gt", str(gt))
        assert rc == 0

    def test_compare_from_report(self, tmp_path, capsys):
        (tmp_path / "report.json").write_text(json.dumps({"task_bits": 2.0574}))
        assert self.run(tmp_path, "compare", "--report", str(tmp_path / "report.json")) == 0
        assert "vNp/ANN = 902.1, CAP/ANN = 34.51" in capsys.readouterr().out
        doc = json.loads((tmp_path / "comparison.json").read_text())
        assert doc["ratio_cap"] == pytest.approx(71 / 2.0574)

    def test_compare_negative_bits(self, tmp_path):
        assert self.run(tmp_path, "compare", "--bits", "-1") == EXIT_CONFIG

    def test_synth_five_presets(self, tmp_path):
        presets = "merged,separated,random1,random2,random3"
        assert self.run(tmp_path, "synth", "--presets", presets, "--epochs", "3") == 0
        for name in presets.split(","):
            assert len(csv_body(tmp_path / f"synth_{name}_ledger.csv")) == 1 + 2 * 3
        summary = csv_body(tmp_path / "synth_summary.csv")
        assert summary[0] == "rank,preset,mean_separation,cumulative_bits,task_bits,stopped_epoch"
        assert len(summary) == 6

    def test_synth_unknown_preset(self, tmp_path):
        assert self.run(tmp_path, "synth", "--presets", "merged,blob") == EXIT_CONFIG

    def test_canny(self, tmp_path):
        img = np.zeros((16, 16))
        img[:, 8:] = 1
        save_image(Image(img), tmp_path / "s.pgm")
        assert self.run(tmp_path, "canny", "--image", str(tmp_path / "s.pgm")) == 0
        assert (tmp_path / "s_canny.pbm").exists()

    def test_missing_image_is_data_error(self, tmp_path):
        assert self.run(tmp_path, "canny", "--image", str(tmp_path / "nope.pgm")) == EXIT_DATA

    def test_truncated_image_is_data_error(self, tmp_path):
        (tmp_path / "t.pgm").write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        assert self.run(tmp_path, "canny", "--image", str(tmp_path / "t.pgm")) == EXIT_DATA

    def test_corrupt_checkpoint(self, tmp_path):
        (tmp_path / "c.json").write_text("{}")
        assert self.run(tmp_path, "analyze", "--checkpoint", str(tmp_path / "c.json"), "--synthetic", "merged") == EXIT_DATA

    def test_topology_mismatch(self, tmp_path):
        self.run(tmp_path, "train", "--synthetic", "merged", "--epochs", "1")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(RunConfig(hidden_size=8).to_json())
        rc = self.run(tmp_path, "analyze", "--checkpoint", str(tmp_path / "checkpoint.json"), "--synthetic", "merged", "--config", str(cfg))
        assert rc == EXIT_CONFIG

    def test_bad_config_file(self, tmp_path):
        assert self.run(tmp_path, "compare", "--bits", "1", "--config", str(tmp_path / "missing.json")) == EXIT_CONFIG

    def test_sample_manifest_bundled(self):
        assert sample_manifest().exists()
