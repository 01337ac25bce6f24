import yaml

from fedcell.cli import main

SMALL_CONFIG = {
    "grid_m": 4,
    "n_vehicles": 16,
    "rounds": 2,
    "seeds": [0],
    "strategies": ["ca_cs", "random"],
    "timing_mode": "simulated",
    "dataset": {"kind": "synthetic", "n_samples": 300, "n_features": 8, "n_classes": 10},
}


def write_config(tmp_path, extra=None):
    cfg = dict(SMALL_CONFIG)
    if extra:
        cfg.update(extra)
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


class TestRun:
    def test_writes_csvs_manifest_and_figures(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "results"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        for name in ("rounds.csv", "summary.csv", "manifest.json",
                     "metrics_per_round.png", "execution_time.png", "stragglers.png"):
            assert (out / name).exists(), name
        printed = capsys.readouterr().out
        assert "ca_cs" in printed and "random" in printed

    def test_no_figures_flag(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "results"
        main(["run", "--config", str(cfg), "--out", str(out), "--no-figures"])
        assert (out / "rounds.csv").exists()
        assert not (out / "metrics_per_round.png").exists()

    def test_seed_and_strategy_overrides(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "results"
        main(["run", "--config", str(cfg), "--out", str(out),
              "--seed", "5,6", "--strategy", "random", "--no-figures"])
        lines = (out / "rounds.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 2  # header + 2 rounds x 1 strategy x 2 seeds
        assert all(line.startswith("random,") for line in lines[1:])

    def test_identical_runs_byte_identical_rounds_csv(self, tmp_path):
        cfg = write_config(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg), "--out", str(out_a), "--no-figures"])
        main(["run", "--config", str(cfg), "--out", str(out_b), "--no-figures"])
        assert (out_a / "rounds.csv").read_bytes() == (out_b / "rounds.csv").read_bytes()

    def test_invalid_config_fails_before_running(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("rounds: 0\n")
        assert main(["run", "--config", str(path)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_dataset_reported(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"dataset": {"kind": "mnist_idx", "images": ["/nope.idx3"], "labels": ["/nope.idx1"]}},
        )
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 1
        assert "error:" in capsys.readouterr().err


class TestSummarize:
    def test_recomputes_summary_and_figures(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "results"
        main(["run", "--config", str(cfg), "--out", str(out), "--no-figures"])
        first_summary = (out / "summary.csv").read_bytes()
        (out / "summary.csv").unlink()
        assert main(["summarize", "--rounds", str(out / "rounds.csv")]) == 0
        assert (out / "summary.csv").read_bytes() == first_summary
        assert (out / "metrics_per_round.png").exists()


class TestValidateConfig:
    def test_valid_config_prints_resolved_settings(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["validate-config", "--config", str(cfg)]) == 0
        printed = capsys.readouterr().out
        assert "OK" in printed
        assert "grid_m: 4" in printed

    def test_invalid_config_exits_nonzero(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("strategies: []\n")
        assert main(["validate-config", "--config", str(path)]) == 1
        assert "error:" in capsys.readouterr().err
