"""Command-line interface: exit codes, precedence, chaining, determinism."""

import json
import os

import numpy as np
import pytest

from iegtrack.cli import main
from iegtrack.ieg import load_model
from iegtrack.synth import events_from_csv


def run(argv, capsys):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestUsage:
    def test_no_command_prints_help(self, capsys):
        rc, out, err = run([], capsys)
        assert rc == 2
        assert "gen-data" in out and "demo" in out

    def test_help_exits_zero(self, capsys):
        assert run(["--help"], capsys)[0] == 0
        assert run(["track", "--help"], capsys)[0] == 0

    def test_unknown_flag_is_usage_error(self, capsys):
        assert run(["gen-data", "builtin", "x.iegd", "--bogus"], capsys)[0] == 2

    def test_bad_init_triple(self, tmp_path, capsys):
        rc, _, err = run(
            ["track", "nope.iegm", "nope.csv", "--out", "o.csv", "--init", "1,2"],
            capsys,
        )
        assert rc == 2
        assert "three comma-separated" in err

    def test_missing_model_file_is_io_error(self, tmp_path, capsys):
        ev = tmp_path / "ev.csv"
        ev.write_text("t,x,y,polarity\n")
        rc, _, err = run(
            ["track", str(tmp_path / "missing.iegm"), str(ev),
             "--out", str(tmp_path / "o.csv"), "--init", "0,0,0"],
            capsys,
        )
        assert rc == 3

    def test_bad_sensor_spec(self, tmp_path, capsys):
        rc, _, err = run(
            ["simulate", "builtin", str(tmp_path / "e.csv"), str(tmp_path / "t.csv"),
             "--sensor", "256by256"],
            capsys,
        )
        assert rc == 2
        assert "256x256" in err

    def test_zero_stride_is_usage_error(self, tmp_path, capsys, small_model_file,
                                        tiny_events_file):
        rc, _, err = run(
            ["track", small_model_file, tiny_events_file,
             "--out", str(tmp_path / "o.csv"), "--init", "12,12,0", "--k", "0"],
            capsys,
        )
        assert rc == 2

    def test_corrupt_config_json(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        rc, _, err = run(
            ["gen-data", "builtin", str(tmp_path / "x.iegd"), "--config", str(cfg)],
            capsys,
        )
        assert rc == 3

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"banana": 1}))
        rc, _, err = run(
            ["gen-data", "builtin", str(tmp_path / "x.iegd"), "--config", str(cfg)],
            capsys,
        )
        assert rc == 2
        assert "banana" in err


@pytest.fixture(scope="module")
def cli_workdir(tmp_path_factory, bar_pattern_file):
    """One tiny gen-data -> train -> simulate chain shared by the read tests."""
    root = tmp_path_factory.mktemp("cli-chain")
    data = root / "train.iegd"
    model = root / "model.iegm"
    events = root / "events.csv"
    truth = root / "truth.csv"
    assert main([
        "gen-data", bar_pattern_file, str(data), "--n", "4000", "--seed", "3",
        "--sigma", "2.0", "--w", "4.0", "--delta-bar", "0.01",
        "--t-max", "0.02", "--v-max", "150", "--omega-max", "2",
    ]) == 0
    assert main([
        "train", str(data), str(model), "--epochs", "3", "--batch-size", "128",
        "--hidden", "24,24", "--fourier", "2", "--lr", "2e-3", "--seed", "4",
    ]) == 0
    assert main([
        "simulate", bar_pattern_file, str(events), str(truth),
        "--duration", "0.1", "--vx", "40", "--vy", "25", "--omega", "0.5",
        "--contrast", "0.05", "--dt", "1e-3", "--seed", "6",
    ]) == 0
    return root


class TestChainedPipeline:
    def test_artifacts_exist_and_parse(self, cli_workdir):
        model = load_model(cli_workdir / "model.iegm")
        assert model.layer_dims[-1] == 1
        events = events_from_csv(cli_workdir / "events.csv")
        assert len(events) > 500
        assert (cli_workdir / "model.iegm.loss.csv").read_text().startswith("epoch,loss")

    def test_track_then_eval(self, cli_workdir, tmp_path, capsys):
        traj = tmp_path / "traj.csv"
        truth_first = (cli_workdir / "truth.csv").read_text().splitlines()[1]
        tx, ty, r = (float(v) for v in truth_first.split(",")[1:4])
        rc, out, err = run(
            ["track", str(cli_workdir / "model.iegm"), str(cli_workdir / "events.csv"),
             "--out", str(traj), "--init", f"{tx + 1},{ty - 1},{r}",
             "--init-velocity", "40,25,0.5",
             "--m", "800", "--k", "400", "--lr", "1e-3", "--eps-bar", "1e-6",
             "--max-iters", "200", "--normalize-loss", "--quiet"],
            capsys,
        )
        assert rc == 0
        assert traj.exists()
        report = tmp_path / "report.json"
        plots = tmp_path / "series"
        rc, out, err = run(
            ["eval", str(traj), str(cli_workdir / "truth.csv"),
             "--json", str(report), "--plots", str(plots)],
            capsys,
        )
        assert rc == 0
        assert "px^2" in out
        data = json.loads(report.read_text())
        assert data["window_count"] >= 2
        assert os.path.exists(str(plots) + "_x.svg")

    def test_eval_identical_trajectory_scores_zero(self, cli_workdir, tmp_path, capsys):
        # A trajectory copied straight from ground truth scores zero MSE.
        lines = (cli_workdir / "truth.csv").read_text().splitlines()
        traj = tmp_path / "perfect.csv"
        rows = ["t,tx,ty,r,vx,vy,omega,iters,loss"]
        for ln in lines[1:]:
            t, tx, ty, r, vx, vy, om = ln.split(",")
            rows.append(f"{t},{tx},{ty},{r},{vx},{vy},{om},2,0.0")
        traj.write_text("\n".join(rows) + "\n")
        report = tmp_path / "zero.json"
        rc, out, _ = run(
            ["eval", str(traj), str(cli_workdir / "truth.csv"), "--json", str(report)],
            capsys,
        )
        assert rc == 0
        data = json.loads(report.read_text())
        for key in ("mse_tx", "mse_ty", "mse_r", "mse_vx", "mse_vy", "mse_omega"):
            assert data[key] == pytest.approx(0.0, abs=1e-18)


class TestSeedPrecedence:
    def test_env_seed_changes_output(self, bar_pattern_file, tmp_path, monkeypatch,
                                     capsys):
        a, b, c = (tmp_path / n for n in ("a.iegd", "b.iegd", "c.iegd"))
        base = ["gen-data", bar_pattern_file, "--n", "500", "--sigma", "2.0",
                "--w", "4.0", "--delta-bar", "0.01", "--t-max", "0.02",
                "--v-max", "150", "--omega-max", "2"]
        monkeypatch.delenv("IEG_SEED", raising=False)
        assert main(base[:2] + [str(a)] + base[2:]) == 0
        monkeypatch.setenv("IEG_SEED", "99")
        assert main(base[:2] + [str(b)] + base[2:]) == 0
        # explicit flag beats the environment
        assert main(base[:2] + [str(c)] + base[2:] + ["--seed", "0"]) == 0
        assert a.read_bytes() != b.read_bytes()
        assert a.read_bytes() == c.read_bytes()

    def test_env_seed_must_be_integer(self, bar_pattern_file, tmp_path, monkeypatch,
                                      capsys):
        monkeypatch.setenv("IEG_SEED", "pi")
        rc, _, err = run(
            ["gen-data", bar_pattern_file, str(tmp_path / "x.iegd"), "--n", "10"],
            capsys,
        )
        assert rc == 2
        assert "IEG_SEED" in err

    def test_config_file_beats_default_flag_beats_config(self, bar_pattern_file,
                                                         tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 400, "sigma": 2.0, "w": 4.0,
                                   "delta_bar": 0.01, "t_max": 0.02,
                                   "v_max": 150.0, "omega_max": 2.0, "seed": 7}))
        a = tmp_path / "a.iegd"
        b = tmp_path / "b.iegd"
        assert main(["gen-data", bar_pattern_file, str(a), "--config", str(cfg)]) == 0
        assert main(["gen-data", bar_pattern_file, str(b), "--config", str(cfg),
                     "--n", "600"]) == 0
        na = np.fromfile(a, dtype=np.uint8)
        nb = np.fromfile(b, dtype=np.uint8)
        assert len(nb) > len(na)  # flag --n 600 overrode config n=400


class TestDemo:
    @pytest.mark.slow
    def test_demo_runs_and_is_deterministic(self, tmp_path, capsys):
        out1 = tmp_path / "d1"
        out2 = tmp_path / "d2"
        assert main(["demo", "--outdir", str(out1), "--workers", "1",
                     "--seed", "0"]) == 0
        assert main(["demo", "--outdir", str(out2), "--workers", "1",
                     "--seed", "0"]) == 0
        for name in ("model.iegm", "trajectory.csv", "report.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
        report = json.loads((out1 / "report.json").read_text())
        assert report["window_count"] >= 3
        assert report["mse_tx"] < 4.0 and report["mse_ty"] < 4.0
