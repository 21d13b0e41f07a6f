import json
import shutil
import subprocess

import numpy as np
import pytest

from omgp.cli import run_command

CONFIG = """\
# two trajectories
noise_variance = 0.01
num_components = 2
kernel.family = se_ard
kernel.length_scales = 0.25
n_restarts = 2
"""


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "omgp.cfg").write_text(CONFIG)
    assert run_command(["simulate", "--scenario", "circles", "--seed", "7",
                        "--out", str(tmp_path / "d")]) == 0
    return tmp_path


def test_simulate_is_byte_identical(workdir):
    first = (workdir / "d" / "circles.csv").read_bytes()
    assert run_command(["simulate", "--scenario", "circles", "--seed", "7",
                        "--out", str(workdir / "d")]) == 0
    assert (workdir / "d" / "circles.csv").read_bytes() == first
    assert (workdir / "d" / "circles.json").exists()


def test_fit_associate_predict_eval(workdir, capsys):
    w = str(workdir)
    assert run_command(["fit", "--data", f"{w}/d/circles.csv", "--config", f"{w}/omgp.cfg",
                        "--out", f"{w}/m.json"]) == 0
    trace = [v for _, v in json.loads((workdir / "m.json").read_text())["bound_trace"]]
    assert len(trace) >= 2 and np.all(np.diff(trace) >= -1e-6)

    assert run_command(["associate", "--model", f"{w}/m.json", "--out", f"{w}/l.csv"]) == 0
    assert (workdir / "l.csv").read_text().startswith("index,label,responsibility\n")

    assert run_command(["predict", "--model", f"{w}/m.json", "--grid", "0:1:11",
                        "--out", f"{w}/p.csv"]) == 0
    assert len((workdir / "p.csv").read_text().splitlines()) == 1 + 11 * 2
    (workdir / "test.csv").write_text("x1\n0.1\n0.2\n")
    assert run_command(["predict", "--model", f"{w}/m.json", "--test", f"{w}/test.csv",
                        "--out", f"{w}/p2.csv"]) == 0

    capsys.readouterr()
    assert run_command(["eval", "--labels", f"{w}/l.csv", "--data", f"{w}/d/circles.csv",
                        "--model", f"{w}/m.json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["total"] == 100 and report["n_err"] <= 10
    assert report["rmse_reference"] == "noiseless"


def test_fit_reproducible(workdir):
    w = str(workdir)
    for name in ("a", "b"):
        assert run_command(["fit", "--data", f"{w}/d/circles.csv", "--config",
                            f"{w}/omgp.cfg", "--out", f"{w}/{name}.json", "--seed", "3"]) == 0
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()


@pytest.mark.parametrize("argv, code, message", [
    (["fit", "--data", "missing.csv", "--config", "{w}/omgp.cfg", "--out", "{w}/m.json"], 1,
     "data file not found: missing.csv"),
    (["fit", "--data", "{w}/d/circles.csv", "--config", "{w}/bad.cfg", "--out", "{w}/m.json"], 1,
     "unknown key 'colour'"),
    (["associate", "--model", "{w}/none.json", "--out", "{w}/l.csv"], 1, "cannot read model"),
    (["simulate", "--scenario", "nope", "--out", "{w}"], 2, "invalid choice"),
    (["simulate", "--scenario", "circles", "--out", "{w}", "--frobnicate"], 2,
     "unrecognized arguments"),
    (["predict", "--model", "{w}/m.json", "--out", "{w}/p.csv"], 2, "required"),
    (["bench", "--scenario", "circles", "--seeds", "0"], 2, "must be positive"),
    ([], 2, "required"),
])
def test_errors(workdir, capsys, argv, code, message):
    (workdir / "bad.cfg").write_text("noise_variance = 1\ncolour = red\n")
    argv = [a.format(w=workdir) for a in argv]
    assert run_command(argv) == code
    err = capsys.readouterr().err.strip()
    assert message in err and len(err.splitlines()) == 1


def test_eval_label_count_mismatch(workdir, capsys):
    (workdir / "l.csv").write_text("index,label\n0,0\n")
    assert run_command(["eval", "--labels", str(workdir / "l.csv"),
                        "--data", str(workdir / "d" / "circles.csv")]) == 1
    assert "1 labels" in capsys.readouterr().err


def test_bench_writes_files(tmp_path, capsys):
    out, summary = tmp_path / "m.json", tmp_path / "s.txt"
    assert run_command(["bench", "--scenario", "sinc", "--seeds", "2", "--out", str(out),
                        "--summary", str(summary)]) == 0
    metrics = json.loads(out.read_text())
    assert metrics["schema"] == 1 and len(metrics["runs"]) == 2
    assert "median signal RMSE" in summary.read_text()
    assert "median signal RMSE" in capsys.readouterr().out


def test_log_levels(workdir, capsys, monkeypatch):
    w = str(workdir)
    monkeypatch.setenv("OMGP_LOG", "info")
    run_command(["fit", "--data", f"{w}/d/circles.csv", "--config", f"{w}/omgp.cfg",
                 "--out", f"{w}/m.json"])
    assert "restart 0" in capsys.readouterr().err
    monkeypatch.setenv("OMGP_LOG", "quiet")
    run_command(["fit", "--data", f"{w}/d/circles.csv", "--config", f"{w}/omgp.cfg",
                 "--out", f"{w}/m.json"])
    assert capsys.readouterr().err == ""


@pytest.mark.skipif(shutil.which("omgp") is None, reason="console script not installed")
def test_console_script(tmp_path):
    done = subprocess.run(["omgp", "simulate", "--scenario", "sinc", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert done.returncode == 0 and (tmp_path / "sinc.csv").exists()
    done = subprocess.run(["omgp", "fit"], capture_output=True, text=True)
    assert done.returncode == 2
