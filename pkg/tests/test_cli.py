import csv
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from padicmind.cli import SCHEMAS, ConfigError, main, resolve_config
from padicmind.formats import read_state


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "config.json"}


@pytest.mark.parametrize("cmd", [
    ["spectrum", "--p", "3", "--N", "1", "--M", "1"],
    ["evolve", "--p", "2", "--N", "1", "--M", "1", "--t-steps", "7", "--state", "random",
     "--seed", "4"],
    ["measure", "--trials", "300", "--seed", "5", "--observable", "M_xi"],
    ["rds", "--steps", "8", "--seed", "2", "--memory-depth", "2"],
    ["dynamics", "--p", "2", "--x0", "3", "--steps", "12", "--noise-depth", "3", "--seed", "1"],
])
def test_outputs_are_byte_identical(tmp_path, capsys, cmd):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(cmd + ["--out", str(a)], capsys)[0] == 0
    assert run(cmd + ["--out", str(b)], capsys)[0] == 0
    assert files(a) == files(b) and files(a)
    cfg = json.loads((a / "config.json").read_text())
    assert cfg["command"] == cmd[0] and cfg["config"]["out"] == str(a)


def test_config_echo_and_flag_precedence(tmp_path, capsys):
    conf = tmp_path / "run.cfg"
    conf.write_text("p = 3\nN = 1\nM = 1\nalpha = 2\n")
    out = tmp_path / "o"
    code, stdout, _ = run(["spectrum", "--config", str(conf), "--M", "2", "--out", str(out)],
                          capsys)
    assert code == 0
    echoed = json.loads(stdout.splitlines()[0])["config"]
    assert echoed["p"] == 3 and echoed["M"] == 2 and echoed["alpha"] == 2.0
    assert json.loads((out / "config.json").read_text())["config"] == echoed


def test_spectrum_csv_matches_law(tmp_path, capsys):
    out = tmp_path / "s"
    assert run(["spectrum", "--p", "2", "--N", "1", "--M", "2", "--out", str(out)], capsys)[0] == 0
    with open(out / "spectrum.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["eigenvalue", "multiplicity"]
    got = [(round(float(v), 9), int(m)) for v, m in rows[1:]]
    assert got == [(0.0, 1), (1.0, 1), (2.0, 2), (4.0, 4)]
    rep = json.loads((out / "residuals.json").read_text())
    assert rep["max_residual"] <= 1e-9


def test_unknown_config_key_exits_2(tmp_path, capsys):
    conf = tmp_path / "bad.cfg"
    conf.write_text("p = 3\ncolour = blue\n")
    code, _, err = run(["spectrum", "--config", str(conf), "--out", str(tmp_path / "x")], capsys)
    assert code == 2 and "colour" in err


def test_invalid_value_names_key(tmp_path, capsys):
    code, _, err = run(["spectrum", "--p", "4", "--out", str(tmp_path / "x")], capsys)
    assert code == 2 and "'p'" in err
    code, _, err = run(["evolve", "--t-steps", "abc", "--out", str(tmp_path / "x")], capsys)
    assert code == 2 and "t_steps" in err


def test_size_limit_exits_3(tmp_path, capsys):
    code, _, err = run(["spectrum", "--p", "2", "--N", "7", "--M", "7",
                        "--out", str(tmp_path / "x")], capsys)
    assert code == 3 and "limit" in err


def test_ingest_pipeline(tmp_path, capsys):
    spikes = tmp_path / "spikes.csv"
    spikes.write_text("neuron_index,window_index,count\n0,0,1\n1,0,0\n2,0,3\n"
                      "0,1,4\n1,1,2\n2,1,0\n")
    out = tmp_path / "ing"
    code, _, _ = run(["ingest", str(spikes), "--p", "5", "--window-ms", "100", "--out", str(out)],
                     capsys)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["windows"] == 2 and summary["neurons"] == 3
    assert {"entropy", "mean_activation"} <= set(summary)
    assert (out / "state.csv").exists()


def test_ingest_malformed_row_reports_line(tmp_path, capsys):
    spikes = tmp_path / "bad.csv"
    spikes.write_text("neuron_index,window_index,count\n0,0,1\n1,0,oops\n")
    code, _, err = run(["ingest", str(spikes), "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "line 3" in err
    spikes.write_text("neuron_index,window_index,count\n0,0,1\n1,0,7\n")
    code, _, err = run(["ingest", str(spikes), "--p", "5", "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "line 3" in err


def test_transform_round_trip(tmp_path, capsys):
    ev = tmp_path / "ev"
    assert run(["evolve", "--t-steps", "2", "--out", str(ev)], capsys)[0] == 0
    fwd, back = tmp_path / "f", tmp_path / "b"
    assert run(["transform", "--state-file", str(ev / "initial_state.csv"), "--method", "dense",
                "--out", str(fwd)], capsys)[0] == 0
    assert run(["transform", "--state-file", str(fwd / "state.csv"), "--inverse", "true",
                "--out", str(back)], capsys)[0] == 0
    a = read_state(ev / "initial_state.csv")
    b = read_state(back / "state.csv")
    assert a.grid == b.grid and np.allclose(a.coeffs, b.coeffs, atol=1e-12)


def test_dynamics_csv(tmp_path, capsys):
    out = tmp_path / "d"
    assert run(["dynamics", "--p", "3", "--x0", "4", "--steps", "5", "--out", str(out)],
               capsys)[0] == 0
    with open(out / "orbit.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step", "distance_exponent", "digits"]
    assert [r[1] for r in rows[1:]] == ["1"] * 6
    assert json.loads((out / "summary.json").read_text())["classification"] == "neutral/Siegel"
    code, _, err = run(["dynamics", "--p", "3", "--x0", "3^-1 * (1)_3", "--out", str(out)], capsys)
    assert code == 2 and "x0" in err


def test_resolve_config_rejects_unknown():
    with pytest.raises(ConfigError):
        resolve_config("measure", {"nope": "1"}, {})
    cfg = resolve_config("measure", {"trials": "5"}, {"trials": "6"})
    assert cfg["trials"] == 6 and set(cfg) == set(SCHEMAS["measure"])


def test_verify_quick_under_budget():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "padicmind.cli", "verify", "--quick"],
                          capture_output=True, text=True, timeout=120)
    elapsed = time.perf_counter() - t0
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert elapsed < 60
    assert proc.stdout.count("[PASS]") == 4
