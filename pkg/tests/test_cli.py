"""End-to-end command line coverage: output formats, files, exit codes."""

import json
import re
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from persistwalk import cli, montecarlo as mc
from persistwalk.exponent import phi


def run_cli(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_phi_command(capsys):
    rc, out, _ = run_cli(capsys, "phi", "--x", "3/5", "--b", "1")
    assert rc == 0
    val = float(re.search(r"phi=(\S+)", out).group(1))
    assert val == pytest.approx(phi(0.6, 1.0), rel=1e-10)
    assert "kappa=" in out and "psi_bar=" in out
    rc, out, _ = run_cli(capsys, "phi")
    assert rc == 0 and "phi=0.5 " in out


def test_oracle_dp_output(capsys):
    rc, out, _ = run_cli(capsys, "oracle-dp", "--dist", "simple",
                         "--x", "0", "--t", "4")
    assert rc == 0
    assert out == "3/8 = 0.375\n"
    rc, out, _ = run_cli(capsys, "oracle-dp", "--dist", "simple", "--x", "0",
                         "--t", "9", "--k", "1")
    assert rc == 0
    assert out.splitlines()[0].startswith("lower 33/512 = ")
    assert out.splitlines()[1].startswith("upper 47/128 = ")


def test_estimate_atilde_then_fit_round_trip(tmp_path, capsys):
    csv = tmp_path / "curve.csv"
    rc, out, _ = run_cli(capsys, "estimate-atilde", "--dist", "simple",
                         "--x", "0", "--t-max", "4096", "--trials", "40000",
                         "--seed", "42", "--out", str(csv))
    assert rc == 0
    assert f"wrote {csv}" in out
    head = csv.read_text().splitlines()
    assert head[0].startswith("# persistwalk ")
    assert head[1].startswith("# config: ")
    assert "horizon,survivors,trials,p_hat,ci_low,ci_high" in head

    rc, out, _ = run_cli(capsys, "fit", "--in", str(csv),
                         "--lo", "32", "--hi", "4096", "--append")
    assert rc == 0
    slope = float(re.search(r"slope=(\S+)", out).group(1))
    # the time event at x=0 decays like t^(-1/4); wide band for 40k trials
    assert -0.33 <= slope <= -0.17
    assert f"appended fit to {csv}" in out
    # the appended file must parse again, bit-identically on the data rows
    rc, out2, _ = run_cli(capsys, "fit", "--in", str(csv),
                          "--lo", "32", "--hi", "4096")
    assert rc == 0
    assert float(re.search(r"slope=(\S+)", out2).group(1)) == slope
    assert "# fit: slope,stderr,r2,fit_lo,fit_hi" in csv.read_text()


def test_estimate_atilde_svg_and_path_dump(tmp_path, capsys):
    csv, chart, dump = (tmp_path / n for n in ("c.csv", "c.svg", "p.csv"))
    rc, out, _ = run_cli(capsys, "estimate-atilde", "--dist", "simple",
                         "--x", "0", "--t-max", "64", "--trials", "2000",
                         "--seed", "7", "--out", str(csv),
                         "--svg", str(chart), "--dump-path", str(dump))
    assert rc == 0
    text = chart.read_text()
    assert text.startswith("<svg xmlns=")
    assert "<!-- persistwalk " in text and "config:" in text
    ET.fromstring(text)  # well-formed XML, no external renderer needed

    lines = dump.read_text().splitlines()
    assert lines[0].startswith("# persistwalk ")
    hdr = lines.index("step,position,sign,cumulative_sign_sum")
    rows = np.array([[int(v) for v in ln.split(",")] for ln in lines[hdr + 1:]])
    assert rows.shape == (65, 4)
    assert list(rows[0]) == [0, 0, 1, 0]
    assert set(np.unique(rows[:, 2])) <= {-1, 1}
    # cumulative_sign_sum really is the running total of the sign column
    np.testing.assert_array_equal(rows[1:, 3], np.cumsum(rows[1:, 2]))
    steps = np.diff(rows[:, 1])
    assert set(np.unique(steps)) <= {-1, 1}


def test_stable_sample_determinism(tmp_path, capsys):
    args = ("stable-sample", "--kappa", "-0.33", "--n", "5", "--seed", "99")
    rc, out1, _ = run_cli(capsys, *args)
    rc2, out2, _ = run_cli(capsys, *args)
    assert rc == rc2 == 0
    assert out1 == out2
    draws = [float(v) for v in out1.splitlines()]
    assert len(draws) == 5
    rc, out3, _ = run_cli(capsys, "stable-sample", "--kappa", "-0.33",
                          "--n", "5", "--seed", "100")
    assert out3 != out1
    # --out writes the same draws with version/config headers
    f = tmp_path / "draws.txt"
    rc, out, _ = run_cli(capsys, *args, "--out", str(f))
    assert rc == 0
    lines = f.read_text().splitlines()
    assert lines[0].startswith("# persistwalk ")
    cfg = json.loads(lines[1][len("# config: "):])
    assert cfg["kappa"] == -0.33 and cfg["seed"] == 99
    assert [float(v) for v in lines[2:]] == draws


def test_stable_sample_summary(capsys):
    rc, out, _ = run_cli(capsys, "stable-sample", "--kappa", "0",
                         "--n", "20000", "--seed", "5", "--summary")
    assert rc == 0
    assert "quantiles(5/25/50/75/95%):" in out
    m = re.search(r"negative_fraction=(\S+) \(closed form (\S+)\)", out)
    assert abs(float(m.group(1)) - float(m.group(2))) < 0.02
    assert float(m.group(2)) == pytest.approx(0.5)


def test_env_seed_default(monkeypatch, capsys):
    monkeypatch.setenv("PERSIST_WALK_SEED", "4242")
    rc, envd, _ = run_cli(capsys, "stable-sample", "--kappa", "0", "--n", "3")
    monkeypatch.delenv("PERSIST_WALK_SEED")
    rc2, explicit, _ = run_cli(capsys, "stable-sample", "--kappa", "0",
                               "--n", "3", "--seed", "4242")
    rc3, default, _ = run_cli(capsys, "stable-sample", "--kappa", "0",
                              "--n", "3")
    assert rc == rc2 == rc3 == 0
    assert envd == explicit
    assert envd != default


def test_estimate_b_commands(capsys):
    rc, out, _ = run_cli(capsys, "estimate-b", "--dist", "simple",
                         "--method", "tail", "--excursions", "30000",
                         "--seed", "613")
    assert rc == 0
    m = re.search(r"b_hat=(\S+) stderr=(\S+)", out)
    b_hat, stderr = float(m.group(1)), float(m.group(2))
    assert abs(b_hat - 1.0) <= 4 * stderr  # the simple walk is symmetric
    assert stderr > 0
    rc, out, _ = run_cli(capsys, "estimate-b", "--dist", "simple",
                         "--method", "q", "--x", "0", "--n-pairs", "50",
                         "--trials", "4000", "--seed", "612")
    assert rc == 0
    b_hat = float(re.search(r"b_hat=(\S+)", out).group(1))
    assert 0.5 <= b_hat <= 2.0


def test_diagnose_skew_command(tmp_path, capsys):
    out_csv = tmp_path / "skew.csv"
    rc, out, _ = run_cli(capsys, "diagnose-skew", "--dist", "simple",
                         "--x", "1/2", "--n-grid", "4,16", "--trials", "3000",
                         "--seed", "11", "--out", str(out_csv))
    assert rc == 0
    assert re.search(r"n=4: D=\d", out)
    assert re.search(r"D_16=\d", out)
    text = out_csv.read_text()
    assert "# skew: n=4 " in text
    back = mc.read_survival_csv(out_csv)
    assert back.trials == 3000
    assert len(back.horizons) == 2


def test_error_exit_codes(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "oracle-dp", "--dist", "no-such-dist",
                         "--t", "4")
    assert rc == 1
    assert "persistwalk oracle-dp" in err and "ConfigParse" in err
    rc, _, err = run_cli(capsys, "estimate-atilde", "--dist", "simple",
                         "--t-max", "1", "--trials", "10")
    assert rc == 1 and "OutOfRange" in err
    rc, _, err = run_cli(capsys, "fit", "--in", str(tmp_path / "missing.csv"))
    assert rc == 1 and "persistwalk fit" in err
    with pytest.raises(SystemExit) as ei:
        cli.main(["definitely-not-a-command"])
    assert ei.value.code == 2


def test_reproduce_list_and_unknown(capsys):
    rc, out, _ = run_cli(capsys, "reproduce", "--list")
    assert rc == 0
    names = out.splitlines()
    assert len(names) >= 9
    assert all(names)
    rc, _, err = run_cli(capsys, "reproduce", "not-an-experiment")
    assert rc == 1
    assert "UnknownExperiment" in err


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "persistwalk.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("persistwalk ")
    res = subprocess.run(["persistwalk", "phi", "--x", "0", "--b", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "phi=" in res.stdout
