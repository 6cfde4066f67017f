import json
import subprocess
import sys

import numpy as np
import pytest

from aaqip import cli, sspt
from aaqip.sysfile import data_path

AAQST_SYS = str(data_path("synthetic_3f_aaqst.json"))
SSPT_SYS = str(data_path("synthetic_3f_sspt.json"))


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# aaqip ") and "config_sha256=" in lines[0] and "seed=" in lines[0]
    cols = lines[1].split(",")
    return cols, np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])


def data_section(path):
    return path.read_text().split("\n", 1)[1]


def test_elgi_sweep(tmp_path):
    out = tmp_path / "d3.csv"
    assert run("elgi", "sweep", "--out", out, "--quiet") == 0
    cols, rows = read_csv(out)
    assert cols == ["theta_rad", "D3_bits"]
    k = np.argmin(np.abs(rows[:, 0] - np.pi / 4))
    assert rows[k, 1] == pytest.approx(-0.134, abs=2e-3)


def test_twirl_sweep(tmp_path):
    out = tmp_path / "twirl.csv"
    assert run("sspt", "twirl", "--system", SSPT_SYS, "--points", 8, "--out", out, "--quiet") == 0
    cols, rows = read_csv(out)
    assert cols[:3] == ["phi_rad", "chi_EE", "chi_ZZ"]
    phi = rows[:, 0]
    s = np.sinc(2 * phi / np.pi)
    assert np.allclose(rows[:, 1], (1 + s) / 2, atol=1e-6)
    assert np.allclose(rows[:, 2], (1 - s) / 2, atol=1e-6)


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("aaqst", "optimize", "--system", AAQST_SYS, "--budget", 3, "--seed", 7,
                   "--out", out, "--quiet") == 0
    assert a.read_bytes() == b.read_bytes()
    for out in (a, b):
        assert run("moments", "sweep", "--points", 9, "--out", out, "--quiet") == 0
    assert data_section(a) == data_section(b)


def test_twelve_significant_digits(tmp_path):
    out = tmp_path / "d3.csv"
    run("elgi", "sweep", "--points", 5, "--out", out, "--quiet")
    val = out.read_text().splitlines()[3].split(",")[0]
    assert val == format(np.pi / 4, ".12g")


def test_missing_seed_is_config_error(tmp_path, capsys):
    out = tmp_path / "x.json"
    assert run("aaqst", "optimize", "--system", AAQST_SYS, "--out", out) == 2
    assert "--seed" in capsys.readouterr().err
    assert not out.exists()


def test_bad_system_file(tmp_path, capsys):
    bad = tmp_path / "sys.json"
    bad.write_text('{"n_spins": 2, "offsets_hz": [1, 2], "j_matrix_hz": [[0, 1], [1, 0]], "colour": 1}')
    out = tmp_path / "o.csv"
    assert run("sspt", "twirl", "--system", bad, "--out", out) == 2
    assert "unknown field 'colour'" in capsys.readouterr().err
    assert not out.exists()
    assert run("elgi", "nonsense") == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    exps = tmp_path / "exps.json"
    exps.write_text(json.dumps({"experiments": [[]]}))
    readout = tmp_path / "readout.csv"
    assert run("aaqst", "simulate", "--system", AAQST_SYS, "--unitaries", exps, "--out", readout, "--quiet") == 0
    out = tmp_path / "rho.csv"
    assert run("aaqst", "reconstruct", "--system", AAQST_SYS, "--unitaries", exps,
               "--readout", readout, "--out", out) == 3
    assert "numerical failure" in capsys.readouterr().err
    assert not out.exists()


def test_simulate_reconstruct_round_trip(tmp_path):
    exps = tmp_path / "exps.json"
    step = [0.0067783, {"angle": np.pi / 2, "axis": "x"}, 0.0080182, {"angle": np.pi / 2, "axis": "y"}]
    exps.write_text(json.dumps({"experiments": [step]}))
    readout, out = tmp_path / "r.csv", tmp_path / "rho.csv"
    assert run("aaqst", "simulate", "--system", AAQST_SYS, "--unitaries", exps, "--out", readout, "--quiet") == 0
    assert run("aaqst", "reconstruct", "--system", AAQST_SYS, "--unitaries", exps,
               "--readout", readout, "--out", out, "--quiet") == 0
    _, rows = read_csv(out)
    assert rows.shape == (16, 4)
    rho = (rows[:, 2] + 1j * rows[:, 3]).reshape(4, 4)
    assert np.allclose(rho, rho.conj().T, atol=1e-9)


def test_sspt_run_gate(tmp_path):
    out = tmp_path / "chi.json"
    assert run("sspt", "run", "--system", SSPT_SYS, "--gate", "Hadamard", "--out", out, "--quiet") == 0
    data = json.loads(out.read_text())
    assert data["gate_fidelity"] == pytest.approx(1.0, abs=1e-6)
    assert data["meta"]["tool"] == "aaqip"


def test_run_config(tmp_path):
    cfg = tmp_path / "elgi.json"
    cfg.write_text(json.dumps({"kind": "elgi", "action": "sweep", "output": "d3.csv",
                               "params": {"points": 97}}))
    assert run("run", "--config", cfg, "--quiet") == 0
    direct = tmp_path / "direct.csv"
    run("elgi", "sweep", "--out", direct, "--quiet")
    assert (tmp_path / "d3.csv").read_bytes() == direct.read_bytes()


@pytest.mark.parametrize("payload, msg", [
    ({"kind": "mri", "action": "sweep"}, "field 'kind'"),
    ({"kind": "elgi", "action": "fit"}, "field 'action'"),
    ({"kind": "elgi", "action": "sweep", "params": {"pointz": 3}}, "unknown field 'pointz'"),
    ({"kind": "elgi", "action": "sweep", "extra": 1}, "unknown field 'extra'"),
    ({"kind": "sspt", "action": "twirl", "params": {"system": "missing.json"}}, "does not exist"),
    ({"kind": "elgi", "action": "sweep", "seed": "x"}, "field 'seed'"),
])
def test_config_validation(tmp_path, capsys, payload, msg):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(payload))
    assert run("run", "--config", cfg) == 2
    assert msg in capsys.readouterr().err


def test_dd_commands(tmp_path):
    seq = tmp_path / "udd.json"
    assert run("dd", "gen", "--scheme", "udd", "--n", 7, "--out", seq, "--quiet") == 0
    assert json.loads(seq.read_text())["scheme"] == "udd"
    ff = tmp_path / "ff.csv"
    assert run("dd", "ff", "--seq", seq, "--points", 20, "--out", ff, "--quiet") == 0
    cols, rows = read_csv(ff)
    assert cols[0] == "omega_rad_per_s" and np.all(rows[:, 1] >= 0)
    assert run("dd", "gen", "--scheme", "udd", "--n", 8, "--tau-pi", 8.6e-6, "--out", seq) == 2
    assert run("dd", "ff", "--seq", seq, "--omega-lo", 10, "--omega-hi", 1) == 2


def test_noon_commands(tmp_path, capsys):
    sysf = tmp_path / "star.json"
    sysf.write_text(json.dumps({"central": "31P", "satellite": "1H", "n_satellites": 9}))
    out = tmp_path / "g.json"
    assert run("noon", "gfactor", "--system", sysf, "--out", out, "--quiet") == 0
    assert json.loads(out.read_text())["g"] == pytest.approx(23.2, rel=5e-3)
    g = np.linspace(0, 0.04, 8)
    s = np.exp(-1500 * g ** 2)
    data = tmp_path / "d.csv"
    data.write_text("G1,S\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(g, s)))
    assert run("noon", "diffusion-fit", "--data", data, "--delta", 1, "--Delta", 1,
               "--gamma-eff", 1, "--out", out, "--quiet") == 0
    assert json.loads(out.read_text())["D"] == pytest.approx(1500 / (1 - 1 / 3), rel=1e-10)
    data.write_text("G1,S\n0.1,abc\n")
    assert run("noon", "diffusion-fit", "--data", data, "--delta", 1, "--Delta", 1, "--gamma-eff", 1) == 2
    assert "row 2" in capsys.readouterr().err


def test_entry_point_subprocess(tmp_path):
    out = tmp_path / "d3.csv"
    r = subprocess.run([sys.executable, "-m", "aaqip.cli", "elgi", "sweep", "--points", "5",
                        "--out", str(out)], capture_output=True, text=True)
    assert r.returncode == 0 and out.exists()
    r = subprocess.run([sys.executable, "-m", "aaqip.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "aaqip" in r.stdout
