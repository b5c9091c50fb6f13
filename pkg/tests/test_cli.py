"""Command-line surface: flags, files, exit codes."""

import csv
import json

import numpy as np
import pytest

import nhchain.cli as cli
from nhchain import (
    ModelParams,
    WindingIllDefinedError,
    build_single_particle,
    decompose,
)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_spectrum_to_file_matches_decompose(tmp_path):
    out = tmp_path / "spec.csv"
    rc = cli.main(["spectrum", "--L", "13", "--g", "0.5", "--W", "1.0",
                   "--bc", "pbc", "--out", str(out)])
    assert rc == 0
    rows = read_csv(str(out))
    assert len(rows) == 13
    w = decompose(build_single_particle(ModelParams(L=13, g=0.5, W=1.0, bc="pbc"))).eigenvalues
    got = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    assert np.abs(got - w).max() < 1e-12


def test_spectrum_stdout_mode(capsys):
    rc = cli.main(["spectrum", "--L", "8", "--g", "0.3"])
    assert rc == 0
    out, err = capsys.readouterr()
    assert len(out.strip().splitlines()) == 8   # data on stdout
    assert "spectrum: dim=8" in err             # summary moves to stderr


def test_winding_prints_integer(capsys):
    rc = cli.main(["winding", "--L", "21", "--g", "0.5", "--W", "1.0"])
    assert rc == 0
    out, _ = capsys.readouterr()
    assert out.strip().splitlines()[-1] == "nu = 1"


def test_winding_rejects_obc():
    assert cli.main(["winding", "--L", "21", "--g", "0.5", "--bc", "obc"]) == 1


def test_winding_sample_file(tmp_path, capsys):
    out = tmp_path / "w.csv"
    rc = cli.main(["winding", "--L", "21", "--g", "0.5", "--W", "1.0",
                   "--samples", "3", "--out", str(out)])
    assert rc == 0
    rows = read_csv(str(out))
    assert [r["sample"] for r in rows] == ["0", "1", "2"]
    assert all(r["nu"] == "1" for r in rows)


def test_evolve_writes_series(tmp_path):
    out = tmp_path / "evolve.csv"
    rc = cli.main(["evolve", "--L", "16", "--g", "0.5", "--bc", "pbc",
                   "--dt", "0.2", "--tmax", "1.0", "--out", str(out)])
    assert rc == 0
    rows = read_csv(str(out))
    assert set(r["observable"] for r in rows) == {"density"}
    t0 = [float(r["value"]) for r in rows if float(r["t"]) == 0.0]
    assert sum(t0) == pytest.approx(1.0)        # normalized start


def test_evolve_j0_conflicts_with_filling():
    rc = cli.main(["evolve", "--L", "8", "--N", "4", "--j0", "3", "--tmax", "0.5"])
    assert rc == 1


def test_ground_state_stdout(capsys):
    rc = cli.main(["ground-state", "--L", "10", "--N", "5", "--g", "0.5",
                   "--V", "2.0", "--W", "0.5"])
    assert rc == 0
    out, err = capsys.readouterr()
    lines = out.strip().splitlines()
    assert len(lines) == 10
    total = sum(float(line.split(",")[1]) for line in lines)
    assert total == pytest.approx(5.0, abs=1e-8)
    assert "E0=" in err and "o_dw=" in err


def test_flux_requires_pbc():
    assert cli.main(["spectrum", "--L", "8", "--flux", "0.5", "--bc", "obc"]) == 1


def test_unknown_flag_and_missing_length():
    assert cli.main(["spectrum", "--L", "8", "--bogus", "1"]) == 1
    assert cli.main(["spectrum", "--g", "0.5"]) == 1


def test_config_file_with_explicit_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("L = 13\nW = 1.0   # overridden on the command line\nbc = pbc\n")
    out = tmp_path / "spec.csv"
    rc = cli.main(["spectrum", "--config", str(cfg), "--W", "3.0", "--out", str(out)])
    assert rc == 0
    rows = read_csv(str(out))
    assert len(rows) == 13                      # L came from the config
    w = decompose(build_single_particle(ModelParams(L=13, g=0.0, W=3.0, bc="pbc"))).eigenvalues
    got = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    assert np.abs(got - w).max() < 1e-12        # explicit --W beat the config


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("coupling = 3\n")
    assert cli.main(["spectrum", "--L", "8", "--config", str(cfg)]) == 1


def test_phase_diagram_with_resume(tmp_path, capsys):
    out = tmp_path / "pd.csv"
    argv = ["phase-diagram", "--L", "13", "--g", "0.5", "--W", "0:2:1",
            "--bc", "pbc", "--samples", "2", "--quantities", "f_im",
            "--threads", "2", "--out", str(out)]
    assert cli.main(argv) == 0
    first = capsys.readouterr().out
    assert "(9 rows written, 0 reused)" in first
    n_rows = len(read_csv(str(out)))
    assert n_rows == 9
    assert cli.main(argv) == 0
    second = capsys.readouterr().out
    assert "(0 rows written, 9 reused)" in second
    assert len(read_csv(str(out))) == n_rows    # nothing re-appended


def test_preset_fig3_single_panel(tmp_path):
    rc = cli.main(["preset", "fig3", "--which", "a", "--L", "40",
                   "--tmax", "2.0", "--out-dir", str(tmp_path)])
    assert rc == 0
    meta = json.loads((tmp_path / "fig3_metadata.json").read_text())
    assert meta["preset"] == "fig3" and meta["which"] == "a"
    panel = meta["panels"]["a"]
    assert panel["L"] == 40 and panel["bc"] == "pbc" and panel["W"] == 0.0
    rows = read_csv(str(tmp_path / "fig3_a.csv"))
    assert {float(r["t"]) for r in rows} >= {0.0, 2.0}
    assert not (tmp_path / "fig3_b.csv").exists()


def test_preset_rejects_bad_panel(tmp_path):
    assert cli.main(["preset", "fig3", "--which", "xz",
                     "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["preset", "--out-dir", str(tmp_path)]) == 1


def test_numerical_failure_maps_to_exit_2(monkeypatch, capsys):
    def boom(*a, **k):
        raise WindingIllDefinedError("no grid refinement helped")

    monkeypatch.setattr(cli, "winding_result", boom)
    rc = cli.main(["winding", "--L", "13", "--g", "0.5", "--W", "1.0"])
    assert rc == 2
    assert "numerical failure" in capsys.readouterr().err
