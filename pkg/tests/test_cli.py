import csv
import math

import numpy as np
import pytest

import admmto.cli as cli
from admmto.admm import AdmmProblem
from admmto.config import ConfigError, SolverConfig, load_config, parse_config
from admmto.mesh import build_unit_square_mesh
from admmto.raster import element_at_pixels, read_pgm, write_pgm
from conftest import read_rows


def test_empty_config_is_default(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("")
    assert load_config(p) == SolverConfig()


def test_full_size_configuration():
    cfg = parse_config("alpha=5e-5\nrho0=1e-2\ngamma=2\nn=32\n")
    assert (cfg.alpha, cfg.rho0, cfg.gamma, cfg.n) == (5e-5, 1e-2, 2.0, 32)
    assert isinstance(cfg.n, int)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\nn = 6   # mesh\nseed=4\n")
    assert cfg.n == 6 and cfg.seed == 4


@pytest.mark.parametrize("text, message", [
    ("beta=1.5", "beta must lie in (0,1)"),
    ("bogus=1", "line 1: unknown key 'bogus'"),
    ("n=8\nalpha", "line 2: expected key=value"),
    ("n=2.5", "line 1: bad value for n"),
    ("gamma=1", "gamma must be > 1"),
])
def test_config_errors(text, message):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert message in str(err.value)


def test_overrides():
    cfg = parse_config("seed=1\n", seed=9, output_dir=None)
    assert cfg.seed == 9 and cfg.output_dir == "out"


def test_raster_covers_every_element():
    mesh = build_unit_square_mesh(5)
    idx = element_at_pixels(mesh)
    assert idx.shape == (20, 20)
    assert set(np.unique(idx)) == set(range(mesh.n_elements))
    # top-left pixel is in the square touching (0, 1), above its diagonal
    assert idx[0, 0] == 2 * (4 * 5 + 0) + 1


def test_pgm_roundtrip(tmp_path):
    img = np.arange(256, dtype=np.uint8).reshape(16, 16)  # includes whitespace-valued bytes
    write_pgm(tmp_path / "a.pgm", img)
    assert np.array_equal(read_pgm(tmp_path / "a.pgm"), img)
    assert (tmp_path / "a.pgm").read_bytes().startswith(b"P5\n16 16\n255\n")


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    cfg = SolverConfig(n=6, delta_tol=1e-2, snapshot_stride=3, output_dir=str(out), seed=5)
    status = cli.run_single(cfg)
    return cfg, out, status


def test_run_single_outputs(solved):
    cfg, out, status = solved
    assert status == 0
    rows = list(read_rows(out / "history.csv"))
    assert (out / "history.csv").read_text().count("\n") == len(rows) + 1
    assert list(rows[0]) == list(cli.IterationRecord.CSV_FIELDS)
    for row in rows:
        assert all(math.isfinite(float(x)) for x in row.values())
    assert float(rows[-1]["residual"]) <= cfg.delta_tol
    summary = dict(line.split("=", 1) for line in (out / "summary.txt").read_text().splitlines())
    assert summary["converged"] == "True" and summary["seed"] == "5"
    assert int(summary["iterations"]) == len(rows)
    final = np.loadtxt(out / "final_w.txt", dtype=int)
    assert final.shape == (72, 2) and set(final[:, 1]) <= {0, 1}


def test_snapshots(solved):
    cfg, out, _ = solved
    w_files = sorted(out.glob("w_*.pgm"))
    v_files = sorted(out.glob("v_*.pgm"))
    assert w_files[0].name == "w_000.pgm" and len(w_files) == len(v_files) >= 2
    for f in w_files:
        img = read_pgm(f)
        assert img.shape == (24, 24) and set(np.unique(img)) <= {0, 255}
    v0 = read_pgm(out / "v_000.pgm")
    assert np.all(v0 == round(255 * 0.4))


def test_history_objective_recomputes(solved):
    cfg, out, _ = solved
    rows = list(read_rows(out / "history.csv"))
    data = np.load(out / "iterates.npz")
    problem = AdmmProblem(cfg)
    for row, w in zip(rows, data["w"]):
        assert problem.original_objective(w) == pytest.approx(float(row["original_objective"]), rel=1e-9)


def test_sweep_identical_rows_and_ratio(tmp_path):
    cfg = SolverConfig(n=4, output_dir=str(tmp_path), sweeps=5.0)
    assert cli.run_rho_sweep(cfg, [0.05, 0.05, 1e-3]) == 0
    rows = list(read_rows(tmp_path / "sweep.csv"))
    assert list(rows[0]) == list(cli.SWEEP_FIELDS)
    assert rows[0] == rows[1]
    for row in rows:
        assert float(row["rho_ratio"]) == cfg.c ** int(row["rejections"])
        assert row["converged"] == "1" and int(row["iterations_to_converge"]) >= 1


def test_sweep_records_failures(tmp_path, monkeypatch):
    real = cli.solve_to_dir

    def flaky(config):
        if config.rho0 == 0.5:
            raise RuntimeError("synthetic failure")
        return real(config)

    monkeypatch.setattr(cli, "solve_to_dir", flaky)
    cfg = SolverConfig(n=3, output_dir=str(tmp_path), sweeps=5.0)
    assert cli.run_rho_sweep(cfg, [0.5, 0.01]) == 1
    rows = list(read_rows(tmp_path / "sweep.csv"))
    assert rows[0]["failed"] == "1" and "synthetic failure" in rows[0]["error"]
    assert rows[1]["failed"] == "0" and rows[1]["converged"] == "1"


def test_sweep_rejects_bad_rho(tmp_path):
    with pytest.raises(ValueError):
        cli.run_rho_sweep(SolverConfig(output_dir=str(tmp_path)), [])
    with pytest.raises(ValueError):
        cli.run_rho_sweep(SolverConfig(output_dir=str(tmp_path)), [0.1, -1])


def test_main_solve_and_sweep(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("n=3\nsweeps=5\n")
    assert cli.main(["solve", str(cfg), "--out", str(tmp_path / "a"), "--seed", "2"]) == 0
    assert "seed=2" in (tmp_path / "a" / "summary.txt").read_text()
    assert cli.main(["sweep", str(cfg), "--rho", "1e-2,1e-1", "--out", str(tmp_path / "s")]) == 0
    assert len(list(read_rows(tmp_path / "s" / "sweep.csv"))) == 2


def test_main_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("beta=1.5\n")
    assert cli.main(["solve", str(cfg)]) == 2
    assert "beta must lie in (0,1)" in capsys.readouterr().err
