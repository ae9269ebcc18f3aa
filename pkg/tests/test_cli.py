import json
import math
import time

import numpy as np
import pytest

from roughscl import __version__
from roughscl.cli import EXIT_INVALID, EXIT_IO, EXIT_MATH, main
from roughscl.io import read_path, write_path
from roughscl.paths import PiecewiseLinearPath


def run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


@pytest.fixture
def zigzag(tmp_path):
    f = tmp_path / "zigzag.csv"
    write_path(f, PiecewiseLinearPath([0, 1, 2, 3], [0, 1, -1, 2]))
    return f


def test_sample_single_segment(tmp_path, capsys):
    out = tmp_path / "z.csv"
    assert run(["sample", "--segments", 1, "--seed", 5, "--out", out], capsys)[0] == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3 and lines[1] == "0.0,0.0"
    meta = json.loads((tmp_path / "z.csv.json").read_text())
    assert meta["seed"] == 5 and meta["n_segments"] == 1 and meta["version"] == __version__


def test_sample_replay_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["sample", "--segments", 100, "--seed", 9, "--out", a], capsys)
    run(["sample", "--segments", 100, "--seed", 9, "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_sample_seed_from_environment(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv("ROUGHSCL_SEED", "17")
    run(["sample", "--segments", 20, "--out", a], capsys)
    run(["sample", "--segments", 20, "--seed", 17, "--out", b], capsys)
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv("ROUGHSCL_SEED", "seventeen")
    assert run(["sample", "--segments", 20, "--out", a], capsys)[0] == EXIT_INVALID


def test_sample_large_is_fast(tmp_path, capsys):
    out = tmp_path / "big.csv"
    t0 = time.perf_counter()
    run(["sample", "--segments", 100_000, "--seed", 1, "--out", out], capsys)
    elapsed = time.perf_counter() - t0
    assert len(out.read_text().splitlines()) == 100_002
    assert elapsed < 1.0


def test_compress_monotone(tmp_path, capsys):
    f = tmp_path / "m.csv"
    write_path(f, PiecewiseLinearPath([0, 1, 2], [0, 0.5, 2.0]))
    code, out = run(["compress", "--path", f, "--m-plus", 10, "--m-minus", 10], capsys)
    s = json.loads(out)
    assert code == 0 and s["n_steps"] == 1 and s["tv_ratio"] == 1.0


def test_compress_zigzag(zigzag, tmp_path, capsys):
    out_csv = tmp_path / "c.csv"
    code, out = run(["compress", "--path", zigzag, "--m-plus", 10, "--m-minus", 10, "--out", out_csv], capsys)
    s = json.loads(out)
    assert s["taus"] == [0.0, 1.0, 2.0, 3.0]
    assert s["t_plus"] == [1.0, 3.0] and s["t_minus"] == [2.0]
    np.testing.assert_array_equal(read_path(out_csv).values, [0, 1, -1, 2])
    assert s["config"]["m_plus"] == 10.0


def test_compress_brownian_reports_factor(tmp_path, capsys):
    f = tmp_path / "b.csv"
    run(["sample", "--segments", 10_000, "--seed", 3, "--out", f], capsys)
    code, out = run(["compress", "--path", f, "--m-plus", 10, "--m-minus", 10], capsys)
    s = json.loads(out)
    assert s["n_steps"] < 1000
    assert s["compression_factor"] > 10


def test_solve_classical_shock(tmp_path, capsys):
    f = tmp_path / "lin.csv"
    write_path(f, PiecewiseLinearPath([0, 1], [0, 1]))
    sol = tmp_path / "u.csv"
    code, out = run(
        ["solve", "--path", f, "--initial", "step", "--x-left", -2, "--x-right", 2, "--n-cells", 400, "--out", sol],
        capsys,
    )
    assert code == 0
    data = np.loadtxt(sol, delimiter=",", skiprows=1)
    x, u = data[:, 0], data[:, 1]
    i = int(np.flatnonzero(u < 0.5)[0])
    xs = x[i - 1] + (0.5 - u[i - 1]) * (x[i] - x[i - 1]) / (u[i] - u[i - 1])
    assert abs(xs - 0.5) <= 2 * 4 / 400
    rep = json.loads(out)
    assert rep["bounds"]["m_minus"] == "inf"


def test_solve_compare_orm(zigzag, capsys):
    code, out = run(["solve", "--path", zigzag, "--n-cells", 200, "--compare-orm"], capsys)
    rep = json.loads(out)
    assert code == 0 and "orm" in rep and rep["orm"]["l1_gap"] >= 0


def test_distance_identical_and_oracle(zigzag, capsys):
    args = ["distance", "--path1", zigzag, "--path2", zigzag]
    for i in (1, 2):
        args += [f"--m-plus{i}", 10, f"--m-minus{i}", 10]
    code, out = run(args + ["--oracle"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["value"] == 0.0 and rep["oracle"]["agrees"]


def test_distance_reparameterized_pair(zigzag, tmp_path, capsys):
    slow = tmp_path / "slow.csv"
    # same range, visited with pauses: z o alpha for a staircase alpha
    write_path(slow, PiecewiseLinearPath([0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0], [0, 1, 1, -1, -1, 2, 2]))
    args = ["distance", "--path1", zigzag, "--path2", slow]
    for i in (1, 2):
        args += [f"--m-plus{i}", 10, f"--m-minus{i}", 10]
    code, out = run(args, capsys)
    assert code == 0 and json.loads(out)["value"] == 0.0


def test_convergence_deterministic(tmp_path, capsys):
    argv = ["convergence", "--n-cells", 200, "--target-segments", 64, "--levels", 2, 4, 8, 16, "--seed", 4]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(argv + ["--out", a], capsys)
    _, out = run(argv + ["--out", b, "--jobs", 2], capsys)
    assert a.read_bytes() == b.read_bytes()
    s = json.loads(out)
    assert len(s["rows"]) == 4 and math.isfinite(s["exponent"])


def test_convergence_piecewise_linear_target_hits_floor(capsys):
    # levels equal to the target reproduce it exactly: the error is the floor 0
    _, out = run(["convergence", "--n-cells", 100, "--target-segments", 8, "--levels", 8, 8, "--seed", 1], capsys)
    rows = json.loads(out)["rows"]
    assert all(r["l1_error"] == 0.0 and r["sup_distance"] == 0.0 for r in rows)


def test_config_overrides(tmp_path, zigzag, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m-plus": 10, "m_minus": "inf"}))
    _, out = run(["--config", cfg, "compress", "--path", zigzag], capsys)
    s = json.loads(out)
    assert s["config"]["m_plus"] == 10 and s["config"]["m_minus"] == "inf"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["--config", cfg, "compress", "--path", zigzag], capsys)[0] == EXIT_INVALID


def test_exit_codes(tmp_path, zigzag, capsys):
    missing = tmp_path / "nope.csv"
    assert run(["compress", "--path", missing], capsys)[0] == EXIT_IO
    assert run(["sample", "--segments", 5, "--out", tmp_path / "no" / "dir.csv"], capsys)[0] == EXIT_IO
    bad = tmp_path / "bad.csv"
    bad.write_text("t,z\n0,1\n1,2\n")
    assert run(["compress", "--path", bad], capsys)[0] == EXIT_INVALID
    assert run(["sample", "--segments", 0, "--out", tmp_path / "x.csv"], capsys)[0] == EXIT_INVALID
    assert run(["solve", "--path", zigzag, "--cfl", 2], capsys)[0] == EXIT_INVALID
    assert run(["compress", "--path", zigzag, "--tau", 5], capsys)[0] == EXIT_INVALID


def test_math_failures_exit_3(zigzag, capsys, monkeypatch):
    import roughscl.cli as cli
    from roughscl.orm import OrmUndefinedError

    def stall(*args, **kwargs):
        raise OrmUndefinedError("recursion did not reach 0")

    monkeypatch.setattr(cli, "orm", stall)
    assert run(["compress", "--path", zigzag], capsys)[0] == EXIT_MATH


def test_compare_orm_gap_shrinks_under_refinement(tmp_path, capsys):
    z = tmp_path / "z.csv"
    run(["sample", "--segments", 200, "--seed", 0, "--out", z], capsys)
    gaps = []
    for n in (400, 800, 1600):
        _, out = run(["solve", "--path", z, "--n-cells", n, "--compare-orm"], capsys)
        gaps.append(json.loads(out)["orm"]["l1_gap"])
    assert gaps[0] / gaps[1] >= 1.3 and gaps[1] / gaps[2] >= 1.3
