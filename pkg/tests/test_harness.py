import math

import numpy as np
import pytest

import xrda.harness as harness
from xrda.cli import main
from xrda.config import parse_config
from xrda.harness import (check_bound, compare, read_trace_csv,
                          run_experiment, write_trace_csv)
from xrda.solver import TraceRow

BASE_CFG = """\
spec_version = 1
[problem]
loss = lad
mirror = euclidean
regularizer = l1
lambda = 0.1
d = 6
m = 12
k = 2
noise = 0.1
data_seed = 3
[schedule]
preset = leap_frog
[run]
iterations = 300
[output]
stride = 50
"""

STOCH_CFG = BASE_CFG.replace("loss = lad", "loss = logistic").replace(
    "iterations = 300",
    "iterations = 300\nmode = stochastic\nseeds = 4 9\nbatch_size = 3")


def sample_rows():
    return [
        TraceRow(10, 1.0 / 3.0, 0.25, 1e-300, float("nan"), 2.5,
                 0.125, 3, 0.0),
        TraceRow(20, -1.5, 1e16, 0.0, 7e-12, float("inf"), 1.0, 0, 0.0),
    ]


def test_trace_roundtrip_exact(tmp_path):
    path = tmp_path / "t.csv"
    write_trace_csv(sample_rows(), path)
    back = read_trace_csv(path)
    assert len(back) == 2
    for orig, got in zip(sample_rows(), back):
        for field in TraceRow.__dataclass_fields__:
            a, b = getattr(orig, field), getattr(got, field)
            if isinstance(a, float) and math.isnan(a):
                assert math.isnan(b)
            else:
                assert a == b, field


def test_trace_read_errors(tmp_path):
    bad_header = tmp_path / "h.csv"
    bad_header.write_text("n,f_x\n1,2\n")
    with pytest.raises(ValueError, match="bad header"):
        read_trace_csv(bad_header)

    short_row = tmp_path / "s.csv"
    short_row.write_text(harness.TRACE_HEADER + "\n1,2,3\n")
    with pytest.raises(ValueError, match="line 2: expected 9 fields"):
        read_trace_csv(short_row)

    bad_float = tmp_path / "f.csv"
    bad_float.write_text(harness.TRACE_HEADER + "\n1,2,3,4,5,x,7,8,9\n")
    with pytest.raises(ValueError, match="line 2"):
        read_trace_csv(bad_float)


def test_trace_write_atomic(tmp_path):
    path = tmp_path / "t.csv"
    write_trace_csv(sample_rows(), path)
    write_trace_csv(sample_rows()[:1], path)
    assert len(read_trace_csv(path)) == 1
    assert list(tmp_path.iterdir()) == [path]  # no temp droppings

    with pytest.raises(OSError):
        write_trace_csv(sample_rows(), tmp_path / "missing" / "t.csv")


def test_run_experiment_exact_seeds_identical(tmp_path):
    cfg = parse_config(BASE_CFG.replace("iterations = 300",
                                        "iterations = 300\nseeds = 0 1"),
                       name="exp")
    paths = run_experiment(cfg, out_dir=tmp_path)
    assert [p.name for p in paths] == ["exp_seed0.csv", "exp_seed1.csv"]
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rows = read_trace_csv(paths[0])
    assert [r.n for r in rows] == [50, 100, 150, 200, 250, 300]
    assert all(r.elapsed_s == 0.0 for r in rows)


def test_run_experiment_is_byte_reproducible(tmp_path):
    cfg = parse_config(BASE_CFG, name="exp")
    first = run_experiment(cfg, out_dir=tmp_path / "a")[0].read_bytes()
    second = run_experiment(cfg, out_dir=tmp_path / "b")[0].read_bytes()
    assert first == second


def test_reference_cache_hit(tmp_path, monkeypatch):
    cfg = parse_config(BASE_CFG, name="exp")
    run_experiment(cfg, out_dir=tmp_path)
    cache = tmp_path / "_refcache" / ("%s.json" % cfg.problem_key)
    assert cache.exists()

    def boom(*a, **kw):
        raise AssertionError("reference recomputed despite cache")

    monkeypatch.setattr(harness, "reference_optimum", boom)
    paths = run_experiment(cfg, out_dir=tmp_path)
    assert paths[0].exists()


def test_stochastic_seeds_differ_but_reproduce(tmp_path):
    cfg = parse_config(STOCH_CFG, name="st")
    p1 = run_experiment(cfg, out_dir=tmp_path / "a")
    assert p1[0].read_bytes() != p1[1].read_bytes()
    p2 = run_experiment(cfg, out_dir=tmp_path / "b")
    assert p1[0].read_bytes() == p2[0].read_bytes()
    assert p1[1].read_bytes() == p2[1].read_bytes()


def test_wall_timing_writes_real_times(tmp_path):
    cfg = parse_config(BASE_CFG.replace("stride = 50",
                                        "stride = 50\ntiming = wall"),
                       name="w")
    rows = read_trace_csv(run_experiment(cfg, out_dir=tmp_path)[0])
    times = [r.elapsed_s for r in rows]
    assert all(t > 0 for t in times)
    assert times == sorted(times)


def test_check_bound_strict_pass(tmp_path):
    cfg = parse_config(BASE_CFG, name="exp")
    paths = run_experiment(cfg, out_dir=tmp_path)
    report = check_bound(paths, strict=True)
    assert report.ok
    assert report.checked_rows == 6
    assert "passed" in report.summary()


def test_check_bound_strict_catches_tampering(tmp_path):
    cfg = parse_config(BASE_CFG, name="exp")
    path = run_experiment(cfg, out_dir=tmp_path)[0]
    rows = read_trace_csv(path)
    rows[2].gap_best = rows[2].bound + 1.0
    write_trace_csv(rows, path)
    report = check_bound([path], strict=True)
    assert not report.ok
    assert "exceeds bound" in report.summary()
    assert "n=%d" % rows[2].n in report.summary()


def test_check_bound_rejects_missing_bound(tmp_path):
    cfg = parse_config(BASE_CFG, name="exp")
    path = run_experiment(cfg, out_dir=tmp_path, unsafe=True)[0]
    report = check_bound([path], strict=True)
    assert not report.ok
    assert "refusing to check" in report.summary()


def test_check_bound_seed_mean_mode(tmp_path):
    cfg = parse_config(STOCH_CFG, name="st")
    paths = run_experiment(cfg, out_dir=tmp_path)
    report = check_bound(paths, strict=False)
    assert report.ok, report.summary()

    # traces truncated at different n are not comparable
    rows = read_trace_csv(paths[0])
    write_trace_csv(rows[:-1], paths[0])
    report = check_bound(paths, strict=False)
    assert not report.ok
    assert "different n" in report.summary()


def test_check_bound_input_validation(tmp_path):
    with pytest.raises(ValueError, match="no trace files"):
        check_bound([], strict=True)
    empty = tmp_path / "e.csv"
    empty.write_text(harness.TRACE_HEADER + "\n")
    report = check_bound([empty], strict=True)
    assert not report.ok
    assert "empty trace" in report.summary()


def test_compare_runs_presets(tmp_path):
    cfg = parse_config(BASE_CFG, name="exp")
    result = compare(cfg, ["forward_backward", "leap_frog", "rda"],
                     out_dir=tmp_path)
    assert [r["preset"] for r in result.rows] == \
        ["forward_backward", "leap_frog", "rda"]
    for r in result.rows:
        assert np.isfinite(r["final_gap_best"])
        assert r["median_backward_step"] > 0
    table = result.table()
    assert table.splitlines()[0].startswith("preset")
    assert "leap_frog" in table
    text = result.csv_path.read_text().splitlines()
    assert text[0] == "preset,final_gap_best,final_nnz,median_backward_step"
    assert len(text) == 4

    with pytest.raises(ValueError, match="no presets"):
        compare(cfg, [], out_dir=tmp_path)


def test_compare_single_preset_keeps_config_params(tmp_path):
    cfg = parse_config(BASE_CFG.replace(
        "preset = leap_frog",
        "preset = averaged_leap_frog\nmu = 0.25\nstep_kind = constant\n"
        "step_scale = 0.5"), name="exp")
    result = compare(cfg, ["averaged_leap_frog"], out_dir=tmp_path)
    assert len(result.rows) == 1


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_cli_run_ok(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE_CFG)
    code = main(["--config", cfg, "--out", str(tmp_path / "o"), "run"])
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1 and out[0].endswith("exp_seed0.csv")
    assert (tmp_path / "o" / "exp_seed0.csv").exists()


def test_cli_needs_config(tmp_path, capsys):
    assert main(["run"]) == 1
    assert "needs --config" in capsys.readouterr().err


def test_cli_config_errors_exit_1(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE_CFG.replace("lambda = 0.1", ""))
    assert main(["--config", cfg, "run"]) == 1
    err = capsys.readouterr().err
    assert "config error:" in err
    assert "lambda" in err


def test_cli_runtime_errors_exit_2(tmp_path, capsys):
    broken = BASE_CFG.replace(
        "d = 6\nm = 12\nk = 2\nnoise = 0.1\ndata_seed = 3",
        "data_a = missing_A.txt\ndata_b = missing_b.txt")
    cfg = write_cfg(tmp_path, broken)
    assert main(["--config", cfg, "run"]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_check_bound_exit_codes(tmp_path, capsys):
    cfg = parse_config(BASE_CFG, name="exp")
    path = run_experiment(cfg, out_dir=tmp_path)[0]
    assert main(["check-bound", str(path), "--strict"]) == 0
    assert "passed" in capsys.readouterr().out

    rows = read_trace_csv(path)
    rows[0].gap_avg = rows[0].bound + 5.0
    write_trace_csv(rows, path)
    assert main(["check-bound", str(path), "--strict"]) == 3
    # a generous slack forgives the exceedance
    assert main(["check-bound", str(path), "--strict", "--slack", "10"]) == 0


def test_cli_compare(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE_CFG)
    code = main(["--config", cfg, "--out", str(tmp_path / "o"),
                 "--stride", "100", "compare", "--presets",
                 "leap_frog,forward_backward"])
    assert code == 0
    out = capsys.readouterr().out
    assert "forward_backward" in out
    assert "exp_compare.csv" in out


def test_cli_gen_problem(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE_CFG)
    code = main(["--config", cfg, "--out", str(tmp_path / "o"), "gen-problem"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    A = np.loadtxt(tmp_path / "o" / "exp_A.txt")
    assert A.shape == (12, 6)
    planted = np.loadtxt(tmp_path / "o" / "exp_planted.txt")
    assert np.count_nonzero(planted) == 2

    linear = write_cfg(tmp_path, """\
spec_version = 1
[problem]
loss = linear
mirror = entropy
regularizer = simplex
cost = 1.0 -3.0 2.0
[schedule]
preset = rda
[run]
iterations = 5
""", name="lin.cfg")
    assert main(["--config", linear, "--out", str(tmp_path / "o"),
                 "gen-problem"]) == 0
    cost = np.loadtxt(tmp_path / "o" / "lin_cost.txt")
    assert np.array_equal(cost, [1.0, -3.0, 2.0])


def test_cli_unsafe_traces_fail_bound_check(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE_CFG)
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out), "--unsafe", "run"]) == 0
    capsys.readouterr()
    trace = out / "exp_seed0.csv"
    assert main(["check-bound", str(trace), "--strict"]) == 3
    assert "refusing" in capsys.readouterr().out
