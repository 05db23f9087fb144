import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import central_jacobian
from ratc1.bspline import fit_spline
from ratc1.cli import cli_dispatch
from ratc1.errors import ArgumentError, DegenerateSeries
from ratc1.harness import (Grid, c1_error, csv_text, fit_rate, get_target, read_csv,
                           target_names, unit_grid, write_csv)
from ratc1.newman import sup_errors


# -- targets ----------------------------------------------------------------

@pytest.mark.parametrize("name", ["sin2pi", "gauss", "runge", "poly2", "const1"])
def test_target_gradient_matches_fd(name, rng):
    f = get_target(name)
    pts = rng.uniform(0.01, 0.99, (100, 1))
    assert np.abs(f.grad(pts) - central_jacobian(f, pts, 1e-6)).max() <= 1e-6


@pytest.mark.parametrize("name", ["sin2pi*gauss", "runge*poly2", "gauss"])
def test_product_target_gradient_matches_fd(name, rng):
    f = get_target(name, d=2)
    assert f.d == 2 and f.p == 1
    pts = rng.uniform(0.01, 0.99, (100, 2))
    assert np.abs(f.grad(pts) - central_jacobian(f, pts, 1e-6)).max() <= 1e-6


def test_target_registry():
    assert {"sin2pi", "gauss", "runge", "poly2"} <= set(target_names())
    g = get_target("gauss")
    assert g(np.array([0.5]))[0, 0] == 1.0
    assert g(np.array([0.0]))[0, 0] == pytest.approx(math.exp(-4))
    with pytest.raises(ArgumentError):
        get_target("nope")
    with pytest.raises(ArgumentError):
        get_target("sin2pi*gauss", d=3)


# -- grids and norms --------------------------------------------------------

def test_grid_shapes():
    assert Grid(5, 2).points().shape == (25, 2)
    assert unit_grid(1).points_per_axis == 10_000
    assert unit_grid(2).points_per_axis == 200
    a = Grid(11).axis()
    assert a[0] == 0.0 and a[-1] == 1.0


def test_c1_error_of_identical_functions():
    f = get_target("sin2pi")
    rep = c1_error(f, f, unit_grid(1))
    assert rep.c0_error <= 1e-14 and rep.c1_error <= 1e-14


def test_c1_error_of_constant_shift():
    f = get_target("runge")
    g = (lambda x: f(x) + 0.1, f.grad)
    rep = c1_error(f, g, Grid(1001))
    assert rep.c0_error == pytest.approx(0.1, abs=1e-15)
    assert rep.c1_error == pytest.approx(0.1, abs=1e-15)
    assert rep.grad_error == pytest.approx(0.0, abs=1e-15)


def test_c1_error_records_argmax():
    f = get_target("poly2")
    g = (lambda x: f(x) + x[:, :1] ** 3, lambda x: f.grad(x))
    rep = c1_error(f, g, Grid(101))
    assert rep.c0_argmax == (1.0,)
    assert rep.c0_error == pytest.approx(1.0)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_c1_dominates_c0(a, b):
    f = get_target("gauss")
    g = (lambda x: f(x) + a * x[:, :1], lambda x: f.grad(x) + b)
    rep = c1_error(f, g, Grid(51))
    assert rep.c1_error >= rep.c0_error


def test_spline_report_is_deterministic():
    f = get_target("sin2pi")

    def report():
        s = fit_spline(f.sampler, 3, 8)
        return c1_error(f, s, unit_grid(1))

    a, b = report(), report()
    assert (a.c0_error, a.c1_error, a.c0_argmax, a.grad_argmax) == \
        (b.c0_error, b.c1_error, b.c0_argmax, b.grad_argmax)


# -- rate fits --------------------------------------------------------------

def test_fit_rate_power_law():
    x = np.array([4.0, 8, 16, 32, 64])
    fit = fit_rate(x, x ** -2.0)
    assert abs(fit.slope + 2.0) <= 1e-10
    assert fit.r2 == pytest.approx(1.0)
    assert fit.mode == "loglog"


def test_fit_rate_sqrt_mode():
    x = np.array([4.0, 9, 16, 25, 36])
    fit = fit_rate(x, np.exp(-np.sqrt(x)), mode="sqrt")
    assert abs(fit.slope + 1.0) <= 1e-10
    assert abs(fit.intercept) <= 1e-10


@given(st.floats(-5, 5), st.floats(0.1, 10))
def test_fit_rate_recovers_any_power(k, c):
    x = np.array([2.0, 3, 5, 7, 11])
    assert fit_rate(x, c * x ** k).slope == pytest.approx(k, abs=1e-9)


@pytest.mark.parametrize("x, y", [
    ([1, 2], [1, 2]),
    ([1, 2, 3], [1, 0, 1]),
    ([1, 2, 3], [1, -1, 1]),
    ([1, 2, 3], [1, float("nan"), 1]),
    ([0, 2, 3], [1, 1, 1]),
])
def test_fit_rate_degenerate(x, y):
    with pytest.raises(DegenerateSeries):
        fit_rate(x, y)


def test_fit_rate_unknown_mode():
    with pytest.raises(ArgumentError):
        fit_rate([1, 2, 3], [1, 2, 3], mode="semilog")


def test_newman_series_sqrt_slope():
    ns = [4, 9, 16, 25, 36, 49, 64]
    ys = [sup_errors(n, 20_000)["c0_err_abs"] for n in ns]
    assert fit_rate(ns, ys, mode="sqrt").slope <= -0.8


# -- CSV --------------------------------------------------------------------

GOLDEN = "n,err,flag,name\n4,0.1,true,a\n16,1e-07,false,\"b,c\"\n"


def test_csv_golden_format():
    rows = [[4, 0.1, True, "a"], [np.int64(16), np.float64(1e-7), False, "b,c"]]
    assert csv_text(["n", "err", "flag", "name"], rows) == GOLDEN


def test_csv_floats_round_trip(tmp_path):
    vals = [1 / 3, 2.0 ** -60, 12345.678901234567]
    path = tmp_path / "t.csv"
    write_csv(path, ["v"], [[v] for v in vals])
    assert path.read_bytes().count(b"\r") == 0
    assert [float(r["v"]) for r in read_csv(path)] == vals


# -- CLI --------------------------------------------------------------------

def run(argv, capsys):
    code = cli_dispatch([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_unknown_subcommand(capsys):
    assert run(["frobnicate"], capsys)[0] == 2


def test_cli_missing_subcommand(capsys):
    assert run([], capsys)[0] == 2


def test_cli_bad_flag_value(capsys):
    assert run(["newman-table", "--n-list", "4,x"], capsys)[0] == 2


def test_cli_newman_table_and_rates(tmp_path, capsys):
    table = tmp_path / "table.csv"
    argv = ["newman-table", "--n-list", "4,9,16,25", "--grid", 5000, "--out", table]
    assert run(argv, capsys)[0] == 0
    first = table.read_bytes()
    assert first.splitlines()[0] == b"n,c0_err_abs,c0_bound,c0_err_requ,c1_err_requ"
    assert run(argv, capsys)[0] == 0
    assert table.read_bytes() == first
    code, out, _ = run(["rates", "--in", table, "--x", "n", "--y", "c0_err_abs",
                        "--mode", "sqrt"], capsys)
    assert code == 0 and out.startswith("slope=")
    assert float(out.split()[0].split("=")[1]) < 0
    assert run(["rates", "--in", table, "--x", "n", "--y", "missing"], capsys)[0] == 2


def test_cli_rates_degenerate_series(tmp_path, capsys):
    path = tmp_path / "z.csv"
    write_csv(path, ["n", "e"], [[1, 1.0], [2, 0.0], [3, 1.0]])
    assert run(["rates", "--in", path, "--x", "n", "--y", "e"], capsys)[0] == 2


def test_cli_spline_fit_and_eval(tmp_path, capsys):
    sj, vals = tmp_path / "spline.json", tmp_path / "vals.csv"
    assert run(["spline-fit", "--fn", "sin2pi", "--beta", 3, "--N", 8, "--d", 1,
                "--out", sj], capsys)[0] == 0
    assert run(["spline-eval", "--in", sj, "--grid", 101, "--out", vals], capsys)[0] == 0
    rows = read_csv(vals)
    assert len(rows) == 101 and list(rows[0]) == ["x", "s", "ds/dx"]
    err = max(abs(float(r["s"]) - math.sin(2 * math.pi * float(r["x"]))) for r in rows)
    assert err < 1e-2


def test_cli_net_build_and_eval(tmp_path, capsys):
    nj, err = tmp_path / "net.json", tmp_path / "err.csv"
    argv = ["net-build", "--beta", 3, "--N", 8, "--M", 16, "--d", 1, "--fn", "sin2pi",
            "--oracle", "false", "--out", nj]
    assert run(argv, capsys)[0] == 0
    assert run(["net-eval", "--in", nj, "--grid", 501, "--ref", "sin2pi", "--out", err],
               capsys)[0] == 0
    first = err.read_bytes()
    rows = read_csv(err)
    assert list(rows[0]) == ["x", "f", "net", "|Δ|", "|Δ′|"]
    assert max(float(r["|Δ|"]) for r in rows) < 0.05
    assert run(["net-eval", "--in", nj, "--grid", 501, "--ref", "sin2pi", "--out", err],
               capsys)[0] == 0
    assert err.read_bytes() == first


def test_cli_net_build_rejects_bad_beta(tmp_path, capsys):
    assert run(["net-build", "--beta", 2, "--N", 8, "--out", tmp_path / "n.json"],
               capsys)[0] == 2


def test_cli_symreg_demo(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert run(["symreg-demo", "--activations", "exp1,atan2", "--fn", "sin2pi",
                "--schedule", "4,8", "--grid", 201, "--out", out], capsys)[0] == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["schedule_entry", "c0_err", "c1_err", "cancel_err_1", "cancel_err_2"]
    assert [r["schedule_entry"] for r in rows] == ["4", "8"]
    assert run(["symreg-demo", "--activations", "relu"], capsys)[0] == 2


def test_cli_config_file_sets_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nn-list = 4,9,16\ngrid=2000\n")
    code, out, _ = run(["--config", cfg, "newman-table"], capsys)
    assert code == 0
    assert [l.split(",")[0] for l in out.splitlines()[1:]] == ["4", "9", "16"]
    bad = tmp_path / "bad.cfg"
    bad.write_text("grid 2000\n")
    assert run(["--config", bad, "newman-table"], capsys)[0] == 2


def test_cli_thread_cap(monkeypatch, capsys):
    monkeypatch.setenv("RATC1_THREADS", "zero")
    assert run(["newman-table", "--n-list", "4"], capsys)[0] == 2
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    monkeypatch.setenv("RATC1_THREADS", "2")
    assert run(["newman-table", "--n-list", "4,9,16", "--grid", 1000], capsys)[0] == 0
    import os
    assert os.environ["OMP_NUM_THREADS"] == "2"


def test_cli_selftest_quick(capsys):
    code, out, _ = run(["selftest", "--quick"], capsys)
    assert code == 0
    assert out.count("[PASS]") == 12
    assert "12/12 criteria passed" in out
