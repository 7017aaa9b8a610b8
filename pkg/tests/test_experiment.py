import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttmax.experiment import (
    CSV_HEADER,
    CellResult,
    ExperimentGrid,
    aggregate,
    cell_seed,
    emit_plots,
    fit_rates,
    grid_csv,
    read_csv,
    run_cell,
    run_grid,
    write_csv,
)


def small_grid(**kw):
    base = dict(orders=(2,), sizes=(6,), ranks=(2, 6), kinds=("identity",), repetitions=2,
                max_iter=100)
    base.update(kw)
    return ExperimentGrid(**base)


def test_grid_validation():
    for kw in ({"repetitions": 0}, {"kinds": ("gaussian",)}, {"orders": (1,)},
               {"aggregator": "mean"}, {"aggregator": "median"}, {"workers": 0}, {"ranks": (0,)}):
        with pytest.raises(ValueError):
            small_grid(**kw)
    assert small_grid(aggregator="min").aggregator_for("identity") == "min"
    assert small_grid(kinds=("uniform",)).aggregator_for("uniform") == "median"


def test_cells_sorted_and_complete():
    grid = small_grid(kinds=("uniform", "identity"), orders=(3, 2))
    cells = grid.cells()
    assert cells == sorted(cells)
    assert len(cells) == 2 * 2 * 1 * 2 * 2


def test_cell_seed_stable_under_subsetting():
    full = ExperimentGrid(sizes=(6, 8), ranks=(2, 3), repetitions=2)
    sub = ExperimentGrid(sizes=(8,), ranks=(3,), repetitions=2)
    seeds = {c: cell_seed(0, *c) for c in full.cells()}
    for c in sub.cells():
        assert cell_seed(0, *c) == seeds[c]
    assert len(set(seeds.values())) == len(seeds)
    assert cell_seed(1, "identity", 2, 6, 2, 0) != cell_seed(0, "identity", 2, 6, 2, 0)


def test_trivially_exact_cell():
    res = run_cell(small_grid(), ("identity", 2, 6, 6, 0))
    assert res.epsilon <= 1e-6
    assert res.converged


def test_failed_cell_is_recorded():
    grid = small_grid()
    res = run_cell(grid, ("identity", 2, 0, 1, 0))
    assert math.isnan(res.epsilon) and not res.converged
    row = res.row()
    assert row["epsilon"] == "nan" and row["converged"] == "false"


def test_run_grid_rows_and_aggregation():
    grid = small_grid()
    rows = run_grid(grid)
    per_rep = [r for r in rows if r.rep not in ("min", "median")]
    agg = [r for r in rows if r.rep == "min"]
    assert len(per_rep) == 4 and len(agg) == 2
    for a in agg:
        group = [r.epsilon for r in per_rep if r.r == a.r]
        assert a.epsilon == min(group)
        assert a.seed == grid.base_seed


def test_aggregate_median_ignores_failures():
    grid = small_grid(kinds=("uniform",))
    res = [CellResult("uniform", 2, 6, 2, k, 0, e, 1, True) for k, e in enumerate((0.3, math.nan, 0.1, 0.2))]
    (row,) = aggregate(res, grid)
    assert row.epsilon == pytest.approx(0.2)
    assert row.rep == "median"


def test_csv_bytes_deterministic(tmp_path):
    grid = small_grid(kinds=("identity", "uniform"))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_grid(grid), a)
    write_csv(run_grid(grid), b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert CSV_HEADER == ("kind", "d", "n", "r", "rep", "seed", "epsilon", "iterations",
                          "converged", "elapsed_ms")


def test_parallel_matches_serial():
    grid = small_grid(kinds=("uniform",))
    par = ExperimentGrid(**{**grid.__dict__, "workers": 2})
    assert grid_csv(run_grid(grid)) == grid_csv(run_grid(par))


def test_timing_fills_elapsed():
    rows = run_grid(small_grid(ranks=(6,), repetitions=1, timing=True))
    assert all(r.elapsed_ms is not None and r.elapsed_ms >= 0 for r in rows)


def test_read_csv_checks_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("kind,d\nidentity,2\n")
    with pytest.raises(ValueError):
        read_csv(bad)


def test_identity_trend_d2():
    grid = ExperimentGrid(orders=(2,), sizes=(32,), ranks=(4, 8, 16), repetitions=2)
    agg = [r.epsilon for r in run_grid(grid) if r.rep == "min"]
    assert agg[0] > agg[1] > agg[2]


# -- rate fits ---------------------------------------------------------------------

def model_rows(alpha, beta, log_c, sizes=(16, 32, 64), ranks=(2, 4, 8), noise=None):
    rows = []
    for n in sizes:
        for r in ranks:
            eps = math.exp(log_c + alpha * math.log(n - r) - beta * math.log(r))
            if noise is not None:
                eps *= math.exp(noise.normal(scale=0.01))
            rows.append(CellResult("uniform", 2, n, r, "median", 0, eps, 1, True))
    return rows


@settings(max_examples=50)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-3, 3))
def test_fit_recovers_exact_model(alpha, beta, log_c):
    fit = fit_rates(model_rows(alpha, beta, log_c))
    assert fit.alpha == pytest.approx(alpha, abs=1e-6)
    assert fit.beta == pytest.approx(beta, abs=1e-6)
    assert fit.log_c == pytest.approx(log_c, abs=1e-6)
    assert fit.points == 9


def test_fit_constant_data():
    fit = fit_rates(model_rows(0.0, 0.0, math.log(0.25)))
    assert abs(fit.beta) < 1e-8 and abs(fit.alpha) < 1e-8


def test_fit_noisy_data(rng):
    fit = fit_rates(model_rows(0.5, 0.7, 0.0, noise=rng))
    assert fit.beta == pytest.approx(0.7, abs=0.05)


def test_fit_filters_and_requires_points(tmp_path):
    rows = model_rows(0.5, 0.5, 0.0, sizes=(16,), ranks=(2, 4))
    rows += [CellResult("uniform", 2, 16, 16, "median", 0, 0.1, 1, True),
             CellResult("uniform", 2, 16, 8, "median", 0, 0.0, 1, True),
             CellResult("uniform", 2, 16, 6, 0, 0, 0.1, 1, True)]
    with pytest.raises(ValueError):
        fit_rates(rows)  # r = n, zero error and per-repetition rows are skipped
    path = tmp_path / "g.csv"
    write_csv(model_rows(0.5, 0.5, 0.0), path)
    assert fit_rates(path, kind="uniform", d=2).points == 9
    with pytest.raises(ValueError):
        fit_rates(path, kind="identity")


def test_fit_identity_grid_decreasing():
    grid = ExperimentGrid(orders=(2,), sizes=(16, 24), ranks=(2, 4, 8), repetitions=1)
    assert fit_rates(run_grid(grid), "identity", 2).beta > 0


# -- plots -------------------------------------------------------------------------

def test_plot_empty(tmp_path):
    src = tmp_path / "empty.csv"
    write_csv([], src)
    (plot,) = emit_plots(src, tmp_path / "plots")
    text = plot.path.read_text()
    assert plot.path.name == "experiment.svg" and plot.labels == ()
    assert "<svg" in text and "axes_1" in text


def test_plot_single_series(tmp_path):
    rows = [CellResult("identity", 2, 8, r, "min", 0, 1 / r, 1, True) for r in (1, 2, 4)]
    (plot,) = emit_plots(rows, tmp_path)
    assert plot.path.name == "identity_d2.svg"
    assert plot.labels == ("n=8",)
    assert plot.path.read_text().count('id="line2d_') >= 1


def test_plot_full_grid(tmp_path):
    rows = model_rows(0.5, 0.5, 0.0) + [
        CellResult("identity", d, n, r, "min", 0, 0.5 / r, 1, True)
        for d in (2, 3) for n in (8, 16) for r in (2, 4)]
    plots = emit_plots(rows, tmp_path)
    names = sorted(p.path.name for p in plots)
    assert names == ["identity_d2.svg", "identity_d3.svg", "uniform_d2.svg"]
    by_name = {p.path.name: p for p in plots}
    assert by_name["uniform_d2.svg"].labels == ("n=16", "n=32", "n=64")
    assert by_name["identity_d3.svg"].labels == ("n=8", "n=16")


def test_plots_are_deterministic(tmp_path):
    rows = model_rows(0.5, 0.5, 0.0)
    (a,) = emit_plots(rows, tmp_path / "a")
    (b,) = emit_plots(rows, tmp_path / "b")
    assert a.path.read_bytes() == b.path.read_bytes()
