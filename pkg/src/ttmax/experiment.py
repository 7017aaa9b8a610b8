"""Grid experiments for the alternating-projection error, rate fits and plots.

Each grid cell ``(kind, d, n, r, rep)`` gets its own seed derived from the
base seed and the cell coordinates, so any sub-grid reproduces the same
numbers.  Rows are written in sorted cell order after all cells finish,
which keeps the CSV bytes independent of worker scheduling.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .altproj import APConfig, binary_search_epsilon
from .generators import identity_tensor, uniform_tensor

__all__ = [
    "CSV_HEADER",
    "ExperimentGrid",
    "CellResult",
    "cell_seed",
    "run_cell",
    "run_grid",
    "aggregate",
    "write_csv",
    "grid_csv",
    "read_csv",
    "FitResult",
    "fit_rates",
    "emit_plots",
    "PlotFile",
]

CSV_HEADER = ("kind", "d", "n", "r", "rep", "seed", "epsilon", "iterations",
              "converged", "elapsed_ms")
KIND_CODES = {"identity": 0, "uniform": 1}
AGGREGATORS = {"identity": "min", "uniform": "median"}


def cell_seed(base_seed: int, kind: str, d: int, n: int, r: int, rep: int) -> int:
    """32-bit seed mixed from the base seed and the cell coordinates."""
    entropy = [base_seed, KIND_CODES[kind], d, n, r, rep]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentGrid:
    """Cartesian grid over kinds, orders, sizes and ranks.

    ``aggregator`` defaults to the convention of the kind: the minimum over
    repetitions for identity tensors and the median for uniform ones.
    ``timing`` fills the ``elapsed_ms`` column, which makes the output
    nondeterministic.
    """

    orders: tuple[int, ...] = (2,)
    sizes: tuple[int, ...] = (64,)
    ranks: tuple[int, ...] = (8, 16, 32)
    kinds: tuple[str, ...] = ("identity",)
    repetitions: int = 5
    aggregator: str | None = None
    base_seed: int = 0
    restarts: int = 1
    max_iter: int = 500
    conv_tol: float = 1e-8
    slack: float = 1e-6
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        for name in ("orders", "sizes", "ranks", "kinds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if any(k not in KIND_CODES for k in self.kinds):
            raise ValueError(f"kinds must be among {tuple(KIND_CODES)}")
        if any(d < 2 for d in self.orders):
            raise ValueError("orders must be >= 2")
        if any(n < 1 for n in self.sizes) or any(r < 1 for r in self.ranks):
            raise ValueError("sizes and ranks must be positive")
        if self.aggregator is not None:
            if self.aggregator not in ("min", "median"):
                raise ValueError("aggregator must be 'min' or 'median'")
            if any(AGGREGATORS[k] != self.aggregator for k in self.kinds):
                raise ValueError("aggregator does not match the tensor kind")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def aggregator_for(self, kind: str) -> str:
        return self.aggregator or AGGREGATORS[kind]

    def cells(self) -> list[tuple[str, int, int, int, int]]:
        return sorted(
            (kind, d, n, r, rep)
            for kind in self.kinds for d in self.orders for n in self.sizes
            for r in self.ranks for rep in range(self.repetitions)
        )


@dataclass(frozen=True)
class CellResult:
    kind: str
    d: int
    n: int
    r: int
    rep: int | str
    seed: int
    epsilon: float
    iterations: int
    converged: bool
    elapsed_ms: float | None = None

    def row(self) -> dict[str, str]:
        return {
            "kind": self.kind, "d": str(self.d), "n": str(self.n), "r": str(self.r),
            "rep": str(self.rep), "seed": str(self.seed),
            "epsilon": repr(float(self.epsilon)), "iterations": str(self.iterations),
            "converged": "true" if self.converged else "false",
            "elapsed_ms": "" if self.elapsed_ms is None else f"{self.elapsed_ms:.3f}",
        }


def _instance(kind: str, d: int, n: int, seed: int) -> np.ndarray:
    if kind == "identity":
        return identity_tensor(n, d)
    return uniform_tensor((n,) * d, seed)


def run_cell(grid: ExperimentGrid, cell: tuple[str, int, int, int, int]) -> CellResult:
    """One binary search; failures are recorded as ``nan`` rather than raised."""
    kind, d, n, r, rep = cell
    seed = cell_seed(grid.base_seed, *cell)
    start = time.perf_counter()
    try:
        a = _instance(kind, d, n, seed)
        cfg = APConfig(r, grid.max_iter, grid.conv_tol, grid.slack, seed)
        report, _ = binary_search_epsilon(a, cfg, grid.restarts)
        eps, iters, conv = report.epsilon_achieved, report.iterations_used, report.converged
    except (ValueError, FloatingPointError, MemoryError, np.linalg.LinAlgError):
        eps, iters, conv = math.nan, 0, False
    elapsed = (time.perf_counter() - start) * 1e3 if grid.timing else None
    return CellResult(kind, d, n, r, rep, seed, eps, iters, conv, elapsed)


def _run_cell_star(args):
    return run_cell(*args)


def aggregate(results: Sequence[CellResult], grid: ExperimentGrid) -> list[CellResult]:
    """One row per ``(kind, d, n, r)`` with the kind's aggregator over repetitions.

    The ``rep`` column carries the aggregator name and ``seed`` the base seed.
    """
    groups: dict[tuple, list[CellResult]] = {}
    for res in results:
        groups.setdefault((res.kind, res.d, res.n, res.r), []).append(res)
    out = []
    for (kind, d, n, r), group in sorted(groups.items()):
        agg = grid.aggregator_for(kind)
        eps = np.array([g.epsilon for g in group])
        eps = eps[np.isfinite(eps)]
        value = math.nan if eps.size == 0 else float(np.min(eps) if agg == "min" else np.median(eps))
        elapsed = None
        if grid.timing:
            elapsed = float(sum(g.elapsed_ms for g in group))
        out.append(CellResult(kind, d, n, r, agg, grid.base_seed, value,
                              sum(g.iterations for g in group),
                              all(g.converged for g in group), elapsed))
    return out


def run_grid(grid: ExperimentGrid) -> list[CellResult]:
    """Per-repetition rows in sorted cell order followed by the aggregated rows."""
    cells = grid.cells()
    if grid.workers > 1:
        with ProcessPoolExecutor(max_workers=grid.workers) as pool:
            results = list(pool.map(_run_cell_star, [(grid, c) for c in cells]))
    else:
        results = [run_cell(grid, c) for c in cells]
    return results + aggregate(results, grid)


def write_csv(results: Iterable[CellResult], path: str | PathLike) -> None:
    Path(path).write_text(grid_csv(results))


def grid_csv(results: Iterable[CellResult]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    for res in results:
        writer.writerow(res.row())
    return buf.getvalue()


def read_csv(source: str | PathLike) -> list[dict[str, str]]:
    """Rows of an experiment CSV; checks the header."""
    with open(source, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return list(reader)


def _rows(source) -> list[dict[str, str]]:
    if isinstance(source, (str, PathLike)):
        return read_csv(source)
    rows = []
    for item in source:
        rows.append(item.row() if isinstance(item, CellResult) else dict(item))
    return rows


def _aggregated(rows: list[dict[str, str]]) -> list[dict[str, str]]:
    return [row for row in rows if row["rep"] in ("min", "median")]


@dataclass(frozen=True)
class FitResult:
    """``log eps = log_c + alpha log(n - r) - beta log r`` fitted by least squares."""

    alpha: float
    beta: float
    log_c: float
    residual: float
    points: int


def fit_rates(source, kind: str | None = None, d: int | None = None) -> FitResult:
    """Fit the error model to the aggregated rows of an experiment.

    ``source`` is a CSV path or an iterable of rows.  Rows with ``r >= n`` or a
    nonpositive or missing error carry no information on the model and are
    skipped.  At least four usable points are required.
    """
    pts = []
    for row in _aggregated(_rows(source)):
        if kind is not None and row["kind"] != kind:
            continue
        if d is not None and int(row["d"]) != d:
            continue
        n, r, eps = int(row["n"]), int(row["r"]), float(row["epsilon"])
        if r < n and math.isfinite(eps) and eps > 0:
            pts.append((n, r, eps))
    if len(pts) < 4:
        raise ValueError(f"need at least 4 usable points, got {len(pts)}")
    n, r, eps = (np.array(c, dtype=float) for c in zip(*pts))
    design = np.column_stack([np.ones_like(n), np.log(n - r), -np.log(r)])
    coef, *_ = np.linalg.lstsq(design, np.log(eps), rcond=None)
    resid = float(np.linalg.norm(design @ coef - np.log(eps)))
    return FitResult(alpha=float(coef[1]), beta=float(coef[2]), log_c=float(coef[0]),
                     residual=resid, points=len(pts))


@dataclass(frozen=True)
class PlotFile:
    path: Path
    labels: tuple[str, ...]


def emit_plots(source, out_dir: str | PathLike) -> list[PlotFile]:
    """One SVG per ``(kind, d)``: aggregated error against rank, one curve per size.

    An experiment without rows still yields a single file with empty axes.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _aggregated(_rows(source))
    panels: dict[tuple[str, int], dict[int, list[tuple[int, float]]]] = {}
    for row in rows:
        series = panels.setdefault((row["kind"], int(row["d"])), {})
        series.setdefault(int(row["n"]), []).append((int(row["r"]), float(row["epsilon"])))

    files = []
    if not panels:
        panels = {("empty", 0): {}}
    for (kind, d), series in sorted(panels.items()):
        fig, ax = plt.subplots(figsize=(5, 4))
        labels = []
        for n, pts in sorted(series.items()):
            pts.sort()
            label = f"n={n}"
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
            labels.append(label)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("TT rank r")
        ax.set_ylabel("max-norm error")
        if labels:
            ax.set_title(f"{kind}, d={d}")
            ax.legend()
        name = "experiment.svg" if kind == "empty" else f"{kind}_d{d}.svg"
        path = out_dir / name
        # fixed id salt so identical inputs give identical SVG bytes
        with matplotlib.rc_context({"svg.hashsalt": "ttmax"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        files.append(PlotFile(path, tuple(labels)))
    return files
