"""Command-line entry point ``ttmax``.

Every subcommand reads its parameters from three layers: built-in defaults,
an optional ``--config`` file of ``key = value`` lines, and explicit flags,
with later layers winning.  Exit status is 0 on success, 2 for invalid
configuration and 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from .altproj import APConfig, binary_search_epsilon
from .experiment import ExperimentGrid, emit_plots, fit_rates, grid_csv, run_grid
from .generators import identity_tensor, identity_tt, random_tt_init, uniform_tensor
from .norms import (
    DEFAULT_C_D,
    coherence_error_bound,
    gamma_bound_via_coherence,
    rank_bound_matrix,
    rank_bound_tt,
    tt_core_coherences,
)
from .sketch import SketchConfig, sketch_error_report
from .tensor import TTTensor, tt_svd, tt_to_dense
from .tnsr import dumps, read_tnsr
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    pass


class VerificationFailed(Exception):
    pass


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _words(text: str) -> tuple[str, ...]:
    return tuple(text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_floats(text: str):
    return None if str(text).strip().lower() in ("", "none") else _floats(text)


# Parameter schema per subcommand: name -> (converter, default).
_TENSOR_KEYS: dict[str, tuple[Callable, object]] = {
    "input": (str, None),
    "kind": (str, "identity"),
    "n": (int, 8),
    "d": (int, 2),
    "dims": (_ints, None),
    "tt_rank": (int, 2),
}

SCHEMAS: dict[str, dict[str, tuple[Callable, object]]] = {
    "approx": {**_TENSOR_KEYS, "rank": (int, 1), "restarts": (int, 1),
               "max_iter": (int, 500), "conv_tol": (float, 1e-8), "slack": (float, 1e-6)},
    "sketch": {**_TENSOR_KEYS, "rank": (int, 4), "trials": (int, 50),
               "distribution": (str, "gaussian"), "eta": (_opt_floats, None)},
    "coherence": {**_TENSOR_KEYS, "epsilon": (float, 0.5), "c_d": (float, DEFAULT_C_D),
                  "norm": (str, "fro")},
    "bounds": {"dims": (_ints, (100, 100)), "epsilon": (_floats, (0.1,)),
               "c_d": (float, DEFAULT_C_D)},
    "experiment": {"orders": (_ints, (2,)), "sizes": (_ints, (64,)), "ranks": (_ints, (8, 16, 32)),
                   "kinds": (_words, ("identity",)), "repetitions": (int, 5),
                   "restarts": (int, 1), "max_iter": (int, 500), "conv_tol": (float, 1e-8),
                   "slack": (float, 1e-6), "workers": (int, 1), "timing": (_bool, False),
                   "plots": (str, None), "fit": (_bool, False)},
    "verify": {"suites": (_words, tuple(SUITES))},
}


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[params]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return dict(parser["params"])


def resolve(command: str, config: dict[str, str], flags: dict[str, object]) -> dict[str, object]:
    schema = SCHEMAS[command]
    unknown = sorted(set(config) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys for {command}: {', '.join(unknown)}")
    params = {}
    for key, (convert, default) in schema.items():
        value = default
        if key in config:
            try:
                value = convert(config[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from exc
        if flags.get(key) is not None:
            value = flags[key]
        params[key] = value
    return params


def _tensor(params) -> np.ndarray | TTTensor:
    """Dense target from a TNSR file, or a generated instance."""
    if params["input"]:
        return read_tnsr(params["input"])
    kind = params["kind"]
    dims = params["dims"] or (params["n"],) * params["d"]
    if kind == "identity":
        if len(set(dims)) != 1:
            raise ConfigError("identity tensors need equal dimensions")
        return identity_tensor(dims[0], len(dims))
    if kind == "uniform":
        return uniform_tensor(dims, params["seed"])
    if kind == "random_tt":
        return random_tt_init(dims, params["tt_rank"], params["seed"])
    raise ConfigError(f"unknown tensor kind {kind!r}")


def _dense(params) -> np.ndarray:
    t = _tensor(params)
    return tt_to_dense(t) if isinstance(t, TTTensor) else t


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_approx(params) -> str:
    a = _dense(params)
    cfg = APConfig(params["rank"], params["max_iter"], params["conv_tol"],
                   params["slack"], params["seed"])
    report, witness = binary_search_epsilon(a, cfg, params["restarts"])
    if params["format"] == "tnsr":
        return dumps(tt_to_dense(witness))
    header = ["rank", "seed", "epsilon", "residual_max", "iterations", "converged"]
    row = [report.rank, report.seed, _fmt(report.epsilon_achieved), _fmt(report.residual_max),
           report.iterations_used, str(report.converged).lower()]
    return _csv_text(header, [row])


def cmd_sketch(params) -> str:
    if not params["input"] and params["kind"] == "identity":
        dims = params["dims"] or (params["n"],) * params["d"]
        if len(set(dims)) != 1:
            raise ConfigError("identity tensors need equal dimensions")
        tt = identity_tt(dims[0], len(dims))
    else:
        t = _tensor(params)
        tt = t if isinstance(t, TTTensor) else tt_svd(t)
    config = SketchConfig(params["rank"], params["distribution"], params["seed"], params["eta"])
    report = sketch_error_report(tt, config, params["trials"])
    rows = [[r["trial"], _fmt(r["max_error"]), _fmt(r["gamma_bound"]), _fmt(r["implied_epsilon"])]
            for r in report.rows()]
    return _csv_text(["trial", "max_error", "gamma_bound", "implied_epsilon"], rows)


def cmd_coherence(params) -> str:
    a = _dense(params)
    profile = tt_core_coherences(a, params["norm"])
    r, bound, best_t = coherence_error_bound(a, params["epsilon"], params["c_d"], profile)
    rows = [["tt_rank", s + 1, v] for s, v in enumerate(profile.ranks)]
    rows += [["left_coherence", s + 1, _fmt(v)] for s, v in enumerate(profile.left)]
    rows += [["right_coherence", s + 2, _fmt(v)] for s, v in enumerate(profile.right)]
    rows += [["unfolding_spectral_norm", t + 1, _fmt(v)]
             for t, v in enumerate(profile.unfolding_spectral)]
    rows += [["gamma_bound", t, _fmt(gamma_bound_via_coherence(a, t, profile))]
             for t in range(1, a.ndim + 1)]
    rows += [["rank_bound", "", r], ["error_bound", best_t, _fmt(bound)]]
    return _csv_text(["quantity", "position", "value"], rows)


def cmd_bounds(params) -> str:
    dims = params["dims"]
    rows = []
    for eps in params["epsilon"]:
        if len(dims) == 2:
            rows.append(["matrix", "x".join(map(str, dims)), _fmt(eps), _fmt(9),
                         rank_bound_matrix(dims[0], dims[1], eps)])
        rows.append(["tt", "x".join(map(str, dims)), _fmt(eps), _fmt(params["c_d"]),
                     rank_bound_tt(dims, eps, params["c_d"])])
    return _csv_text(["bound", "dims", "epsilon", "constant", "rank"], rows)


def cmd_experiment(params) -> str:
    grid = ExperimentGrid(
        orders=params["orders"], sizes=params["sizes"], ranks=params["ranks"],
        kinds=params["kinds"], repetitions=params["repetitions"], base_seed=params["seed"],
        restarts=params["restarts"], max_iter=params["max_iter"], conv_tol=params["conv_tol"],
        slack=params["slack"], workers=params["workers"], timing=params["timing"],
    )
    results = run_grid(grid)
    if params["plots"]:
        for plot in emit_plots(results, params["plots"]):
            print(f"wrote {plot.path}", file=sys.stderr)
    if params["fit"]:
        for kind in grid.kinds:
            for d in grid.orders:
                try:
                    fit = fit_rates(results, kind, d)
                except ValueError as exc:
                    print(f"fit {kind} d={d}: {exc}", file=sys.stderr)
                    continue
                print(f"fit {kind} d={d}: alpha={fit.alpha:.4f} beta={fit.beta:.4f} "
                      f"residual={fit.residual:.3e}", file=sys.stderr)
    return grid_csv(results)


def cmd_verify(params) -> str:
    results = run_suites(params["suites"], seed=params["seed"])
    text = "\n".join(r.line() for r in results) + "\n"
    if not all(r.passed for r in results):
        raise VerificationFailed(text)
    return text


COMMANDS = {
    "approx": (cmd_approx, "max-norm TT approximation error by alternating projections"),
    "sketch": (cmd_sketch, "entrywise error of random TT sketches"),
    "coherence": (cmd_coherence, "TT core coherences and the error bound they imply"),
    "bounds": (cmd_bounds, "rank bounds for a target entrywise accuracy"),
    "experiment": (cmd_experiment, "grid of approximation experiments as CSV"),
    "verify": (cmd_verify, "brute-force checks of the index identities"),
}

_FLAG_TYPES = {int: int, float: float, str: str, _ints: _ints, _floats: _floats,
               _words: _words, _bool: _bool, _opt_floats: _opt_floats}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttmax", description="Tensor-train approximation in the maximum norm.",
        epilog="Exit status: 0 success, 2 invalid configuration, 3 numerical failure.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="file of key = value lines")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "tnsr"), default="csv")
        for key, (convert, default) in SCHEMAS[name].items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=_FLAG_TYPES[convert],
                           default=None, help=f"default: {default}")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        config = read_config(args.config) if args.config else {}
        seed = args.seed
        if seed is None:
            seed = int(config.pop("seed", 0))
        else:
            config.pop("seed", None)
        params = resolve(args.command, config, vars(args))
        params["seed"] = seed
        params["format"] = args.format
        if args.format == "tnsr" and args.command != "approx":
            raise ConfigError("--format tnsr applies to approx only")
        text = func(params)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"ttmax: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationFailed as exc:
        print(str(exc), end="")
        return EXIT_NUMERIC
    except (FloatingPointError, np.linalg.LinAlgError, MemoryError) as exc:
        print(f"ttmax: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
