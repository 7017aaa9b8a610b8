"""Brute-force checks of the partial-index identities and quadratic-form structure.

Every check compares the library operation against an independent
evaluation: explicit folds over indices, explicit sums over enumerated
indices, or dense matrix products.  The suites are small enough to run
exhaustively in seconds.
"""

from __future__ import annotations

import functools
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .index import (
    DimSubset,
    PartialArray,
    PartialIndex,
    Partition,
    all_indices,
    build_phi,
    build_psi,
    cauchy_schwarz_check,
    cell_domains,
    collapse_chain,
    concat,
    doubled,
    eval_quadratic_form,
    join,
    kron_extents,
    kron_index,
    partial_frobenius,
    partial_trace,
    partitions,
    quadratic_form_index_sum,
    restrict,
    theta_weights,
)

__all__ = [
    "CheckResult",
    "check_join",
    "check_kron_join",
    "check_kron_concat",
    "check_trace_frobenius",
    "check_cauchy_schwarz",
    "check_pair_count",
    "check_quadratic_form",
    "check_trace_identities",
    "trace_oracle",
    "frobenius_oracle",
    "random_chain",
    "run_suites",
    "SUITES",
]


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: int = 0
    max_error: float = 0.0
    seconds: float = 0.0
    examples: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failures == 0

    def record(self, ok: bool, error: float = 0.0, detail: str = "") -> None:
        self.cases += 1
        self.max_error = max(self.max_error, float(error))
        if not ok:
            self.failures += 1
            if len(self.examples) < 5:
                self.examples.append(detail)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.cases} cases, {self.failures} failures, "
                f"max error {self.max_error:.2e}, {self.seconds:.2f} s")


def _timed(name: str):
    def wrap(fn: Callable[..., CheckResult]):
        @functools.wraps(fn)
        def run(*args, **kwargs) -> CheckResult:
            start = time.perf_counter()
            res = fn(CheckResult(name), *args, **kwargs)
            res.seconds = time.perf_counter() - start
            return res
        return run
    return wrap


def _subsets(ground: Sequence[int]):
    for size in range(len(ground) + 1):
        yield from itertools.combinations(ground, size)


def _disjoint_pairs(ground: Sequence[int]):
    """Every ordered pair of disjoint subsets (each element: left, right or neither)."""
    for labels in itertools.product((0, 1, 2), repeat=len(ground)):
        yield (tuple(w for w, t in zip(ground, labels) if t == 1),
               tuple(w for w, t in zip(ground, labels) if t == 2))


def _fold(parts: Sequence[PartialIndex], ambient: int, right: bool) -> PartialIndex:
    acc = PartialIndex.of(ambient)
    for p in (reversed(parts) if right else parts):
        acc = join(p, acc) if right else join(acc, p)
    return acc


@_timed("join")
def check_join(res: CheckResult, n: int = 4, max_extent: int = 3) -> CheckResult:
    """Any fold order over the cells of any partition rebuilds the index."""
    extents = (max_extent,) * n
    for omega in _subsets(range(1, n + 1)):
        cells_list = list(partitions(omega)) if omega else [Partition(())]
        for i in all_indices(extents, omega):
            for pi in cells_list:
                parts = [restrict(i, cell) for cell in pi.cells]
                for order in itertools.permutations(parts):
                    for right in (False, True):
                        ok = _fold(order, n, right) == i
                        res.record(ok, detail=f"{i} over {pi}")
    return res


@_timed("kron-join")
def check_kron_join(res: CheckResult, r: Sequence[int] = (2, 3, 1, 2),
                    k: Sequence[int] = (3, 2, 2, 3)) -> CheckResult:
    n = len(r)
    for om1, om2 in _disjoint_pairs(range(1, n + 1)):
        for alpha, i in itertools.product(all_indices(r, om1), all_indices(k, om1)):
            left_a = kron_index(alpha, i, k)
            for beta, j in itertools.product(all_indices(r, om2), all_indices(k, om2)):
                lhs = join(left_a, kron_index(beta, j, k))
                rhs = kron_index(join(alpha, beta), join(i, j), k)
                ok = lhs == rhs and lhs.within(kron_extents(r, k))
                res.record(ok, detail=f"{alpha},{i},{beta},{j}")
    return res


@_timed("kron-concat")
def check_kron_concat(res: CheckResult, r: Sequence[int] = (2, 1, 1, 2),
                      k: Sequence[int] = (2, 2, 3, 1)) -> CheckResult:
    n = len(r)
    k2 = tuple(k) * 2
    doubled_ext = kron_extents(tuple(r) * 2, k2)
    subsets = list(_subsets(range(1, n + 1)))
    for om1, om2 in itertools.product(subsets, repeat=2):
        left = [(a, i, kron_index(a, i, k))
                for a, i in itertools.product(all_indices(r, om1), all_indices(k, om1))]
        right = [(b, j, kron_index(b, j, k))
                 for b, j in itertools.product(all_indices(r, om2), all_indices(k, om2))]
        for (a, i, ai), (b, j, bj) in itertools.product(left, right):
            lhs = concat(ai, bj)
            rhs = kron_index(concat(a, b), concat(i, j), k2)
            ok = lhs == rhs and lhs.within(doubled_ext)
            res.record(ok, detail=f"{a},{i},{b},{j}")
    return res


def trace_oracle(c: PartialArray, sub: Sequence[int]) -> dict[tuple, float]:
    """Partial trace by explicit summation over matched index pairs."""
    n = c.domain.ambient // 2
    ext = c.extents[:n]
    omega = [w for w in c.domain if w <= n]
    rest = [w for w in omega if w not in set(sub)]
    out = {}
    for i, j in itertools.product(list(all_indices(ext, rest)), repeat=2):
        out[(i, j)] = sum(c[concat(join(i, l), join(j, l))] for l in all_indices(ext, sub))
    return out


def frobenius_oracle(d: PartialArray, sub: Sequence[int]) -> dict[PartialIndex, float]:
    """Partial Frobenius norm by explicit summation."""
    rest = [w for w in d.domain if w not in set(sub)]
    out = {}
    for i in all_indices(d.extents, rest):
        out[i] = math.sqrt(sum(d[join(i, j)] ** 2 for j in all_indices(d.extents, sub)))
    return out


def _random_partial(rng, extents, domain: DimSubset) -> PartialArray:
    shape = [extents[w - 1] for w in domain]
    return PartialArray(tuple(extents), domain, rng.standard_normal(shape))


@_timed("trace-frobenius")
def check_trace_frobenius(res: CheckResult, extents: Sequence[int] = (3, 2, 3, 2),
                          seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    n = len(extents)
    for omega_t in _subsets(range(1, n + 1)):
        omega = DimSubset(n, omega_t)
        c = _random_partial(rng, tuple(extents) * 2, doubled(omega))
        d = _random_partial(rng, extents, omega)
        for om1, om2 in _disjoint_pairs(omega_t):
            both = tuple(sorted(om1 + om2))
            combined = partial_trace(c, both)
            oracle = trace_oracle(c, both)
            err = max(abs(combined[concat(i, j)] - v) for (i, j), v in oracle.items())
            a12 = partial_trace(partial_trace(c, om1), om2)
            a21 = partial_trace(partial_trace(c, om2), om1)
            err = max(err, np.max(np.abs(a12.values - combined.values)),
                      np.max(np.abs(a21.values - combined.values)))
            res.record(err <= 1e-12, err, f"trace {omega_t} {om1} {om2}")
            combined = partial_frobenius(d, both)
            oracle = frobenius_oracle(d, both)
            err = max(abs(combined[i] - v) for i, v in oracle.items())
            f12 = partial_frobenius(partial_frobenius(d, om1), om2)
            f21 = partial_frobenius(partial_frobenius(d, om2), om1)
            err = max(err, np.max(np.abs(f12.values - combined.values)),
                      np.max(np.abs(f21.values - combined.values)))
            res.record(err <= 1e-12, err, f"frobenius {omega_t} {om1} {om2}")
    return res


@_timed("cauchy-schwarz")
def check_cauchy_schwarz(res: CheckResult, max_size: int = 3,
                         extents: Sequence[int] = (3, 2, 3), trials: int = 3,
                         seed: int = 0) -> CheckResult:
    """``lhs <= rhs`` for every partition of ``Omega (+) Omega``.

    Nonnegative arrays are used since negative entries only shrink the left
    side; the all-ones arrays are included as the extremal case.
    """
    rng = np.random.default_rng(seed)
    n = len(extents)
    for size in range(1, max_size + 1):
        for omega_t in itertools.combinations(range(1, n + 1), size):
            omega = DimSubset(n, omega_t)
            for pi in partitions(doubled(omega)):
                domains = cell_domains(omega, pi)
                for t in range(trials + 1):
                    arrays = []
                    for dom in domains:
                        shape = [extents[w - 1] for w in dom]
                        vals = np.ones(shape) if t == 0 else np.abs(rng.standard_normal(shape))
                        arrays.append(PartialArray(tuple(extents), dom, vals))
                    lhs, rhs = cauchy_schwarz_check(omega, pi, arrays, extents)
                    slack = lhs - rhs
                    res.record(slack <= 1e-12 * max(1.0, abs(rhs)), max(slack, 0.0),
                               f"{omega_t} {pi}")
    return res


@_timed("pair-count")
def check_pair_count(res: CheckResult, max_size: int = 3) -> CheckResult:
    """``2 Theta <= |Omega|`` up to ``|Omega|`` cells, ``2|Omega| - kappa`` beyond."""
    for size in range(1, max_size + 1):
        omega = DimSubset.full(size)
        for pi in partitions(doubled(omega)):
            _, theta = theta_weights(pi, size)
            kappa = len(pi)
            bound = size if kappa <= size else 2 * size - kappa
            res.record(2 * theta <= bound, detail=f"{pi}: 2 Theta = {2 * theta}, bound {bound}")
    return res


def random_chain(rng: np.random.Generator, ks: Sequence[int]) -> list[np.ndarray]:
    """Matrices ``W_1..W_d`` of sizes ``1 x k_1, k_1 x k_2, ..., k_{d-1} x 1``."""
    dims = (1,) + tuple(ks) + (1,)
    return [rng.standard_normal((dims[s], dims[s + 1])) for s in range(len(dims) - 1)]


@_timed("quadratic-form")
def check_quadratic_form(res: CheckResult, instances: int = 100, d: int = 3,
                         max_dim: int = 3, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        ks = rng.integers(1, max_dim + 1, size=d - 1)
        rs = rng.integers(1, max_dim + 1, size=d - 1)
        w = random_chain(rng, ks)
        r_mats = [rng.standard_normal((k, r)) for k, r in zip(ks, rs)]
        chain = eval_quadratic_form(w, r_mats)
        brute = quadratic_form_index_sum(w, r_mats)
        err = abs(chain - brute) / max(abs(brute), 1e-300)
        res.record(err <= 1e-12, err, f"k={ks}, r={rs}")
    return res


def _scaled(a: PartialArray, factor: float) -> PartialArray:
    return PartialArray(a.extents, a.domain, np.asarray(a.values) * factor)


def _rel_diff(a: PartialArray, b: PartialArray) -> float:
    if a.domain != b.domain:
        return math.inf
    if any(a.extents[w - 1] != b.extents[w - 1] for w in a.domain):
        return math.inf
    scale = max(1.0, float(np.max(np.abs(b.values))))
    return float(np.max(np.abs(np.asarray(a.values) - np.asarray(b.values)))) / scale


@_timed("trace-identities")
def check_trace_identities(res: CheckResult, chains: int = 100, max_dim: int = 3,
                           seed: int = 0) -> CheckResult:
    """Tracing a dimension merges neighbouring chain matrices (times ``r_s`` for Psi).

    Covers singleton traces and traces over every complement of a nonempty
    kept set, for chains of length 2 to 4.
    """
    rng = np.random.default_rng(seed)
    for c in range(chains):
        d = 2 + c % 3
        n = d - 1
        ks = tuple(int(x) for x in rng.integers(1, max_dim + 1, size=n))
        rs = tuple(int(x) for x in rng.integers(1, max_dim + 1, size=n))
        w = random_chain(rng, ks)
        full = DimSubset.full(n)
        phi = build_phi(full, w, ks)
        psi = build_psi(full, rs, w, ks)
        for s in range(1, n + 1):
            keep = full - DimSubset(n, (s,))
            merged = collapse_chain(w, keep)
            err = max(_rel_diff(partial_trace(phi, (s,)), build_phi(keep, merged, ks)),
                      _rel_diff(partial_trace(psi, (s,)),
                                _scaled(build_psi(keep, rs, merged, ks), rs[s - 1])))
            res.record(err <= 1e-12, err, f"singleton {s}, k={ks}, r={rs}")
        for keep_t in _subsets(range(1, n + 1)):
            if not keep_t:
                continue
            keep = DimSubset(n, keep_t)
            drop = tuple(full - keep)
            merged = collapse_chain(w, keep)
            factor = math.prod(rs[s - 1] for s in drop)
            err = max(_rel_diff(partial_trace(phi, drop), build_phi(keep, merged, ks)),
                      _rel_diff(partial_trace(psi, drop),
                                _scaled(build_psi(keep, rs, merged, ks), factor)))
            res.record(err <= 1e-12, err, f"keep {keep_t}, k={ks}, r={rs}")
    return res


SUITES: dict[str, Callable[[], CheckResult]] = {
    "join": check_join,
    "kron-join": check_kron_join,
    "kron-concat": check_kron_concat,
    "trace-frobenius": check_trace_frobenius,
    "cauchy-schwarz": check_cauchy_schwarz,
    "pair-count": check_pair_count,
    "quadratic-form": check_quadratic_form,
    "trace-identities": check_trace_identities,
}


_SEEDED = {"trace-frobenius", "cauchy-schwarz", "quadratic-form", "trace-identities"}


def run_suites(names: Sequence[str] | None = None, seed: int = 0) -> list[CheckResult]:
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; choose from {list(SUITES)}")
    return [SUITES[name](seed=seed) if name in _SEEDED else SUITES[name]()
            for name in names]
