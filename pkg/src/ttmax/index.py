"""Partial indices and partial arrays over subsets of dimensions.

This is the combinatorial toolkit behind the moment bounds for the random
quadratic form: partial indices with join, concatenation and the rank/index
product; partial arrays with partial traces, partial Frobenius norms and the
partition norms; and the structured arrays ``Phi`` and ``Psi`` of a matrix
chain.

Dimension labels and index values are one-based, matching the combinatorial
notation (``omega`` ranges over ``1..N`` and ``i_omega`` over
``1..m_omega``).  A doubled set ``Omega (+) Omega`` lives in ``1..2N`` with
the second copy shifted by ``N``.

Storage of a partial array follows the sorted domain: one numpy axis per
member of the domain, largest label last, C order.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from more_itertools import set_partitions

__all__ = [
    "DimSubset",
    "PartialIndex",
    "PartialArray",
    "Partition",
    "restrict",
    "join",
    "concat",
    "kron_index",
    "kron_extents",
    "doubled",
    "all_indices",
    "partitions",
    "partial_trace",
    "partial_frobenius",
    "partition_norm",
    "theta_weights",
    "cell_domains",
    "collapse_chain",
    "build_phi",
    "build_psi",
    "eval_quadratic_form",
    "quadratic_form_index_sum",
    "cauchy_schwarz_check",
]


@dataclass(frozen=True)
class DimSubset:
    """Sorted subset ``members`` of ``{1, ..., ambient}``."""

    ambient: int
    members: tuple[int, ...] = ()

    def __post_init__(self):
        members = tuple(sorted(set(int(w) for w in self.members)))
        if self.ambient < 0:
            raise ValueError("ambient dimension count must be nonnegative")
        for w in members:
            if not 1 <= w <= self.ambient:
                raise ValueError(f"member {w} outside [1, {self.ambient}]")
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, n: int) -> "DimSubset":
        return cls(n, tuple(range(1, n + 1)))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, w):
        return w in self.members

    def _same_ambient(self, other: "DimSubset"):
        if self.ambient != other.ambient:
            raise ValueError(f"ambient mismatch: {self.ambient} vs {other.ambient}")

    def issubset(self, other: "DimSubset") -> bool:
        return set(self.members) <= set(other.members)

    def __or__(self, other: "DimSubset") -> "DimSubset":
        self._same_ambient(other)
        return DimSubset(self.ambient, self.members + other.members)

    def __sub__(self, other: "DimSubset") -> "DimSubset":
        self._same_ambient(other)
        return DimSubset(self.ambient, tuple(set(self.members) - set(other.members)))

    def complement(self) -> "DimSubset":
        return DimSubset.full(self.ambient) - self

    def oplus(self, other: "DimSubset") -> "DimSubset":
        """``self (+) other = self U (other + N)`` inside ``[2N]``."""
        self._same_ambient(other)
        n = self.ambient
        return DimSubset(2 * n, self.members + tuple(w + n for w in other.members))


def doubled(omega: DimSubset) -> DimSubset:
    return omega.oplus(omega)


@dataclass(frozen=True)
class PartialIndex:
    """Map from a subset of ``[ambient]`` to positive integers."""

    ambient: int
    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        items = tuple(sorted((int(w), int(v)) for w, v in dict(self.items).items()))
        for w, v in items:
            if not 1 <= w <= self.ambient:
                raise ValueError(f"dimension {w} outside [1, {self.ambient}]")
            if v < 1:
                raise ValueError(f"index values are one-based, got {v} at {w}")
        object.__setattr__(self, "items", items)

    @classmethod
    def of(cls, ambient: int, mapping: Mapping[int, int] | None = None) -> "PartialIndex":
        return cls(ambient, tuple((mapping or {}).items()))

    @property
    def domain(self) -> DimSubset:
        return DimSubset(self.ambient, tuple(w for w, _ in self.items))

    def as_dict(self) -> dict[int, int]:
        return dict(self.items)

    def __getitem__(self, w: int) -> int:
        return dict(self.items)[w]

    def within(self, extents: Sequence[int]) -> bool:
        return all(v <= extents[w - 1] for w, v in self.items)

    def offsets(self) -> tuple[int, ...]:
        """Zero-based positions in sorted-domain order, for array access."""
        return tuple(v - 1 for _, v in self.items)


def restrict(i: PartialIndex, sub: DimSubset | Iterable[int]) -> PartialIndex:
    sub = set(sub)
    values = i.as_dict()
    if not sub <= set(values):
        raise ValueError(f"{sorted(sub)} is not contained in the domain {sorted(values)}")
    return PartialIndex.of(i.ambient, {w: values[w] for w in sub})


def join(i: PartialIndex, j: PartialIndex) -> PartialIndex:
    if i.ambient != j.ambient:
        raise ValueError(f"ambient mismatch: {i.ambient} vs {j.ambient}")
    a, b = i.as_dict(), j.as_dict()
    if set(a) & set(b):
        raise ValueError(f"domains overlap at {sorted(set(a) & set(b))}")
    return PartialIndex.of(i.ambient, {**a, **b})


def concat(i: PartialIndex, j: PartialIndex) -> PartialIndex:
    """Index on ``dom(i) (+) dom(j)`` inside ``[2N]``."""
    if i.ambient != j.ambient:
        raise ValueError(f"ambient mismatch: {i.ambient} vs {j.ambient}")
    n = i.ambient
    out = i.as_dict()
    out.update({w + n: v for w, v in j.items})
    return PartialIndex.of(2 * n, out)


def kron_extents(r: Sequence[int], k: Sequence[int]) -> tuple[int, ...]:
    if len(r) != len(k):
        raise ValueError("extent tuples differ in length")
    return tuple(a * b for a, b in zip(r, k))


def kron_index(alpha: PartialIndex, i: PartialIndex, k: Sequence[int]) -> PartialIndex:
    """Product index with components ``i_w + (alpha_w - 1) k_w``."""
    if alpha.domain != i.domain:
        raise ValueError(f"domain mismatch: {alpha.domain.members} vs {i.domain.members}")
    a = alpha.as_dict()
    return PartialIndex.of(i.ambient, {w: v + (a[w] - 1) * k[w - 1] for w, v in i.items})


def all_indices(extents: Sequence[int], sub: DimSubset | Iterable[int]) -> Iterator[PartialIndex]:
    """Every partial index on ``sub`` with values bounded by ``extents``."""
    members = sorted(sub)
    n = len(extents)
    for values in itertools.product(*(range(1, extents[w - 1] + 1) for w in members)):
        yield PartialIndex.of(n, dict(zip(members, values)))


@dataclass(frozen=True)
class Partition:
    """Partition of a finite set of dimension labels into nonempty cells."""

    cells: tuple[frozenset, ...]

    def __post_init__(self):
        cells = tuple(sorted((frozenset(int(w) for w in c) for c in self.cells),
                             key=lambda c: sorted(c)))
        seen: set[int] = set()
        for c in cells:
            if not c:
                raise ValueError("partition cells must be nonempty")
            if seen & c:
                raise ValueError(f"cells overlap at {sorted(seen & c)}")
            seen |= c
        object.__setattr__(self, "cells", cells)

    @classmethod
    def of(cls, *cells: Iterable[int]) -> "Partition":
        return cls(tuple(frozenset(c) for c in cells))

    @property
    def ground(self) -> frozenset:
        return frozenset().union(*self.cells)

    def __len__(self):
        return len(self.cells)


def partitions(ground: Iterable[int], k: int | None = None) -> Iterator[Partition]:
    """All partitions of ``ground`` (into exactly ``k`` cells if given)."""
    ground = sorted(ground)
    if not ground:
        if k in (None, 0):
            yield Partition(())
        return
    for cells in set_partitions(ground, k):
        yield Partition(tuple(frozenset(c) for c in cells))


@dataclass(frozen=True, eq=False)
class PartialArray:
    """Real values on all partial indices of ``domain`` bounded by ``extents``.

    ``extents`` covers the whole ambient set; only the entries for members of
    ``domain`` affect the stored values.
    """

    extents: tuple[int, ...]
    domain: DimSubset
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        extents = tuple(int(m) for m in self.extents)
        if len(extents) != self.domain.ambient:
            raise ValueError("extents must cover the ambient dimension set")
        values = np.array(self.values, dtype=float)
        expected = tuple(extents[w - 1] for w in self.domain)
        if values.shape != expected:
            raise ValueError(f"values have shape {values.shape}, expected {expected}")
        values.setflags(write=False)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, extents: Sequence[int], domain: DimSubset) -> "PartialArray":
        return cls(tuple(extents), domain, np.zeros([extents[w - 1] for w in domain]))

    def __getitem__(self, i: PartialIndex) -> float:
        if i.domain != self.domain:
            raise KeyError(f"index domain {i.domain.members} != {self.domain.members}")
        return float(self.values[i.offsets()])

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.values.ravel()))

    def allclose(self, other: "PartialArray", rtol=1e-12, atol=1e-12) -> bool:
        return (self.domain == other.domain
                and all(self.extents[w - 1] == other.extents[w - 1] for w in self.domain)
                and np.allclose(self.values, other.values, rtol=rtol, atol=atol))


def _base_of_doubled(c: PartialArray) -> DimSubset:
    n2 = c.domain.ambient
    if n2 % 2:
        raise ValueError("a doubled array lives on an even ambient set")
    n = n2 // 2
    lower = tuple(w for w in c.domain if w <= n)
    upper = tuple(w - n for w in c.domain if w > n)
    if lower != upper:
        raise ValueError(f"domain {c.domain.members} is not of the form Omega (+) Omega")
    if tuple(c.extents[:n]) != tuple(c.extents[n:]):
        raise ValueError("extents of a doubled array must repeat")
    return DimSubset(n, lower)


def partial_trace(c: PartialArray, sub: DimSubset | Iterable[int]) -> PartialArray:
    """Sum ``c`` over matched index pairs ``(w, w + N)`` for ``w`` in ``sub``."""
    omega = _base_of_doubled(c)
    n = omega.ambient
    sub = sorted(set(sub))
    if not set(sub) <= set(omega):
        raise ValueError(f"{sub} is not contained in {omega.members}")
    labels = list(c.domain)
    values = np.asarray(c.values)
    for w in sub:
        p, q = labels.index(w), labels.index(w + n)
        values = np.trace(values, axis1=p, axis2=q)
        labels.remove(w)
        labels.remove(w + n)
    rest = omega - DimSubset(n, sub)
    return PartialArray(c.extents, doubled(rest), values)


def partial_frobenius(d: PartialArray, sub: DimSubset | Iterable[int]) -> PartialArray:
    """Root of the sum of squares over the dimensions in ``sub``.

    Over the empty set this gives the entrywise absolute value.
    """
    sub = sorted(set(sub))
    if not set(sub) <= set(d.domain):
        raise ValueError(f"{sub} is not contained in {d.domain.members}")
    labels = list(d.domain)
    axes = tuple(labels.index(w) for w in sub)
    values = np.sqrt(np.sum(np.square(d.values), axis=axes)) if axes else np.abs(d.values)
    rest = d.domain - DimSubset(d.domain.ambient, sub)
    return PartialArray(d.extents, rest, values)


def _letters(count: int) -> str:
    pool = string.ascii_letters
    if count > len(pool):
        raise ValueError("too many dimensions for einsum")
    return pool[:count]


def partition_norm(c: PartialArray, pi: Partition, restarts: int = 32,
                   seed: int = 0, max_sweeps: int = 500, tol: float = 1e-14) -> float:
    """Lower bound on the partition norm ``||c||_pi``.

    The supremum over unit test arrays, one per cell, is approached by
    alternating maximization (each step is an exact maximization over one
    cell).  The best of a deterministic start and ``restarts`` random starts
    is returned; the value is attained by feasible test arrays, so it never
    exceeds the true norm.  For the single-cell partition the Frobenius norm
    is returned exactly.
    """
    labels = list(c.domain)
    if pi.ground != frozenset(labels):
        raise ValueError(f"partition ground {sorted(pi.ground)} != domain {labels}")
    if len(pi) <= 1:
        return c.frobenius()

    letters = _letters(len(labels))
    letter = dict(zip(labels, letters))
    cell_subs = ["".join(letter[w] for w in sorted(cell)) for cell in pi.cells]
    cell_shapes = [tuple(c.extents[w - 1] for w in sorted(cell)) for cell in pi.cells]
    full_sub = "".join(letters)
    C = np.asarray(c.values)

    def contract_except(z, t):
        ops = [C] + [z[u] for u in range(len(z)) if u != t]
        subs = [full_sub] + [cell_subs[u] for u in range(len(z)) if u != t]
        return np.einsum(",".join(subs) + "->" + cell_subs[t], *ops, optimize=True)

    def objective(z):
        return float(np.einsum(",".join([full_sub] + cell_subs) + "->", C, *z, optimize=True))

    def climb(z):
        value = objective(z)
        for _ in range(max_sweeps):
            for t in range(len(z)):
                g = contract_except(z, t)
                norm = np.linalg.norm(g)
                if norm > 0:
                    z[t] = g / norm
            new = objective(z)
            if abs(new - value) <= tol * max(abs(new), 1.0):
                value = new
                break
            value = new
        return abs(value)

    def unit(x):
        norm = np.linalg.norm(x)
        return x / norm if norm > 0 else x

    # deterministic start: leading left singular vector of each cell matricization
    starts = []
    z0 = []
    for t, cell in enumerate(pi.cells):
        axes = [labels.index(w) for w in sorted(cell)]
        others = [a for a in range(len(labels)) if a not in axes]
        mat = np.transpose(C, axes + others).reshape(prod(cell_shapes[t]), -1)
        u, _, _ = np.linalg.svd(mat, full_matrices=False)
        z0.append(u[:, 0].reshape(cell_shapes[t]))
    starts.append(z0)
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        starts.append([unit(rng.standard_normal(shape)) for shape in cell_shapes])
    return max(climb(list(z)) for z in starts)


def theta_weights(pi: Partition, n_dims: int) -> tuple[dict[int, float], float]:
    """Pairing weights of a partition of a doubled set ``Omega (+) Omega``.

    ``theta[w] = 1/2`` when ``w`` and ``w + N`` share a cell, else 0; the
    second value is their sum.
    """
    omega = sorted(w for w in pi.ground if w <= n_dims)
    if sorted(w - n_dims for w in pi.ground if w > n_dims) != omega:
        raise ValueError("partition ground is not a doubled set")
    cell_of = {w: t for t, cell in enumerate(pi.cells) for w in cell}
    theta = {w: 0.5 if cell_of[w] == cell_of[w + n_dims] else 0.0 for w in omega}
    return theta, sum(theta.values())


def cell_domains(omega: DimSubset, pi: Partition) -> list[DimSubset]:
    """Projections ``(cell U (cell - N)) & Omega`` of each cell onto ``Omega``."""
    n = omega.ambient
    out = []
    for cell in pi.cells:
        members = {w if w <= n else w - n for w in cell} & set(omega)
        out.append(DimSubset(n, tuple(members)))
    return out


def collapse_chain(w: Sequence[np.ndarray], omega: DimSubset) -> list[np.ndarray]:
    """Merge a chain ``W_1..W_d`` around the kept dimensions ``omega``.

    Dimension ``s`` sits between ``W_s`` and ``W_{s+1}``; tracing it out
    multiplies the two neighbours.  Returns ``|omega| + 1`` matrices.
    """
    if omega.ambient != len(w) - 1:
        raise ValueError("omega must be a subset of [d-1] for a chain of d matrices")
    cuts = [0] + list(omega) + [len(w)]
    return [np.linalg.multi_dot([np.eye(w[lo].shape[0])] + list(w[lo:hi]))
            for lo, hi in zip(cuts[:-1], cuts[1:])]


def _chain_extents(omega: DimSubset, w: Sequence[np.ndarray]) -> dict[int, int]:
    q = len(omega)
    if len(w) != q + 1:
        raise ValueError(f"need {q + 1} matrices for |Omega| = {q}, got {len(w)}")
    w = [np.atleast_2d(m) for m in w]
    if w[0].shape[0] != 1 or w[-1].shape[1] != 1:
        raise ValueError("chain must start with a row and end with a column")
    for t in range(q):
        if w[t].shape[1] != w[t + 1].shape[0]:
            raise ValueError(f"matrices {t + 1} and {t + 2} do not chain: "
                             f"{w[t].shape} vs {w[t + 1].shape}")
    return {om: w[t].shape[1] for t, om in enumerate(omega)}


def _phi_values(omega: DimSubset, w: Sequence[np.ndarray]) -> np.ndarray:
    q = len(omega)
    w = [np.atleast_2d(np.asarray(m, dtype=float)) for m in w]
    if q == 0:
        return np.array(w[0][0, 0])
    i_l, j_l = _letters(2 * q)[:q], _letters(2 * q)[q:]
    subs = [i_l[0]] + [j_l[t - 1] + i_l[t] for t in range(1, q)] + [j_l[q - 1]]
    ops = [w[0][0]] + w[1:q] + [w[q][:, 0]]
    return np.einsum(",".join(subs) + "->" + i_l + j_l, *ops)


def build_phi(omega: DimSubset, w: Sequence[np.ndarray],
              extents: Sequence[int] | None = None) -> PartialArray:
    """``Phi_Omega``: entry at ``i ++ j`` is ``W_1(1,i_1) W_2(j_1,i_2) ... W_q+1(j_q,1)``."""
    k = _chain_extents(omega, w)
    n = omega.ambient
    ext = list(extents) if extents is not None else [k.get(s, 1) for s in range(1, n + 1)]
    for s, ks in k.items():
        if ext[s - 1] != ks:
            raise ValueError(f"extent of dimension {s} is {ext[s - 1]}, chain gives {ks}")
    return PartialArray(tuple(ext) * 2, doubled(omega), _phi_values(omega, w))


def build_psi(omega: DimSubset, ranks: Sequence[int], w: Sequence[np.ndarray],
              extents: Sequence[int] | None = None) -> PartialArray:
    """``Psi_Omega``: ``Phi_Omega`` spread over the product extents ``r * k``.

    The entry at ``(alpha * i) ++ (beta * j)`` is ``Phi[i ++ j]`` times
    ``prod delta(alpha_w, beta_w)``.
    """
    phi = build_phi(omega, w, extents)
    n = omega.ambient
    if len(ranks) != n or min(ranks) < 1:
        raise ValueError("ranks must be positive and cover the ambient dimensions")
    q = len(omega)
    k = phi.extents[:n]
    ext = kron_extents(ranks, k)
    if q == 0:
        return PartialArray(ext * 2, doubled(omega), phi.values)
    letters = _letters(4 * q)
    i_l, j_l, a_l, b_l = (letters[t * q:(t + 1) * q] for t in range(4))
    subs = [i_l + j_l] + [a_l[t] + b_l[t] for t in range(q)]
    out = "".join(a_l[t] + i_l[t] for t in range(q)) + "".join(b_l[t] + j_l[t] for t in range(q))
    eyes = [np.eye(ranks[om - 1]) for om in omega]
    values = np.einsum(",".join(subs) + "->" + out, phi.values, *eyes)
    shape = [ext[om - 1] for om in omega] * 2
    return PartialArray(ext * 2, doubled(omega), values.reshape(shape))


def eval_quadratic_form(w: Sequence[np.ndarray], r_mats: Sequence[np.ndarray]) -> float:
    """``(W_1 R_1)(R_1^T W_2 R_2) ... (R_{d-1}^T W_d)``."""
    w = [np.atleast_2d(np.asarray(m, dtype=float)) for m in w]
    r_mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in r_mats]
    if len(r_mats) != len(w) - 1:
        raise ValueError(f"need {len(w) - 1} sketch matrices, got {len(r_mats)}")
    if w[0].shape[0] != 1 or w[-1].shape[1] != 1:
        raise ValueError("chain must start with a row and end with a column")
    factors = []
    for s, r in enumerate(r_mats):
        if w[s].shape[1] != r.shape[0] or w[s + 1].shape[0] != r.shape[0]:
            raise ValueError(f"sketch {s + 1} of shape {r.shape} does not fit the chain")
        factors += [w[s], r, r.T]
    factors.append(w[-1])
    return float(np.linalg.multi_dot(factors)[0, 0])


def quadratic_form_index_sum(w: Sequence[np.ndarray], r_mats: Sequence[np.ndarray]) -> float:
    """The quadratic form as an explicit sum over the entries of ``Psi``.

    Brute force over every ``alpha, beta, i, j``; only for small chains.
    """
    w = [np.atleast_2d(np.asarray(m, dtype=float)) for m in w]
    r_mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in r_mats]
    n = len(w) - 1
    omega = DimSubset.full(n)
    k = tuple(r.shape[0] for r in r_mats)
    ranks = tuple(r.shape[1] for r in r_mats)
    psi = build_psi(omega, ranks, w)
    total = 0.0
    for i, j in itertools.product(list(all_indices(k, omega)), repeat=2):
        for alpha, beta in itertools.product(list(all_indices(ranks, omega)), repeat=2):
            entry = psi[concat(kron_index(alpha, i, k), kron_index(beta, j, k))]
            if entry == 0.0:
                continue
            weight = 1.0
            for s in range(1, n + 1):
                weight *= (r_mats[s - 1][i[s] - 1, alpha[s] - 1]
                           * r_mats[s - 1][j[s] - 1, beta[s] - 1])
            total += entry * weight
    return total


def cauchy_schwarz_check(omega: DimSubset, pi: Partition,
                         arrays: Sequence[PartialArray],
                         extents: Sequence[int]) -> tuple[float, float]:
    """Both sides of the cell-wise Cauchy-Schwarz bound.

    Returns ``(lhs, rhs)`` with
    ``lhs = sum_i prod_tau C_tau[i restricted to Omega_tau]`` and
    ``rhs = prod_w m_w**theta_w * prod_tau ||C_tau||_F``.
    """
    n = omega.ambient
    if pi.ground != frozenset(doubled(omega)):
        raise ValueError("pi must partition Omega (+) Omega")
    domains = cell_domains(omega, pi)
    if len(arrays) != len(domains):
        raise ValueError(f"need one array per cell ({len(domains)}), got {len(arrays)}")
    letter = dict(zip(omega, _letters(len(omega))))
    subs = []
    for arr, dom in zip(arrays, domains):
        if arr.domain != dom:
            raise ValueError(f"array on {arr.domain.members} does not match cell domain {dom.members}")
        if any(arr.extents[w - 1] != extents[w - 1] for w in dom):
            raise ValueError("array extents do not match")
        subs.append("".join(letter[w] for w in dom))
    lhs = float(np.einsum(",".join(subs) + "->", *(a.values for a in arrays)))
    theta, _ = theta_weights(pi, n)
    rhs = prod(extents[w - 1] ** theta[w] for w in omega) * prod(a.frobenius() for a in arrays)
    return lhs, float(rhs)
