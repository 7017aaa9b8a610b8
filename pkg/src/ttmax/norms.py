"""Factorization quasinorm bounds, coherences and rank/error bound formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .tensor import (
    DEFAULT_RANK_TOL,
    TTTensor,
    left_unfolding,
    orthogonalize_t,
    right_unfolding,
    tt_svd,
    unfold,
)

__all__ = [
    "CoherenceProfile",
    "DEFAULT_C_D",
    "ORTHO_TOL",
    "core_norm_f_inf",
    "gamma_tt_upper",
    "cp_to_tt",
    "gamma_cp_upper",
    "subspace_coherence",
    "block_coherence",
    "core_left_coherence",
    "core_right_coherence",
    "tt_core_coherences",
    "gamma_bound_via_coherence",
    "rank_bound_matrix",
    "rank_bound_tt",
    "coherence_error_bound",
]

#: Placeholder for the unknown constant in the TT rank bound.  It equals the
#: matrix constant 9 so that d = 2 agrees with the matrix formula.
DEFAULT_C_D = 9.0
ORTHO_TOL = 1e-8


def core_norm_f_inf(g: np.ndarray) -> float:
    """Largest Frobenius norm of a slice ``G[:, i, :]``."""
    g = np.asarray(g, dtype=float)
    return float(np.max(np.sqrt(np.sum(g * g, axis=(0, 2)))))


def gamma_tt_upper(tt: TTTensor) -> float:
    """Product of the core norms: an upper bound on the TT factorization quasinorm."""
    return float(prod(core_norm_f_inf(g) for g in tt.cores))


def _check_cp(factors):
    factors = [np.atleast_2d(np.asarray(c, dtype=float)) for c in factors]
    if len(factors) < 2:
        raise ValueError("need at least two CP factors")
    k = factors[0].shape[1]
    if any(c.shape[1] != k for c in factors):
        raise ValueError(f"CP factors need equal column counts, got {[c.shape[1] for c in factors]}")
    return factors, k


def cp_to_tt(factors: Sequence[np.ndarray]) -> TTTensor:
    """TT form of ``sum_a C_1(:, a) o ... o C_d(:, a)`` with diagonal interior slices."""
    factors, k = _check_cp(factors)
    cores = [factors[0][None, :, :]]
    for c in factors[1:-1]:
        g = np.zeros((k, c.shape[0], k))
        idx = np.arange(k)
        g[idx, :, idx] = c.T
        cores.append(g)
    cores.append(factors[-1].T[:, :, None])
    return TTTensor(cores)


def gamma_cp_upper(factors: Sequence[np.ndarray]) -> float:
    """Product of the largest row 2-norms of the CP factors."""
    factors, _ = _check_cp(factors)
    return float(prod(np.max(np.linalg.norm(c, axis=1)) for c in factors))


def _check_orthonormal(basis: np.ndarray, tol: float = ORTHO_TOL) -> np.ndarray:
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    q = basis.shape[1]
    if q > basis.shape[0]:
        raise ValueError("more basis vectors than the ambient dimension")
    dev = np.max(np.abs(basis.T @ basis - np.eye(q)))
    if dev > tol:
        raise ValueError(f"columns are not orthonormal (Gram deviation {dev:.2e})")
    return basis


def subspace_coherence(basis: np.ndarray) -> float:
    """``(m/q) max_i ||Q(i, :)||^2`` for an orthonormal ``m x q`` basis."""
    basis = _check_orthonormal(basis)
    m, q = basis.shape
    return float(m / q * np.max(np.sum(basis * basis, axis=1)))


def block_coherence(basis: np.ndarray, p: int, norm: str = "fro") -> float:
    """Coherence over consecutive row blocks of size ``p``.

    ``norm`` selects the unitarily invariant norm of the ``q x p`` block
    ``Q^T [e_{(i-1)p+1} ... e_{ip}]``: ``"fro"`` or ``"spectral"``.
    """
    basis = _check_orthonormal(basis)
    m, q = basis.shape
    if p < 1 or m % p:
        raise ValueError(f"block size {p} does not divide {m}")
    blocks = basis.reshape(m // p, p, q)
    if norm == "fro":
        sq = np.sum(blocks * blocks, axis=(1, 2))
    elif norm == "spectral":
        sq = np.array([np.linalg.norm(b, 2) ** 2 for b in blocks])
    else:
        raise ValueError(f"unknown norm selector {norm!r}")
    return float(m / q * np.max(sq))


def _orth_basis(mat: np.ndarray, rank: int) -> np.ndarray:
    u, _, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, :rank]


def core_left_coherence(g: np.ndarray, norm: str = "fro") -> float:
    """Block coherence of the column space of the left unfolding."""
    p, _, q = g.shape
    return block_coherence(_orth_basis(left_unfolding(g), q), p, norm)


def core_right_coherence(g: np.ndarray, norm: str = "fro") -> float:
    """Block coherence of the row space of the right unfolding.

    The right unfolding keeps the right rank index fastest, so its columns
    group into ``n_s`` consecutive blocks of size ``r_s``.
    """
    p, _, q = g.shape
    return block_coherence(_orth_basis(right_unfolding(g).T, p), q, norm)


@dataclass(frozen=True)
class CoherenceProfile:
    """TT core coherences and unfolding spectral norms of a tensor.

    ``left[s-1]`` is the left coherence of core ``s`` (s = 1..d-1),
    ``right[s-2]`` the right coherence of core ``s`` (s = 2..d), and
    ``unfolding_spectral[t-1]`` the spectral norm of the ``t``-th unfolding.
    """

    left: tuple[float, ...]
    right: tuple[float, ...]
    unfolding_spectral: tuple[float, ...]
    ranks: tuple[int, ...]
    shape: tuple[int, ...]


def tt_core_coherences(a: np.ndarray, norm: str = "fro",
                       tol: float = DEFAULT_RANK_TOL) -> CoherenceProfile:
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        raise ValueError("coherences are undefined for the zero tensor")
    left_tt = tt_svd(a, tol=tol)
    right_tt = orthogonalize_t(left_tt, 1, tol=tol)
    d = a.ndim
    return CoherenceProfile(
        left=tuple(core_left_coherence(left_tt.cores[s], norm) for s in range(d - 1)),
        right=tuple(core_right_coherence(right_tt.cores[s], norm) for s in range(1, d)),
        unfolding_spectral=tuple(float(np.linalg.norm(unfold(a, t), 2)) for t in range(1, d)),
        ranks=left_tt.ranks,
        shape=a.shape,
    )


def _core_factor_bound(profile: CoherenceProfile, t: int) -> float:
    n = profile.shape
    d = len(n)
    r = (1,) + profile.ranks + (1,)
    out = 1.0
    for s in range(1, t):
        out *= math.sqrt(r[s] / (n[s - 1] * r[s - 1]) * profile.left[s - 1])
    for s in range(t + 1, d + 1):
        out *= math.sqrt(r[s - 1] / (n[s - 1] * r[s]) * profile.right[s - 2])
    pivots = []
    if t < d:
        pivots.append(profile.unfolding_spectral[t - 1]
                      * math.sqrt(r[t] / (n[t - 1] * r[t - 1]) * profile.left[t - 1]))
    if t > 1:
        pivots.append(profile.unfolding_spectral[t - 2]
                      * math.sqrt(r[t - 1] / (n[t - 1] * r[t]) * profile.right[t - 2]))
    return out * min(pivots)


def gamma_bound_via_coherence(a: np.ndarray, t: int,
                              profile: CoherenceProfile | None = None) -> float:
    """Upper bound on the quasinorm from a minimal ``t``-orthogonal factorization.

    Orthogonal cores contribute ``sqrt(r_s / (n_s r_{s-1}) mu_<)`` (left) or
    ``sqrt(r_{s-1} / (n_s r_s) mu_>)`` (right) exactly; the pivot core is
    bounded through the spectral norm of a neighbouring unfolding.
    """
    a = np.asarray(a, dtype=float)
    if not 1 <= t <= a.ndim:
        raise ValueError(f"t must lie in [1, {a.ndim}], got {t}")
    profile = profile or tt_core_coherences(a)
    return _core_factor_bound(profile, t)


def _check_eps(epsilon: float):
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def rank_bound_matrix(n1: int, n2: int, epsilon: float) -> int:
    """``ceil(9 ln(3 n1 n2) / eps^2)``."""
    _check_eps(epsilon)
    return math.ceil(9 * math.log(3 * n1 * n2) / epsilon**2)


def rank_bound_tt(dims: Sequence[int], epsilon: float, c_d: float = DEFAULT_C_D) -> int:
    """``ceil(c_d / eps^2 * ln(2 e prod(n_s)))``."""
    _check_eps(epsilon)
    if c_d <= 0:
        raise ValueError("c_d must be positive")
    log_size = sum(math.log(n) for n in dims)
    return math.ceil(c_d / epsilon**2 * (math.log(2) + 1 + log_size))


def coherence_error_bound(a: np.ndarray, epsilon: float, c_d: float = DEFAULT_C_D,
                          profile: CoherenceProfile | None = None):
    """Rank and entrywise error guaranteed through the TT core coherences.

    Returns ``(r, bound, best_t)`` where ``bound`` is
    ``eps / sqrt(n_1...n_d) * min_t r_t sqrt(prod_{s<=t} mu_<) sqrt(prod_{s>t} mu_>) ||A^<t>||_2``
    and ``best_t`` attains the minimum.
    """
    a = np.asarray(a, dtype=float)
    r = rank_bound_tt(a.shape, epsilon, c_d)
    profile = profile or tt_core_coherences(a)
    d = a.ndim
    scale = epsilon / math.sqrt(prod(a.shape))
    values = []
    for t in range(1, d):
        left = prod(profile.left[:t])
        right = prod(profile.right[t - 1:])
        values.append(profile.ranks[t - 1] * math.sqrt(left * right)
                      * profile.unfolding_spectral[t - 1])
    best = int(np.argmin(values))
    return r, scale * values[best], best + 1
