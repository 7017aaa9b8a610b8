"""Dense and tensor-train representations.

Dense tensors are plain ``numpy.ndarray`` objects stored in C order, so the
last index varies fastest.  Multi-indices are zero-based.

A tensor-train is an ordered list of order-3 cores ``G[s]`` of shape
``(r[s-1], n[s], r[s])`` with ``r[0] = r[d] = 1``.
"""

from __future__ import annotations

from math import prod
from typing import Sequence

import numpy as np

__all__ = [
    "TTTensor",
    "tt_eval",
    "tt_to_dense",
    "unfold",
    "left_unfolding",
    "right_unfolding",
    "interface_matrices",
    "tt_svd",
    "tt_round",
    "tt_add",
    "orthogonalize_t",
    "numerical_rank",
    "tt_rank_of_dense",
    "max_norm_error",
    "DEFAULT_RANK_TOL",
    "MAX_DENSE_SIZE",
]

DEFAULT_RANK_TOL = 1e-10
MAX_DENSE_SIZE = 2**27


class TTTensor:
    """Tensor in the tensor-train format.

    Parameters
    ----------
    cores : sequence of array_like
        Order-3 cores; core ``s`` has shape ``(r_{s-1}, n_s, r_s)``.

    The cores are copied and marked read-only, so a ``TTTensor`` never changes
    after construction.
    """

    def __init__(self, cores: Sequence[np.ndarray]):
        cores = [np.array(g, dtype=float) for g in cores]
        if len(cores) < 2:
            raise ValueError("a tensor train needs at least two cores (d >= 2)")
        for s, g in enumerate(cores):
            if g.ndim != 3:
                raise ValueError(f"core {s} must be 3-dimensional, got shape {g.shape}")
            if min(g.shape) < 1:
                raise ValueError(f"core {s} has an empty dimension: {g.shape}")
            if not np.all(np.isfinite(g)):
                raise ValueError(f"core {s} has non-finite entries")
        if cores[0].shape[0] != 1 or cores[-1].shape[2] != 1:
            raise ValueError("boundary ranks must be 1")
        for s in range(len(cores) - 1):
            if cores[s].shape[2] != cores[s + 1].shape[0]:
                raise ValueError(
                    f"cores {s} and {s + 1} do not chain: "
                    f"{cores[s].shape} vs {cores[s + 1].shape}"
                )
        for g in cores:
            g.setflags(write=False)
        self._cores = tuple(cores)

    @property
    def cores(self) -> tuple[np.ndarray, ...]:
        return self._cores

    @property
    def ndim(self) -> int:
        return len(self._cores)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(g.shape[1] for g in self._cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """Interior TT ranks ``(r_1, ..., r_{d-1})``."""
        return tuple(g.shape[2] for g in self._cores[:-1])

    def __getitem__(self, index):
        return tt_eval(self, index)

    def __mul__(self, c: float) -> "TTTensor":
        cores = list(self._cores)
        cores[0] = c * cores[0]
        return TTTensor(cores)

    __rmul__ = __mul__

    def __neg__(self) -> "TTTensor":
        return -1.0 * self

    def __add__(self, other: "TTTensor") -> "TTTensor":
        return tt_add(self, other)

    def __repr__(self) -> str:
        return f"TTTensor(shape={self.shape}, ranks={self.ranks})"


def tt_eval(tt: TTTensor, index: Sequence[int]) -> float:
    """Entry ``G_1(0, i_1, :) G_2(:, i_2, :) ... G_d(:, i_d, 0)``."""
    index = tuple(int(i) for i in index)
    if len(index) != tt.ndim:
        raise IndexError(f"expected {tt.ndim} indices, got {len(index)}")
    for i, n in zip(index, tt.shape):
        if not 0 <= i < n:
            raise IndexError(f"index {index} out of bounds for shape {tt.shape}")
    v = tt.cores[0][:, index[0], :]
    for g, i in zip(tt.cores[1:], index[1:]):
        v = v @ g[:, i, :]
    return float(v[0, 0])


def tt_to_dense(tt: TTTensor, max_size: int = MAX_DENSE_SIZE) -> np.ndarray:
    size = prod(tt.shape)
    if size > max_size:
        raise MemoryError(f"dense tensor of {size} entries exceeds the budget {max_size}")
    out = tt.cores[0].reshape(tt.shape[0], -1)
    for g in tt.cores[1:]:
        out = out @ g.reshape(g.shape[0], -1)
        out = out.reshape(-1, g.shape[2])
    return out.reshape(tt.shape)


def unfold(a: np.ndarray, s: int) -> np.ndarray:
    """The ``s``-th unfolding, of size ``(n_1...n_s) x (n_{s+1}...n_d)``.

    Row multi-indices run with ``i_1`` fastest, column multi-indices with
    ``i_d`` fastest.  With this layout the interface matrices of a tensor
    train multiply to the unfolding with the Kronecker ordering
    ``I_{n_s} (x) A_{<=s-1}``.
    """
    a = np.asarray(a)
    d = a.ndim
    if not 1 <= s <= d - 1:
        raise ValueError(f"split position must lie in [1, {d - 1}], got {s}")
    rows = prod(a.shape[:s])
    perm = tuple(range(s - 1, -1, -1)) + tuple(range(s, d))
    return a.transpose(perm).reshape(rows, -1)


def left_unfolding(g: np.ndarray) -> np.ndarray:
    """``(r_{s-1} n_s) x r_s`` matrix with the left rank index fastest."""
    p, n, q = g.shape
    return g.reshape(p * n, q, order="F")


def right_unfolding(g: np.ndarray) -> np.ndarray:
    """``r_{s-1} x (n_s r_s)`` matrix with the right rank index fastest."""
    p, n, q = g.shape
    return g.reshape(p, n * q)


def _core_from_left(m: np.ndarray, p: int, n: int) -> np.ndarray:
    return m.reshape(p, n, -1, order="F")


def _core_from_right(m: np.ndarray, n: int, q: int) -> np.ndarray:
    return m.reshape(-1, n, q)


def interface_matrices(tt: TTTensor, s: int) -> tuple[np.ndarray, np.ndarray]:
    """Left and right interface matrices ``A_{<=s}`` and ``A_{>=s+1}``.

    Their product equals ``unfold(tt_to_dense(tt), s)``.
    """
    d = tt.ndim
    if not 1 <= s <= d - 1:
        raise ValueError(f"split position must lie in [1, {d - 1}], got {s}")
    left = np.ones((1, 1))
    for g in tt.cores[:s]:
        left = np.kron(np.eye(g.shape[1]), left) @ left_unfolding(g)
    right = np.ones((1, 1))
    for g in reversed(tt.cores[s:]):
        right = right_unfolding(g) @ np.kron(np.eye(g.shape[1]), right)
    return left, right


def numerical_rank(sv: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``tol * sv[0]``."""
    sv = np.asarray(sv)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def _rank_caps(max_rank, d: int) -> list:
    if max_rank is None or np.isscalar(max_rank):
        caps = [max_rank] * (d - 1)
    else:
        caps = list(max_rank)
        if len(caps) != d - 1:
            raise ValueError(f"need {d - 1} rank caps, got {len(caps)}")
    for c in caps:
        if c is not None and c < 1:
            raise ValueError("rank caps must be >= 1")
    return caps


def tt_svd(
    a: np.ndarray,
    max_rank: int | Sequence[int] | None = None,
    tol: float = DEFAULT_RANK_TOL,
    return_discarded: bool = False,
):
    """Left-orthogonal TT factorization by sequential truncated SVDs.

    At every step singular values at or below ``tol * sigma_1`` are dropped,
    then at most ``max_rank`` of the remaining ones are kept (the cap wins
    when both apply).  Ties at the cap are broken by keeping the leading
    values in LAPACK order.

    With ``return_discarded=True`` the squared Frobenius norm of the discarded
    singular values of every step is returned as a second value; the
    reconstruction error is at most the square root of their sum.
    """
    a = np.asarray(a, dtype=float)
    d = a.ndim
    if d < 2:
        raise ValueError("tensors of order d >= 2 are required")
    if not np.all(np.isfinite(a)):
        raise ValueError("input tensor has non-finite entries")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    caps = _rank_caps(max_rank, d)
    shape = a.shape

    if not np.any(a):
        tt = TTTensor([np.zeros((1, n, 1)) for n in shape])
        return (tt, [0.0] * (d - 1)) if return_discarded else tt

    cores = []
    discarded = []
    rest = a.reshape(shape[0], -1)
    r_prev = 1
    for s in range(d - 1):
        u, sv, vt = np.linalg.svd(rest, full_matrices=False)
        if not np.isfinite(sv[0]):
            raise FloatingPointError("TT-SVD overflowed")
        r = max(numerical_rank(sv, tol), 1)
        if caps[s] is not None:
            r = min(r, caps[s])
        with np.errstate(over="ignore"):
            discarded.append(float(np.sum(sv[r:] ** 2)))
        cores.append(u[:, :r].reshape(r_prev, shape[s], r))
        rest = (sv[:r, None] * vt[:r]).reshape(r * shape[s + 1], -1)
        r_prev = r
    if not np.all(np.isfinite(rest)):
        raise FloatingPointError("TT-SVD overflowed")
    cores.append(rest.reshape(r_prev, shape[-1], 1))
    tt = TTTensor(cores)
    return (tt, discarded) if return_discarded else tt


def _lq(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q, r = np.linalg.qr(m.T)
    return r.T, q.T


def _right_orthogonalize(cores: list, stop: int) -> None:
    """Make cores ``d-1 .. stop+1`` (zero-based) right-orthogonal in place."""
    for s in range(len(cores) - 1, stop, -1):
        g = cores[s]
        lo, q = _lq(right_unfolding(g))
        cores[s] = _core_from_right(q, g.shape[1], g.shape[2])
        cores[s - 1] = np.tensordot(cores[s - 1], lo, axes=(2, 0))


def _left_orthogonalize(cores: list, stop: int) -> None:
    """Make cores ``0 .. stop-1`` (zero-based) left-orthogonal in place."""
    for s in range(stop):
        g = cores[s]
        q, r = np.linalg.qr(left_unfolding(g))
        cores[s] = _core_from_left(q, g.shape[0], g.shape[1])
        cores[s + 1] = np.tensordot(r, cores[s + 1], axes=(1, 0))


def tt_round(tt: TTTensor, max_rank: int | Sequence[int] | None = None,
             tol: float = DEFAULT_RANK_TOL) -> TTTensor:
    """Recompress a tensor train.

    A right-to-left orthogonalization sweep is followed by truncated SVDs from
    left to right, which reproduces ``tt_svd`` of the dense tensor.
    """
    d = tt.ndim
    caps = _rank_caps(max_rank, d)
    cores = [np.array(g) for g in tt.cores]
    _right_orthogonalize(cores, 0)
    if not np.any(cores[0]):
        return TTTensor([np.zeros((1, n, 1)) for n in tt.shape])
    for s in range(d - 1):
        g = cores[s]
        p, n, _ = g.shape
        u, sv, vt = np.linalg.svd(g.reshape(p * n, -1), full_matrices=False)
        r = max(numerical_rank(sv, tol), 1)
        if caps[s] is not None:
            r = min(r, caps[s])
        cores[s] = u[:, :r].reshape(p, n, r)
        cores[s + 1] = np.tensordot(sv[:r, None] * vt[:r], cores[s + 1], axes=(1, 0))
    return TTTensor(cores)


def tt_add(a: TTTensor, b: TTTensor) -> TTTensor:
    """Sum of two tensor trains via block-diagonal cores (ranks add up)."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a.ndim
    cores = []
    for s, (g, h) in enumerate(zip(a.cores, b.cores)):
        p1, n, q1 = g.shape
        p2, _, q2 = h.shape
        if s == 0:
            f = np.concatenate([g, h], axis=2)
        elif s == d - 1:
            f = np.concatenate([g, h], axis=0)
        else:
            f = np.zeros((p1 + p2, n, q1 + q2))
            f[:p1, :, :q1] = g
            f[p1:, :, q1:] = h
        cores.append(f)
    return TTTensor(cores)


def _check_minimal(tt: TTTensor, tol: float) -> None:
    for s, g in enumerate(tt.cores):
        p, _, q = g.shape
        if numerical_rank(np.linalg.svd(left_unfolding(g), compute_uv=False), tol) < q:
            raise ValueError(f"core {s + 1} has a rank-deficient left unfolding; "
                             "the factorization is not minimal")
        if numerical_rank(np.linalg.svd(right_unfolding(g), compute_uv=False), tol) < p:
            raise ValueError(f"core {s + 1} has a rank-deficient right unfolding; "
                             "the factorization is not minimal")


def orthogonalize_t(tt: TTTensor, t: int, tol: float = DEFAULT_RANK_TOL) -> TTTensor:
    """Minimal ``t``-orthogonal factorization of the same tensor.

    Cores ``1..t-1`` become left-orthogonal and cores ``t+1..d``
    right-orthogonal (one-based ``t``).  The input must be minimal.
    """
    d = tt.ndim
    if not 1 <= t <= d:
        raise ValueError(f"t must lie in [1, {d}], got {t}")
    _check_minimal(tt, tol)
    cores = [np.array(g) for g in tt.cores]
    _left_orthogonalize(cores, t - 1)
    _right_orthogonalize(cores, t - 1)
    return TTTensor(cores)


def tt_rank_of_dense(a: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> tuple[int, ...]:
    a = np.asarray(a, dtype=float)
    return tuple(
        numerical_rank(np.linalg.svd(unfold(a, s), compute_uv=False), tol)
        for s in range(1, a.ndim)
    )


def max_norm_error(a: np.ndarray, b: TTTensor) -> float:
    """``max |a - b|`` over all entries."""
    a = np.asarray(a)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - tt_to_dense(b))))
