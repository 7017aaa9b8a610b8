"""Entrywise (max-norm) low-rank TT approximation by alternating projections.

The iteration alternates between the max-norm ball of radius ``eps`` around
the target, where the projection clips entries, and the set of TT rank
``<= r`` tensors, where TT-SVD stands in for the (intractable) projection.
Bisection over ``eps`` turns the feasibility heuristic into an upper bound on
the best achievable entrywise error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .generators import random_tt_init
from .tensor import TTTensor, tt_svd, tt_to_dense

__all__ = [
    "APConfig",
    "ApproxReport",
    "project_ball",
    "quasi_project_lowrank",
    "alternating_projections",
    "binary_search_epsilon",
    "MAX_BISECTIONS",
    "BRACKET_RTOL",
]

MAX_BISECTIONS = 20
BRACKET_RTOL = 1e-3


@dataclass(frozen=True)
class APConfig:
    rank: int
    max_iter: int = 500
    conv_tol: float = 1e-8
    slack: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")
        if self.slack < 0:
            raise ValueError("slack must be nonnegative")


@dataclass
class ApproxReport:
    """Outcome of one run or of a whole search.

    ``success`` means the witness lies within ``eps * (1 + slack)`` of the
    target; ``converged`` means the run stopped before exhausting its budget.
    ``history`` holds the max-norm residual after every iteration.
    """

    epsilon_achieved: float
    iterations_used: int
    converged: bool
    residual_max: float
    rank: int
    seed: int
    success: bool = False
    history: list[float] = field(default_factory=list)


def project_ball(x: np.ndarray, a: np.ndarray, epsilon: float) -> np.ndarray:
    """Nearest point to ``x`` within max-norm distance ``epsilon`` of ``a``."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if x.shape != a.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {a.shape}")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return a + np.clip(x - a, -epsilon, epsilon)


def quasi_project_lowrank(y: np.ndarray, r: int) -> TTTensor:
    """TT-SVD truncated to rank ``r``: quasi-optimal in the Frobenius norm."""
    if r < 1:
        raise ValueError("r must be >= 1")
    try:
        return tt_svd(y, max_rank=r, tol=0.0)
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError(f"TT-SVD failed: {exc}") from exc


def _residual(a: np.ndarray, x: np.ndarray) -> float:
    return float(np.max(np.abs(a - x)))


def alternating_projections(a: np.ndarray, epsilon: float, cfg: APConfig,
                            x0: TTTensor) -> tuple[ApproxReport, TTTensor]:
    """Alternate ball and low-rank projections starting from ``x0``.

    Stops on success, on Frobenius stagnation of the low-rank iterates
    (relative to ``||a||_F``), or after ``cfg.max_iter`` iterations.
    """
    a = np.asarray(a, dtype=float)
    if x0.shape != a.shape:
        raise ValueError(f"shape mismatch: {x0.shape} vs {a.shape}")
    if max(x0.ranks) > cfg.rank:
        raise ValueError(f"starting point ranks {x0.ranks} exceed {cfg.rank}")
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("target has non-finite entries")
    target = epsilon * (1 + cfg.slack)
    stall = cfg.conv_tol * np.linalg.norm(a)
    x_tt = x0
    x = tt_to_dense(x0)
    history = []
    success = stalled = False
    it = 0
    while it < cfg.max_iter:
        it += 1
        x_tt = quasi_project_lowrank(project_ball(x, a, epsilon), cfg.rank)
        x_new = tt_to_dense(x_tt)
        if not np.all(np.isfinite(x_new)):
            raise FloatingPointError(f"non-finite iterate at iteration {it}")
        res = _residual(a, x_new)
        history.append(res)
        step = np.linalg.norm(x_new - x)
        x = x_new
        if res <= target:
            success = True
            break
        if step <= stall:
            stalled = True
            break
    res = history[-1]
    report = ApproxReport(
        epsilon_achieved=res,
        iterations_used=it,
        converged=success or stalled,
        residual_max=res,
        rank=cfg.rank,
        seed=cfg.seed,
        success=success,
        history=history,
    )
    return report, x_tt


def _restart_seed(seed: int, restart: int) -> int:
    return int(np.random.SeedSequence([seed, restart]).generate_state(1)[0])


def binary_search_epsilon(a: np.ndarray, cfg: APConfig, restarts: int = 1
                          ) -> tuple[ApproxReport, TTTensor]:
    """Smallest ``eps`` for which alternating projections finds a witness.

    The bracket starts at ``[0, hi]`` where ``hi`` is the error of the better
    of two free witnesses, the zero tensor and the rank-``r`` TT-SVD.  Every
    successful run lowers ``hi`` to the witness's own residual, so the
    returned value is always certified by the returned tensor.  Bisection
    stops after ``MAX_BISECTIONS`` steps or once the bracket is narrower than
    ``BRACKET_RTOL * ||a||_max``.  Over several restarts (different random
    starting points) the smallest certified value wins.
    """
    a = np.asarray(a, dtype=float)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("target has non-finite entries")
    amax = float(np.max(np.abs(a)))
    width = BRACKET_RTOL * amax

    zero = TTTensor([np.zeros((1, n, 1)) for n in a.shape])
    svd_tt = quasi_project_lowrank(a, cfg.rank)
    svd_err = _residual(a, tt_to_dense(svd_tt))
    best_tt, best_eps = (svd_tt, svd_err) if svd_err < amax else (zero, amax)

    total_iters = 0
    closed = True
    best_history: list[float] = []
    for k in range(restarts):
        x0 = random_tt_init(a.shape, cfg.rank, _restart_seed(cfg.seed, k))
        lo, hi = 0.0, best_eps
        steps = 0
        while hi - lo >= width and hi > 0:
            if steps == MAX_BISECTIONS:
                closed = False
                break
            steps += 1
            mid = 0.5 * (lo + hi)
            rep, x_tt = alternating_projections(a, mid, cfg, x0)
            total_iters += rep.iterations_used
            if rep.success:
                hi = min(mid, rep.residual_max)
                if rep.residual_max < best_eps:
                    best_eps, best_tt, best_history = rep.residual_max, x_tt, rep.history
            else:
                lo = mid
    report = ApproxReport(
        epsilon_achieved=best_eps,
        iterations_used=total_iters,
        converged=closed,
        residual_max=_residual(a, tt_to_dense(best_tt)),
        rank=cfg.rank,
        seed=cfg.seed,
        success=True,
        history=best_history,
    )
    return report, best_tt
