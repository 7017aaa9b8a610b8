"""Randomized compression of a tensor train by sub-Gaussian sketches.

Given cores ``G_s`` with inner ranks ``k_s``, draw ``R_s`` of size
``k_s x r`` and form ``H_1 = G_1 R_1``, ``H_s = R_{s-1}^T G_s R_s``,
``H_d = R_{d-1}^T G_d``.  Every entry of the result is a quadratic form in
the sketches whose mean is the original entry when
``eta_s^2 r = 1`` for the entry variances ``eta_s^2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from os import PathLike
from typing import Sequence

import numpy as np

from .index import eval_quadratic_form
from .norms import gamma_tt_upper
from .tensor import TTTensor, tt_to_dense

__all__ = [
    "SketchConfig",
    "SketchReport",
    "draw_sketches",
    "compress",
    "sketch_error_report",
    "moment_scan",
    "moment_shape",
    "MomentScan",
]

DISTRIBUTIONS = ("gaussian", "rademacher")


@dataclass(frozen=True)
class SketchConfig:
    """Sketch size, entry law and scales.

    ``eta`` holds one scale per sketch; their product must equal
    ``rank ** (-(d-1)/2)`` for the compression to be unbiased.  ``None``
    means the equal split ``rank ** -0.5`` for every sketch.
    """

    rank: int
    distribution: str = "gaussian"
    seed: int = 0
    eta: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("sketch rank must be >= 1")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if self.eta is not None:
            object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
            if min(self.eta) <= 0:
                raise ValueError("eta entries must be positive")
            target = self.rank ** (-len(self.eta) / 2)
            if abs(math.prod(self.eta) - target) > 1e-12 * target:
                raise ValueError("prod(eta) must equal rank ** (-(d-1)/2)")

    def scales(self, count: int) -> tuple[float, ...]:
        if self.eta is None:
            return (self.rank ** -0.5,) * count
        if len(self.eta) != count:
            raise ValueError(f"config has {len(self.eta)} scales, need {count}")
        return self.eta


def _draw(rng: np.random.Generator, distribution: str, shape) -> np.ndarray:
    if distribution == "gaussian":
        return rng.standard_normal(shape)
    return rng.choice(np.array([-1.0, 1.0]), size=shape)


def draw_sketches(config: SketchConfig, inner_ranks: Sequence[int],
                  rng: np.random.Generator | None = None) -> list[np.ndarray]:
    """Matrices ``R_s`` of size ``k_s x r`` with i.i.d. entries of variance ``eta_s^2``."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    etas = config.scales(len(inner_ranks))
    return [eta * _draw(rng, config.distribution, (k, config.rank))
            for k, eta in zip(inner_ranks, etas)]


def _apply(tt: TTTensor, sketches: Sequence[np.ndarray]) -> TTTensor:
    d = tt.ndim
    cores = []
    for s, g in enumerate(tt.cores):
        h = g
        if s > 0:
            h = np.tensordot(sketches[s - 1].T, h, axes=(1, 0))
        if s < d - 1:
            h = np.tensordot(h, sketches[s], axes=(2, 0))
        cores.append(h)
    return TTTensor(cores)


def compress(tt: TTTensor, config: SketchConfig,
             rng: np.random.Generator | None = None) -> TTTensor:
    """Sketched tensor train with all interior ranks equal to ``config.rank``."""
    return _apply(tt, draw_sketches(config, tt.ranks, rng))


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


@dataclass
class SketchReport:
    max_error: np.ndarray
    gamma_bound: float
    rank: int
    distribution: str
    seed: int

    @property
    def implied_epsilon(self) -> np.ndarray:
        if self.gamma_bound == 0:
            return np.zeros_like(self.max_error)
        return self.max_error / self.gamma_bound

    def quantiles(self, qs=(0.1, 0.5, 0.9)) -> dict[float, float]:
        return {q: float(np.quantile(self.max_error, q)) for q in qs}

    @property
    def median_epsilon(self) -> float:
        return float(np.median(self.implied_epsilon))

    def rows(self) -> list[dict]:
        return [
            {"trial": t, "max_error": float(e), "gamma_bound": self.gamma_bound,
             "implied_epsilon": float(x)}
            for t, (e, x) in enumerate(zip(self.max_error, self.implied_epsilon))
        ]

    def to_csv(self, path: str | PathLike) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(
                fh, fieldnames=["trial", "max_error", "gamma_bound", "implied_epsilon"])
            writer.writeheader()
            for row in self.rows():
                writer.writerow({k: (repr(v) if isinstance(v, float) else v)
                                 for k, v in row.items()})


def sketch_error_report(tt: TTTensor, config: SketchConfig, trials: int) -> SketchReport:
    """Entrywise error of independent sketches of ``tt``.

    Trial ``t`` draws from the stream seeded by ``(config.seed, t)``, so the
    outcome of a trial does not depend on how many others run.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    a = tt_to_dense(tt)
    errors = np.empty(trials)
    for t in range(trials):
        b = compress(tt, config, _trial_rng(config.seed, t))
        errors[t] = np.max(np.abs(a - tt_to_dense(b)))
    return SketchReport(errors, gamma_tt_upper(tt), config.rank, config.distribution, config.seed)


def moment_shape(p: float, r: int, d: int) -> float:
    """``sum_{kappa=1}^{2d-2} (p / r)^(kappa / 2)``."""
    return float(sum((p / r) ** (kappa / 2) for kappa in range(1, 2 * d - 1)))


@dataclass
class MomentScan:
    p_values: tuple[float, ...]
    moments: np.ndarray
    shape: np.ndarray
    constant: float
    mean: float
    expected_mean: float

    @property
    def ratios(self) -> np.ndarray:
        return self.moments / self.shape

    def rows(self) -> list[dict]:
        return [{"p": p, "moment": float(m), "shape": float(s), "fitted": float(self.constant * s)}
                for p, m, s in zip(self.p_values, self.moments, self.shape)]


def moment_scan(w: Sequence[np.ndarray], r: int, p_values: Sequence[float], trials: int,
                distribution: str = "gaussian", seed: int = 0) -> MomentScan:
    """Empirical ``L_p`` norms of the centred quadratic form of a chain.

    The theoretical shape ``prod ||W_t||_F * sum_kappa (p/r)^(kappa/2)`` is
    matched to the data by a single constant, fitted by least squares in log
    space.
    """
    if trials < 1000:
        raise ValueError("moment estimates need at least 1000 trials")
    if min(p_values) < 1:
        raise ValueError("moment orders must be >= 1")
    w = [np.atleast_2d(np.asarray(m, dtype=float)) for m in w]
    d = len(w)
    ks = [m.shape[1] for m in w[:-1]]
    config = SketchConfig(r, distribution, seed)
    expected = float(np.linalg.multi_dot([np.eye(1)] + w)[0, 0])
    values = np.empty(trials)
    for t in range(trials):
        values[t] = eval_quadratic_form(w, draw_sketches(config, ks, _trial_rng(seed, t)))
    dev = np.abs(values - expected)
    moments = np.array([np.mean(dev ** p) ** (1 / p) for p in p_values])
    scale = math.prod(np.linalg.norm(m) for m in w)
    shape = np.array([scale * moment_shape(p, r, d) for p in p_values])
    constant = float(np.exp(np.mean(np.log(moments) - np.log(shape))))
    return MomentScan(tuple(p_values), moments, shape, constant, float(values.mean()), expected)
