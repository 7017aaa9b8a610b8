"""Test instances: identity tensors, uniform noise and random TT starting points."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .norms import cp_to_tt
from .tensor import TTTensor

__all__ = ["GeneratorSpec", "identity_tensor", "identity_tt", "uniform_tensor",
           "random_tt_init", "generate"]

KINDS = ("identity", "uniform", "random_tt")


def identity_tensor(n: int, d: int) -> np.ndarray:
    """Order-``d`` tensor with ones where all indices agree."""
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    a = np.zeros((n,) * d)
    idx = np.arange(n)
    a[(idx,) * d] = 1.0
    return a


def identity_tt(n: int, d: int) -> TTTensor:
    """The identity tensor as a CP sum of ``n`` rank-one terms, in TT form."""
    if n < 1 or d < 2:
        raise ValueError("need n >= 1 and d >= 2")
    return cp_to_tt([np.eye(n)] * d)


def uniform_tensor(dims: Sequence[int], seed: int) -> np.ndarray:
    """I.i.d. entries from the open interval ``(-1, 1)``."""
    rng = np.random.default_rng(seed)
    # The generator samples [low, high); nudging low excludes -1.
    return rng.uniform(np.nextafter(-1.0, 0.0), 1.0, size=tuple(dims))


def random_tt_init(dims: Sequence[int], r: int, seed: int) -> TTTensor:
    """Standard Gaussian cores of uniform rank ``r``, the tensor scaled by ``r^(1-d)``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    dims = tuple(dims)
    d = len(dims)
    ranks = (1,) + (r,) * (d - 1) + (1,)
    rng = np.random.default_rng(seed)
    cores = [rng.standard_normal((ranks[s], n, ranks[s + 1])) for s, n in enumerate(dims)]
    cores[0] = cores[0] * float(r) ** (1 - d)
    return TTTensor(cores)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    dims: tuple[int, ...]
    rank: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if len(self.dims) < 2:
            raise ValueError("need at least two dimensions")
        if self.kind == "identity" and len(set(self.dims)) != 1:
            raise ValueError("identity tensors need equal dimensions")
        if self.kind == "random_tt" and (self.rank is None or self.rank < 1):
            raise ValueError("random_tt needs rank >= 1")


def generate(spec: GeneratorSpec):
    """Dense array for ``identity``/``uniform``, a ``TTTensor`` for ``random_tt``."""
    if spec.kind == "identity":
        return identity_tensor(spec.dims[0], len(spec.dims))
    if spec.kind == "uniform":
        return uniform_tensor(spec.dims, spec.seed)
    return random_tt_init(spec.dims, spec.rank, spec.seed)
