"""Landscapes whose neighbours differ in cost by at most a bound ``b``.

Every neighbour cost inside the window ``k-b..k+b`` gets the same NWeight
``1 / sum(p(window))``, and costs outside the window get weight zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..core import CostDistribution, NeighbourKernel, NeighbourhoodSize, INFINITE

Window = Literal["clipped", "full"]


@dataclass(frozen=True)
class LipschitzSpaceSpec:
    base: CostDistribution
    b: int
    n: NeighbourhoodSize = INFINITE
    # "clipped": p is zero outside the cost range, so rows sum to 1.
    # "full": the normaliser counts 2b+1 cells, padding outside the range with the
    # nearest boundary probability; rows near the boundary then sum to < 1.
    window: Window = "clipped"

    def __post_init__(self) -> None:
        if self.b < 1:
            raise ValueError("Lipschitz bound must be >= 1")


def uniform_distribution(k_max: int = 200, k_opt: int = 0) -> CostDistribution:
    return CostDistribution.from_weights(np.ones(k_max - k_opt + 1), k_opt=k_opt)


def lipschitz_kernel(spec: LipschitzSpaceSpec) -> NeighbourKernel:
    p = spec.base.p
    K = len(p)
    b = spec.b
    pn = np.zeros((K, K))
    for i in range(K):
        lo, hi = max(0, i - b), min(K - 1, i + b)
        # direct sum: cumsum differences cancel where p is tiny
        norm = float(p[lo : hi + 1].sum())
        if spec.window == "full":
            norm += max(0, b - i) * p[0] + max(0, i + b - (K - 1)) * p[-1]
        if norm > 0:
            pn[i, lo : hi + 1] = p[lo : hi + 1] / norm
    has = pn.sum(axis=1) > 0
    return NeighbourKernel(spec.base.range, spec.n, pn, has)


def lipschitz_space(spec: LipschitzSpaceSpec) -> tuple[CostDistribution, NeighbourKernel]:
    return spec.base, lipschitz_kernel(spec)


def toy_space(b: int, k_max: int = 200, n: NeighbourhoodSize = INFINITE, window: Window = "clipped"):
    """Uniform costs over ``0..k_max`` with a bound-``b`` kernel."""
    return lipschitz_space(LipschitzSpaceSpec(uniform_distribution(k_max), b, n, window))
