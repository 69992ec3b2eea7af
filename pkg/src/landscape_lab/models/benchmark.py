"""Binomial-count benchmark class over costs ``0..4 * terms``.

``ct(4j) = C(terms, j)``; the three costs between successive multiples of 4
are filled by linear interpolation.  The default interpolates towards the
next binomial ``C(terms, j+1)``; ``interpolation="literal"`` interpolates
towards ``C(terms, j) + 1`` instead, which gives a sawtooth.

Counts are built in log space so larger term counts do not overflow; the
final probabilities are normalised after exponentiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma
from typing import Literal

import numpy as np

from ..core import CostDistribution, NeighbourhoodSize, NeighbourKernel
from .lipschitz import LipschitzSpaceSpec, lipschitz_kernel

Interpolation = Literal["next", "literal"]


@dataclass(frozen=True)
class BenchmarkClassSpec:
    terms: int = 50
    step: int = 4
    interpolation: Interpolation = "next"

    def __post_init__(self) -> None:
        if self.terms < 1 or self.step < 1:
            raise ValueError("terms and step must be positive")
        if self.interpolation not in ("next", "literal"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")

    @property
    def k_max(self) -> int:
        return self.terms * self.step


def _log_binom(n: int, k: int) -> float:
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def benchmark_counts(spec: BenchmarkClassSpec = BenchmarkClassSpec()) -> np.ndarray:
    """Counts ``ct(k)`` scaled by ``1 / C(terms, terms//2)`` (relative values only)."""
    n, s = spec.terms, spec.step
    logs = np.array([_log_binom(n, j) for j in range(n + 1)])
    anchor = np.exp(logs - logs.max())
    scale = np.exp(-logs.max())
    ct = np.zeros(spec.k_max + 1)
    ct[::s] = anchor
    for j in range(n):
        lo = anchor[j]
        hi = anchor[j + 1] if spec.interpolation == "next" else anchor[j] + scale
        for i in range(1, s):
            ct[s * j + i] = lo + (hi - lo) * i / s
    return ct


def benchmark_distribution(spec: BenchmarkClassSpec = BenchmarkClassSpec()) -> CostDistribution:
    ct = benchmark_counts(spec)
    return CostDistribution.from_weights(ct)


def benchmark_space(
    b: int,
    n: NeighbourhoodSize = 50,
    spec: BenchmarkClassSpec = BenchmarkClassSpec(),
) -> tuple[CostDistribution, NeighbourKernel]:
    dist = benchmark_distribution(spec)
    return dist, lipschitz_kernel(LipschitzSpaceSpec(dist, b, n))

