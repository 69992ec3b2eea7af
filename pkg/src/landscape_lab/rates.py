"""One-step expected improvement of blind search versus neighbour search."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import CostDistribution, NeighbourKernel
from .errors import BadTarget


@dataclass(frozen=True)
class ImprovementReport:
    k: int
    t: int
    e_imp: float
    en_imp: float


def _gain_below(weights: np.ndarray, costs: np.ndarray, level: int) -> float:
    below = costs < level
    return float(np.dot(weights[below], level - costs[below]))


def expected_improvement(dist: CostDistribution, kernel: NeighbourKernel, k: int) -> ImprovementReport:
    """Expected cost decrease per step, counting only improving moves."""
    row = kernel.row(k)
    c = dist.costs
    return ImprovementReport(k, k, _gain_below(dist.p, c, k), _gain_below(row, c, k))


def expected_improvement_to_target(dist: CostDistribution, kernel: NeighbourKernel, k: int, t: int) -> ImprovementReport:
    """Improvement measured below a target ``t <= k``: blind uses ``p``, neighbours use row ``k``."""
    if t > k:
        raise BadTarget(f"target {t} is above the current cost {k}")
    row = kernel.row(k)
    c = dist.costs
    return ImprovementReport(k, t, _gain_below(dist.p, c, t), _gain_below(row, c, t))


def improvement_curve(dist: CostDistribution, kernel: NeighbourKernel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(k, e_imp, en_imp)`` over the whole range.

    ``en_imp`` is NaN at levels without a kernel row and at levels above the
    optimum whose points have no improving neighbour at all; such levels
    carry no information about the neighbourhood's rate.
    """
    c = dist.costs
    e = np.array([_gain_below(dist.p, c, k) for k in c])
    en = np.full(len(c), np.nan)
    for i, k in enumerate(c):
        if not kernel.has_row[i]:
            continue
        row = kernel.pn[i]
        if k > dist.k_opt and row[:i].sum() <= 0:
            continue
        en[i] = _gain_below(row, c, k)
    return c, e, en


def rate_crossover(dist: CostDistribution, kernel: NeighbourKernel) -> int | None:
    """Lowest cost with ``e_imp > en_imp`` among levels where ``en_imp`` is defined."""
    c, e, en = improvement_curve(dist, kernel)
    hit = np.nonzero(~np.isnan(en) & (e > en))[0]
    return int(c[hit[0]]) if hit.size else None


def write_rates_csv(path: str | Path, dist: CostDistribution, kernel: NeighbourKernel) -> None:
    c, e, en = improvement_curve(dist, kernel)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "e_imp", "en_imp"])
        for k, a, b in zip(c, e, en):
            w.writerow([int(k), repr(float(a)), "" if math.isnan(b) else repr(float(b))])
