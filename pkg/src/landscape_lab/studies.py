"""Multi-instance TSP studies and trend checks on sampled NWeights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TOL, NWeightTable, compute_nweights, p_less, pn_less, tol_for
from .models.tsp import TspLandscape, tsp_enumerate, tsp_generate
from .rates import rate_crossover


@dataclass(frozen=True)
class LevelCheck:
    k: int
    r_kk: float
    rbar: float
    pn_less: float
    rbar_p_less: float
    shortcut: bool  # r(k, k - k_opt) >= 1
    thm1: bool  # rbar >= 1 and pn^< >= rbar * p^<
    dead_end: bool  # no improving neighbour from this level

    @property
    def ok(self) -> bool:
        return self.shortcut or self.thm1


def theorem1_levels(land: TspLandscape, nweights: NWeightTable | None = None) -> list[LevelCheck]:
    """Check every populated level in ``k_opt+1..k_ge``."""
    dist, kernel = land.dist, land.kernel
    nw = nweights or compute_nweights(dist, kernel)
    out = []
    for k in range(land.k_opt + 1, land.k_ge + 1):
        if dist.prob(k) <= 0 or not kernel.has_row[k - dist.k_opt]:
            continue
        rkk = nw.r_at(k, k - dist.k_opt)
        rb = nw.rbar_at(k)
        pl = pn_less(kernel, k)
        target = rb * p_less(dist, k)
        out.append(
            LevelCheck(
                k,
                rkk,
                rb,
                pl,
                target,
                bool(not np.isnan(rkk) and rkk >= 1 - TOL),
                bool(rb >= 1 - TOL and pl >= target - tol_for(target)),
                pl <= 0,
            )
        )
    return out


@dataclass(frozen=True)
class InstanceSummary:
    seed: int
    k_opt: int
    k_mod: int
    k_ge: int
    passes: bool
    passes_live: bool  # ignoring levels with no improving neighbour
    failing: tuple[int, ...]
    crossover: int | None

    @property
    def crossover_gap(self) -> int | None:
        return None if self.crossover is None else self.crossover - self.k_opt


def summarise_instance(seed: int, land: TspLandscape) -> InstanceSummary:
    levels = theorem1_levels(land)
    failing = tuple(lv.k for lv in levels if not lv.ok)
    live_fail = [lv.k for lv in levels if not lv.ok and not lv.dead_end]
    return InstanceSummary(
        seed,
        land.k_opt,
        land.k_mod,
        land.k_ge,
        not failing,
        not live_fail,
        failing,
        rate_crossover(land.dist, land.kernel),
    )


def tsp_study(seeds, num_cities: int = 10, threads: int = 1) -> list[InstanceSummary]:
    return [summarise_instance(s, tsp_enumerate(tsp_generate(num_cities, s), threads=threads)) for s in seeds]


def isotonic_decreasing(y: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """Weighted least-squares nonincreasing fit (pool adjacent violators)."""
    y = np.asarray(y, float)
    w = np.ones_like(y) if w is None else np.asarray(w, float)
    vals, wts, lens = [], [], []
    for yi, wi in zip(y, w):
        vals.append(yi)
        wts.append(wi)
        lens.append(1)
        while len(vals) > 1 and vals[-2] < vals[-1]:
            v2, w2, l2 = vals.pop(), wts.pop(), lens.pop()
            tot = wts[-1] + w2
            vals[-1] = (vals[-1] * wts[-1] + v2 * w2) / tot
            wts[-1] = tot
            lens[-1] += l2
    return np.repeat(vals, lens)


@dataclass(frozen=True)
class TrendCheck:
    deltas: np.ndarray
    r: np.ndarray
    fit: np.ndarray
    strict: bool  # raw values nonincreasing
    explained: float  # share of variance captured by the monotone fit
    trend: bool


def nonincreasing_trend(nweights: NWeightTable, k: int, max_delta: int = 50, min_explained: float = 0.5) -> TrendCheck:
    """Monotone-trend flag for ``r(k, 1..max_delta)`` over defined entries.

    Sampled NWeights are noisy, so the flag asks that a nonincreasing fit
    explains at least ``min_explained`` of the variance and drops overall.
    """
    d = np.arange(1, max_delta + 1)
    r = np.array([nweights.r_at(k, int(x)) for x in d])
    keep = ~np.isnan(r)
    d, r = d[keep], r[keep]
    if r.size < 2:
        return TrendCheck(d, r, r.copy(), True, 1.0, True)
    fit = isotonic_decreasing(r)
    ss_tot = float(np.sum((r - r.mean()) ** 2))
    ss_res = float(np.sum((r - fit) ** 2))
    explained = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    strict = bool(np.all(np.diff(r) <= tol_for(r[:-1])))
    return TrendCheck(d, r, fit, strict, explained, explained >= min_explained and fit[0] > fit[-1])


def unimodal(p: np.ndarray) -> bool:
    """True when ``p`` (zeros trimmed) rises then falls, allowing ties."""
    nz = np.nonzero(p)[0]
    q = np.asarray(p)[nz[0] : nz[-1] + 1]
    m = int(np.argmax(q))
    return bool(np.all(np.diff(q[: m + 1]) >= 0) and np.all(np.diff(q[m:]) <= 0))


def smoothed_unimodal(p: np.ndarray, width: int = 5) -> bool:
    """Unimodality after a centred moving average (sampling noise removed)."""
    kern = np.ones(width) / width
    return unimodal(np.convolve(p, kern, mode="same"))


def support_rbar(nweights: NWeightTable, k: int) -> float:
    """Mean of the defined ``r(k, 1..k-k_opt)`` only (sampled support)."""
    i = k - nweights.range.k_opt
    v = nweights.r[i, 1 : i + 1]
    v = v[~np.isnan(v)]
    return float(v.mean()) if v.size else float("nan")
