"""Cost-level probability model of a neighbourhood.

A search space is summarised by the probability ``p(k)`` that a uniformly
random point has cost ``k`` and by the kernel ``pn(k1, k2)``, the probability
that a uniformly random neighbour of a point at level ``k1`` has cost ``k2``.
Everything else here (NWeights, improvement probabilities, the NSC / GE /
unbiasedness conditions) is derived from that pair.

All arrays are dense over ``k_opt..k_max`` and indexed by ``k - k_opt``.
Queries outside the range return exactly zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingRow, RangeMismatch

TOL = 1e-10
SUM_TOL = 1e-12


class Infinite(enum.Enum):
    INFINITE = "inf"

    def __str__(self) -> str:
        return "inf"


INFINITE = Infinite.INFINITE
NeighbourhoodSize = int | Infinite


def parse_size(value: str | int | Infinite) -> NeighbourhoodSize:
    if isinstance(value, Infinite):
        return value
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinite", "infinity"):
        return INFINITE
    n = int(value)
    if n < 1:
        raise ValueError(f"neighbourhood size must be positive, got {n}")
    return n


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float if a.dtype.kind == "f" else a.dtype, copy=True)
    a.flags.writeable = False
    return a


def tol_for(x) -> np.ndarray:
    """Absolute tolerance plus a relative term for very large magnitudes.

    NWeights near the optimum of the MAX-2-SAT class reach ~1e11, where a
    pure 1e-10 absolute tolerance is below float resolution.
    """
    return TOL + 1e-12 * np.abs(x)


@dataclass(frozen=True)
class CostRange:
    k_opt: int
    k_max: int

    def __post_init__(self) -> None:
        if self.k_opt > self.k_max:
            raise ValueError(f"k_opt={self.k_opt} exceeds k_max={self.k_max}")

    @property
    def size(self) -> int:
        return self.k_max - self.k_opt + 1

    @property
    def costs(self) -> np.ndarray:
        return np.arange(self.k_opt, self.k_max + 1)

    def __contains__(self, k: int) -> bool:
        return self.k_opt <= k <= self.k_max

    def index(self, k: int) -> int:
        return k - self.k_opt


def monotone_mod(p: np.ndarray) -> int:
    """Largest index ``m`` with ``p`` nondecreasing on ``0..m`` (ties allowed)."""
    drops = np.nonzero(np.diff(p) < 0)[0]
    return int(drops[0]) if drops.size else len(p) - 1


@dataclass(frozen=True)
class CostDistribution:
    """Probability ``p(k)`` of each cost level.

    ``k_mod`` follows the monotone definition: the highest cost such that p
    never increases going down towards the optimum.  For sampled or small
    enumerated spaces the histogram is jagged near the optimum and this is
    close to ``k_opt``; :attr:`mode` (the largest most-likely cost) is the
    quantity the TSP analyses use instead.
    """

    range: CostRange
    p: np.ndarray
    _k_mod: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.range.size,):
            raise ValueError(f"p has shape {p.shape}, expected ({self.range.size},)")
        if np.any(p < 0):
            raise ValueError("negative probability")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "_k_mod", self.range.k_opt + monotone_mod(p))

    @classmethod
    def from_weights(cls, weights, k_opt: int = 0) -> CostDistribution:
        w = np.asarray(weights, dtype=float)
        return cls(CostRange(k_opt, k_opt + len(w) - 1), w / w.sum())

    @property
    def k_opt(self) -> int:
        return self.range.k_opt

    @property
    def k_max(self) -> int:
        return self.range.k_max

    @property
    def k_mod(self) -> int:
        return self._k_mod

    @property
    def mode(self) -> int:
        """Largest cost attaining the maximal probability."""
        top = np.nonzero(self.p == self.p.max())[0]
        return self.k_opt + int(top[-1])

    @property
    def costs(self) -> np.ndarray:
        return self.range.costs

    def prob(self, k: int) -> float:
        return float(self.p[k - self.k_opt]) if k in self.range else 0.0

    def window(self, lo: int, hi: int) -> np.ndarray:
        """``p(lo..hi)`` with zeros outside the range."""
        out = np.zeros(hi - lo + 1)
        a, b = max(lo, self.k_opt), min(hi, self.k_max)
        if a <= b:
            out[a - lo : b - lo + 1] = self.p[a - self.k_opt : b - self.k_opt + 1]
        return out


@dataclass(frozen=True)
class NeighbourKernel:
    """Row-stochastic matrix ``pn[k1 - k_opt, k2 - k_opt]``.

    Rows for levels that hold no points are absent (``has_row`` False) and
    all-zero.
    """

    range: CostRange
    n: NeighbourhoodSize
    pn: np.ndarray
    has_row: np.ndarray

    def __post_init__(self) -> None:
        pn = np.asarray(self.pn, dtype=float)
        K = self.range.size
        if pn.shape != (K, K):
            raise ValueError(f"pn has shape {pn.shape}, expected ({K}, {K})")
        if np.any(pn < 0):
            raise ValueError("negative kernel entry")
        object.__setattr__(self, "pn", _frozen(pn))
        object.__setattr__(self, "has_row", _frozen(np.asarray(self.has_row, dtype=bool)))
        if not isinstance(self.n, Infinite) and self.n < 1:
            raise ValueError("neighbourhood size must be positive")

    @classmethod
    def from_counts(cls, crange: CostRange, counts, n: NeighbourhoodSize) -> NeighbourKernel:
        """Normalise a matrix of neighbour counts row by row."""
        c = np.asarray(counts, dtype=float)
        tot = c.sum(axis=1)
        has = tot > 0
        pn = np.zeros_like(c)
        pn[has] = c[has] / tot[has, None]
        return cls(crange, n, pn, has)

    @classmethod
    def blind(cls, dist: CostDistribution, n: NeighbourhoodSize = INFINITE) -> NeighbourKernel:
        """Kernel whose every row equals ``p``: neighbours carry no locality."""
        K = dist.range.size
        return cls(dist.range, n, np.tile(dist.p, (K, 1)), np.ones(K, bool))

    def row(self, k: int) -> np.ndarray:
        if k not in self.range or not self.has_row[k - self.range.k_opt]:
            raise MissingRow(f"kernel has no row for cost {k}")
        return self.pn[k - self.range.k_opt]

    def prob(self, k1: int, k2: int) -> float:
        row = self.row(k1)
        return float(row[k2 - self.range.k_opt]) if k2 in self.range else 0.0

    def validate_against(self, dist: CostDistribution, tol: float = SUM_TOL) -> None:
        """Check the range matches and every populated level has a unit row."""
        if dist.range != self.range:
            raise RangeMismatch(f"distribution {dist.range} vs kernel {self.range}")
        need = dist.p > 0
        if np.any(need & ~self.has_row):
            k = dist.k_opt + int(np.nonzero(need & ~self.has_row)[0][0])
            raise MissingRow(f"p({k}) > 0 but kernel row is absent")
        sums = self.pn[self.has_row].sum(axis=1)
        if np.any(np.abs(sums - 1.0) > tol):
            raise ValueError(f"kernel rows do not sum to 1 (worst {sums.min()!r}..{sums.max()!r})")


# ---------------------------------------------------------------------------
# improvement probabilities


def p_less(dist: CostDistribution, k: int) -> float:
    """Blind probability of improving on ``k``: total mass strictly below it."""
    hi = min(k, dist.k_max + 1) - dist.k_opt
    return float(dist.p[:hi].sum()) if hi > 0 else 0.0


def p_greater(dist: CostDistribution, k: int) -> float:
    """Mass at ``k + 1 .. 2k - k_opt`` (within the distance to the optimum)."""
    return float(dist.window(k + 1, 2 * k - dist.k_opt).sum()) if k > dist.k_opt else 0.0


def p_much_greater(dist: CostDistribution, k: int) -> float:
    """Mass above ``2k - k_opt``."""
    lo = 2 * k - dist.k_opt + 1
    return float(dist.window(lo, dist.k_max).sum()) if lo <= dist.k_max else 0.0


def pn_less(kernel: NeighbourKernel, k: int) -> float:
    """Neighbourhood probability of improving from level ``k``."""
    return float(kernel.row(k)[: k - kernel.range.k_opt].sum())


def pn_greater(kernel: NeighbourKernel, k: int) -> float:
    row = kernel.row(k)
    i = k - kernel.range.k_opt
    return float(row[i + 1 : 2 * i + 1].sum())


def pn_much_greater(kernel: NeighbourKernel, k: int) -> float:
    row = kernel.row(k)
    i = k - kernel.range.k_opt
    return float(row[2 * i + 1 :].sum())


# ---------------------------------------------------------------------------
# NWeights


@dataclass(frozen=True)
class NWeightTable:
    """``r[i, d]`` is the NWeight at cost ``k_opt + i`` and distance ``d``.

    Entries with no mass at ``k +- d`` are NaN (absent).  ``rbar[i]`` averages
    ``r(k, 1..k-k_opt)`` with absent entries counted as zero but still in the
    divisor; ``rbar_t[i, j]`` is the average from ``k`` down to target
    ``k_opt + j`` (NaN unless ``j < i``).
    """

    range: CostRange
    r: np.ndarray
    rbar: np.ndarray
    rbar_t: np.ndarray

    def r_at(self, k: int, delta: int) -> float:
        i = k - self.range.k_opt
        if k not in self.range or delta < 0 or delta >= self.range.size:
            return float("nan")
        return float(self.r[i, delta])

    def rbar_at(self, k: int) -> float:
        return float(self.rbar[k - self.range.k_opt]) if k in self.range else float("nan")

    def rbar_t_at(self, k: int, t: int) -> float:
        if k not in self.range or t not in self.range:
            return float("nan")
        return float(self.rbar_t[k - self.range.k_opt, t - self.range.k_opt])


def _pm(mat_row_getter, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(up, down)`` with ``up[i, d] = x[i, i+d]``, ``down[i, d] = x[i, i-d]``."""
    i = np.arange(K)[:, None]
    d = np.arange(K)[None, :]
    ui, di = i + d, i - d
    up = np.where(ui < K, mat_row_getter(i, np.minimum(ui, K - 1)), 0.0)
    down = np.where(di >= 0, mat_row_getter(i, np.maximum(di, 0)), 0.0)
    return up, down


def plus_minus(dist: CostDistribution, kernel: NeighbourKernel):
    """``p(k+d), p(k-d), pn(k,k+d), pn(k,k-d)`` as ``K x K`` arrays over ``(k, d)``."""
    K = dist.range.size
    p_up, p_down = _pm(lambda i, j: dist.p[j] + 0.0 * i, K)
    pn_up, pn_down = _pm(lambda i, j: kernel.pn[i, j], K)
    return p_up, p_down, pn_up, pn_down


def compute_nweights(dist: CostDistribution, kernel: NeighbourKernel) -> NWeightTable:
    if dist.range != kernel.range:
        raise RangeMismatch(f"distribution {dist.range} vs kernel {kernel.range}")
    K = dist.range.size
    p_up, p_down, pn_up, pn_down = plus_minus(dist, kernel)
    den = p_up + p_down
    num = pn_up + pn_down
    den[:, 0] = dist.p
    num[:, 0] = np.diag(kernel.pn)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    valid_row = kernel.has_row & (dist.p > 0)
    r[~valid_row] = np.nan

    filled = np.nan_to_num(r, nan=0.0)
    filled[:, 0] = 0.0
    csum = np.cumsum(filled, axis=1)  # csum[i, m] = sum_{d=1..m} r(i, d)
    idx = np.arange(K)
    rbar = np.full(K, np.nan)
    pos = idx > 0
    rbar[pos] = csum[idx[pos], idx[pos]] / idx[pos]
    rbar[~valid_row] = np.nan

    gap = idx[:, None] - idx[None, :]  # k - t in index units
    with np.errstate(divide="ignore", invalid="ignore"):
        rbar_t = np.where(gap > 0, csum[idx[:, None], np.clip(gap, 0, K - 1)] / np.where(gap > 0, gap, 1), np.nan)
    rbar_t[~valid_row] = np.nan
    return NWeightTable(dist.range, _frozen(r), _frozen(rbar), _frozen(rbar_t))


@dataclass(frozen=True)
class UnbiasedReport:
    unbiased: bool
    positively_biased: bool
    posr: dict[int, float]


def check_unbiased(dist: CostDistribution, kernel: NeighbourKernel, nweights: NWeightTable, k: int) -> UnbiasedReport:
    """``posr(k, d) = pn(k, k-d) - p(k-d) r(k, d)`` for ``d = 1..k-k_opt``.

    Distances with an absent NWeight are skipped.
    """
    posr: dict[int, float] = {}
    for d in range(1, k - dist.k_opt + 1):
        r = nweights.r_at(k, d)
        if np.isnan(r):
            continue
        posr[d] = kernel.prob(k, k - d) - dist.prob(k - d) * r
    vals = np.array(list(posr.values()))
    unbiased = bool(np.all(vals >= -SUM_TOL)) if vals.size else True
    positive = unbiased and bool(np.any(vals > SUM_TOL))
    return UnbiasedReport(unbiased, positive, posr)


# ---------------------------------------------------------------------------
# per-level sums and condition report


@dataclass(frozen=True)
class LevelSums:
    """Per-level probability totals used by the lemmas and theorems."""

    p_less: np.ndarray
    p_greater: np.ndarray
    p_much_greater: np.ndarray
    pn_less: np.ndarray
    pn_greater: np.ndarray
    pn_much_greater: np.ndarray
    pn_same: np.ndarray
    pbr_less: np.ndarray
    pbr_greater: np.ndarray
    posr: np.ndarray  # posr[i, d]; NaN where undefined


def level_sums(dist: CostDistribution, kernel: NeighbourKernel, nweights: NWeightTable) -> LevelSums:
    K = dist.range.size
    p = dist.p
    pn = kernel.pn
    i = np.arange(K)
    cp = np.concatenate([[0.0], np.cumsum(p)])
    p_lt = cp[i]
    p_gt = cp[np.minimum(2 * i + 1, K)] - cp[np.minimum(i + 1, K)]
    p_gg = cp[K] - cp[np.minimum(2 * i + 1, K)]

    cpn = np.concatenate([np.zeros((K, 1)), np.cumsum(pn, axis=1)], axis=1)
    pn_lt = cpn[i, i]
    pn_gt = cpn[i, np.minimum(2 * i + 1, K)] - cpn[i, np.minimum(i + 1, K)]
    pn_gg = cpn[i, K] - cpn[i, np.minimum(2 * i + 1, K)]

    p_up, p_down, _, pn_down = plus_minus(dist, kernel)
    d = np.arange(K)[None, :]
    inside = (d >= 1) & (d <= i[:, None])
    r0 = np.nan_to_num(nweights.r, nan=0.0)
    pbr_lt = np.where(inside, p_down * r0, 0.0).sum(axis=1)
    pbr_gt = np.where(inside, p_up * r0, 0.0).sum(axis=1)
    posr = np.where(inside & ~np.isnan(nweights.r), pn_down - p_down * r0, np.nan)
    return LevelSums(p_lt, p_gt, p_gg, pn_lt, pn_gt, pn_gg, np.diag(pn).copy(), pbr_lt, pbr_gt, posr)


@dataclass(frozen=True)
class ConditionReport:
    """Per-level truth values of the NSC family of conditions.

    Arrays are indexed by ``k - k_opt``; levels without a kernel row hold
    False (and NaN for real-valued fields).
    """

    range: CostRange
    k_mod: int
    k_ge: int
    defined: np.ndarray
    ge: np.ndarray
    unbiased: np.ndarray
    positively_biased: np.ndarray
    r_monotone: np.ndarray
    nsc: np.ndarray
    full_nsc: np.ndarray
    thm1_holds: np.ndarray
    thm2_holds: np.ndarray
    improves: np.ndarray  # pn^<(k) >= p^<(k)
    rkk_shortcut: np.ndarray  # r(k, k - k_opt) >= 1
    t: np.ndarray  # pn(k,k) - p(k)
    a: np.ndarray  # a^>(k) + a^>>(k)
    weak_cond_slack: np.ndarray  # a - t
    sums: LevelSums

    def at(self, field_name: str, k: int):
        return getattr(self, field_name)[k - self.range.k_opt]


def k_ge_for(k_opt: int, k_mod: int) -> int:
    """Largest ``k`` with ``k + (k - k_opt) <= k_mod``."""
    return k_opt + (k_mod - k_opt) // 2


def _r_monotone_in_delta(r: np.ndarray) -> np.ndarray:
    """Per row: r(k, d) nonincreasing over defined d >= 1."""
    K = r.shape[0]
    out = np.ones(K, bool)
    for i in range(K):
        v = r[i, 1:]
        v = v[~np.isnan(v)]
        if v.size > 1:
            out[i] = bool(np.all(np.diff(v) <= tol_for(v[:-1])))
    return out


def _r_monotone_in_level(r: np.ndarray) -> np.ndarray:
    """``ok[i]`` False if some r(k_i, d) exceeds r at a defined lower level.

    Only distances with ``d <= i`` count (``k >= k1 >= k2 >= d``).
    """
    K = r.shape[0]
    runmin = np.full(K, np.inf)
    ok = np.ones(K, bool)
    for i in range(K):
        row = r[i, : i + 1].copy()
        row[0] = np.nan
        defined = ~np.isnan(row)
        if np.any(row[defined] > runmin[: i + 1][defined] + tol_for(runmin[: i + 1][defined])):
            ok[i] = False
        upd = np.where(defined, row, np.inf)
        runmin[: i + 1] = np.minimum(runmin[: i + 1], upd)
    return ok


def check_conditions(
    dist: CostDistribution,
    kernel: NeighbourKernel,
    nweights: NWeightTable,
    k_mod: int | None = None,
) -> ConditionReport:
    """Evaluate GE, NSC, Full NSC, unbiasedness and the Theorem 1/2 hypotheses.

    ``k_mod`` defaults to ``dist.k_mod``; pass ``dist.mode`` for jagged
    histograms.
    """
    if dist.range != kernel.range:
        raise RangeMismatch(f"distribution {dist.range} vs kernel {kernel.range}")
    K = dist.range.size
    k_opt = dist.k_opt
    k_mod = dist.k_mod if k_mod is None else k_mod
    s = level_sums(dist, kernel, nweights)
    i = np.arange(K)
    defined = kernel.has_row & (dist.p > 0)

    ge = 2 * i <= (k_mod - k_opt)
    posr = s.posr
    has_posr = ~np.isnan(posr)
    neg = np.where(has_posr, posr < -SUM_TOL, False).any(axis=1)
    pos = np.where(has_posr, posr > SUM_TOL, False).any(axis=1)
    unbiased = defined & ~neg
    positively_biased = unbiased & pos
    r_mono = defined & _r_monotone_in_delta(nweights.r)
    nsc = unbiased & r_mono

    # Full NSC(k): NSC at every populated level k' <= k and r nondecreasing as level drops.
    level_ok = _r_monotone_in_level(nweights.r)
    bad = (defined & ~nsc) | ~level_ok
    bad[0] = False  # distances start at 1, so the optimum itself imposes nothing
    full_nsc = defined & (np.cumsum(bad) == 0)

    rbar = nweights.rbar
    improves = defined & (s.pn_less >= s.p_less - TOL)
    thm1 = defined & (i > 0) & (rbar >= 1 - TOL) & (s.pn_less >= rbar * s.p_less - tol_for(rbar * s.p_less))

    r0 = nweights.r
    d = np.arange(K)[None, :]
    beyond = (d > i[:, None]) & ~np.isnan(r0)
    rhi = ~np.where(beyond, r0 > rbar[:, None] + tol_for(rbar[:, None]), False).any(axis=1)
    pbrhigh = s.pbr_greater <= rbar * s.p_greater + tol_for(rbar * s.p_greater)
    unbias_hi = s.pn_greater <= s.pbr_greater + TOL
    same_ok = s.pn_same <= dist.p + TOL
    thm2 = defined & (i > 0) & rhi & pbrhigh & unbias_hi & (rbar < 1) & same_ok

    t = np.where(defined, s.pn_same - dist.p, np.nan)
    a = np.where(defined, (s.p_greater - s.pn_greater) + (s.p_much_greater - s.pn_much_greater), np.nan)
    rkk = np.array([defined[j] and j > 0 and not np.isnan(r0[j, j]) and r0[j, j] >= 1 - TOL for j in range(K)])
    return ConditionReport(
        range=dist.range,
        k_mod=k_mod,
        k_ge=k_ge_for(k_opt, k_mod),
        defined=defined,
        ge=ge,
        unbiased=unbiased,
        positively_biased=positively_biased,
        r_monotone=r_mono,
        nsc=nsc,
        full_nsc=full_nsc,
        thm1_holds=thm1,
        thm2_holds=thm2,
        improves=improves,
        rkk_shortcut=rkk,
        t=t,
        a=a,
        weak_cond_slack=a - t,
        sums=s,
    )


def lemma_violations(
    dist: CostDistribution,
    kernel: NeighbourKernel,
    nweights: NWeightTable,
    report: ConditionReport | None = None,
    tol: float = 1e-9,
) -> dict[str, list[int]]:
    """Levels at which a lemma or theorem conclusion fails under its hypotheses.

    An empty list for every key means the scan found no counterexample.
    """
    rep = report or check_conditions(dist, kernel, nweights)
    s = rep.sums
    K = dist.range.size
    k_opt = dist.k_opt
    rbar = nweights.rbar
    out: dict[str, list[int]] = {k: [] for k in ("lemma1", "lemma2", "lemma3", "theorem1", "theorem2", "partition")}

    def slack(x):
        return tol + 1e-12 * np.abs(x)

    for i in range(K):
        k = k_opt + i
        if not rep.defined[i]:
            continue
        total_p = s.p_less[i] + dist.p[i] + s.p_greater[i] + s.p_much_greater[i]
        total_pn = s.pn_less[i] + s.pn_same[i] + s.pn_greater[i] + s.pn_much_greater[i]
        if abs(total_p - 1) > SUM_TOL * 10 or abs(total_pn - 1) > SUM_TOL * 10:
            out["partition"].append(k)
        if i == 0:
            continue
        if rep.ge[i] and rep.nsc[i]:
            if s.pn_less[i] < rbar[i] * s.p_less[i] - slack(rbar[i] * s.p_less[i]):
                out["lemma1"].append(k)
            beyond = nweights.r[i, i + 1 :]
            beyond = beyond[~np.isnan(beyond)]
            if s.pbr_greater[i] > rbar[i] * s.p_greater[i] + slack(rbar[i] * s.p_greater[i]) or np.any(
                beyond > rbar[i] + slack(rbar[i])
            ):
                out["lemma2"].append(k)
        if rep.unbiased[i] and s.pn_greater[i] > s.pbr_greater[i] + tol:
            out["lemma3"].append(k)
        if (rep.thm1_holds[i] or rep.thm2_holds[i]) and s.pn_less[i] < s.p_less[i] - tol:
            out["theorem1" if rep.thm1_holds[i] else "theorem2"].append(k)
    return out
