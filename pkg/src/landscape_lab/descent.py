"""Expected step counts for blind search and local blind descent.

Local blind descent samples blindly until it hits a cost ``<= k`` and then
probes random neighbours, moving on the first improvement.  ``n`` probes
without improvement send it back to blind sampling.  The run stops at a
cost ``<= t``.

The expected steps from level ``j`` depend linearly on the overall expected
cost ``L`` (through the restart), so each level stores the pair
``steps(j) = A(j) + B(j) * L`` and ``L`` is solved in closed form.  To keep
``1 - sum(pi * B)`` accurate when restarts are rare, the complement
``D(j) = 1 - B(j)`` (the chance a descent from ``j`` succeeds) is carried
directly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .core import (
    INFINITE,
    TOL,
    CostDistribution,
    ConditionReport,
    Infinite,
    NeighbourhoodSize,
    NeighbourKernel,
    NWeightTable,
    check_conditions,
    p_less,
)
from .errors import BadTarget, DeadEnd, Divergent, UnreachableTarget

ImpMode = Literal["normalized", "reweighted"]
DIVERGENT_SAVINGS = -math.inf


@dataclass(frozen=True)
class DescentSpec:
    k: int
    t: int
    n: NeighbourhoodSize = 50

    def validate(self, dist: CostDistribution) -> None:
        if not dist.k_opt <= self.t <= self.k <= dist.k_max:
            raise BadTarget(f"need k_opt <= t <= k <= k_max, got t={self.t}, k={self.k}")


@dataclass(frozen=True)
class DescentResult:
    spec: DescentSpec
    blind_steps: float
    lbd_steps: float
    steps_table: dict[int, float] = field(repr=False)
    savings: float
    beneficial: bool
    restart_probability: float


def blind_steps(dist: CostDistribution, t: int) -> float:
    """Expected uniform samples until one has cost ``<= t``."""
    mass = p_less(dist, t + 1)
    if mass <= 0:
        raise UnreachableTarget(f"no probability mass at or below {t}")
    return 1.0 / mass


def _geometric_terms(q: float, n: int) -> tuple[float, float]:
    """``(sum_{m<=n} m (1-q)^(m-1) q, (1-q)^n)``."""
    if q <= 0:
        return 0.0, 1.0
    if q >= 1:
        return 1.0, 0.0
    nop = math.exp(n * math.log1p(-q))
    if n <= 100_000:
        m = np.arange(1, n + 1)
        imp = float(q * np.sum(m * np.exp((m - 1) * math.log1p(-q))))
    else:
        x = 1.0 - q
        imp = (1.0 - (n + 1) * x**n + n * x ** (n + 1)) / q
    return imp, nop


def imp_and_nop(kernel: NeighbourKernel, k: int, n: NeighbourhoodSize) -> tuple[float, float]:
    """Truncated probe-count sum ``imp(k, n)`` and failure probability ``nop(k, n)``.

    For finite ``n`` this is the raw sum, which equals the conditional mean
    number of probes times the success probability ``1 - nop``.
    """
    row = kernel.row(k)
    q = float(row[: k - kernel.range.k_opt].sum())
    if isinstance(n, Infinite):
        if q <= 0:
            raise DeadEnd(f"no improving neighbour at cost {k}")
        return 1.0 / q, 0.0
    return _geometric_terms(q, int(n))


@dataclass(frozen=True)
class _Coefficients:
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray


def _coefficients(dist, kernel, t: int, n: NeighbourhoodSize, imp_mode: ImpMode, upto: int) -> _Coefficients:
    K = dist.range.size
    k_opt = dist.k_opt
    A = np.zeros(K)
    B = np.zeros(K)
    D = np.ones(K)
    infinite = isinstance(n, Infinite)
    for j in range(t - k_opt + 1, upto - k_opt + 1):
        if not kernel.has_row[j]:
            A[j], B[j], D[j] = np.nan, np.nan, np.nan
            continue
        row = kernel.pn[j, :j]
        q = float(row.sum())
        if q <= 0:
            if infinite:
                A[j], B[j], D[j] = np.inf, 0.0, 0.0
            else:
                A[j], B[j], D[j] = float(n), 1.0, 0.0
            continue
        w = row / q
        live = w > 0
        if np.any(np.isnan(A[:j][live])):
            raise DeadEnd(f"cost {k_opt + j} moves to a level with no kernel row")
        if infinite:
            imp, nop, succ = 1.0 / q, 0.0, 1.0
        else:
            imp, nop = _geometric_terms(q, int(n))
            succ = 1.0 if q >= 1 else -math.expm1(int(n) * math.log1p(-q))
        sa = float(np.dot(w[live], A[:j][live]))
        sb = float(np.dot(w[live], B[:j][live]))
        sd = float(np.dot(w[live], D[:j][live]))
        if infinite:
            probes = imp
        elif imp_mode == "normalized":
            probes = imp  # already the success-weighted probe count
        else:
            probes = succ * imp
        A[j] = (0.0 if infinite else nop * n) + probes + succ * sa
        B[j] = nop + succ * sb
        D[j] = succ * sd
    return _Coefficients(A, B, D)


def _solve(dist, coef: _Coefficients, k: int) -> tuple[float, float]:
    """Return ``(L, restart probability)`` for starting cost ``k``."""
    i = k - dist.k_opt
    pi = dist.p[: i + 1] / dist.p[: i + 1].sum()
    live = pi > 0
    a, d = coef.A[: i + 1][live], coef.D[: i + 1][live]
    if np.any(np.isinf(a)):
        raise DeadEnd(f"descent from some level <= {k} can stall forever")
    if np.any(np.isnan(a)):
        raise DeadEnd(f"a level <= {k} has no kernel row")
    succ = float(np.dot(pi[live], d))
    if succ <= 0:
        raise Divergent(f"local descent from {k} never reaches the target")
    blind_k = 1.0 / dist.p[: i + 1].sum()
    return (blind_k + float(np.dot(pi[live], a))) / succ, max(0.0, 1.0 - succ)


def lbd_steps(
    dist: CostDistribution,
    kernel: NeighbourKernel,
    spec: DescentSpec,
    imp_mode: ImpMode = "normalized",
) -> DescentResult:
    """Expected total steps ``lbd(k, t, n)`` of local blind descent.

    ``imp_mode="normalized"`` charges the expected probe count of an attempt
    exactly (success-weighted).  ``"reweighted"`` multiplies the raw truncated sum
    by the success probability a second time, which undercounts probes.
    """
    spec.validate(dist)
    if imp_mode not in ("normalized", "reweighted"):
        raise ValueError(f"unknown imp_mode {imp_mode!r}")
    blind_t = blind_steps(dist, spec.t)
    coef = _coefficients(dist, kernel, spec.t, spec.n, imp_mode, spec.k)
    L, restart = _solve(dist, coef, spec.k)
    lo = spec.t - dist.k_opt + 1
    table = {dist.k_opt + j: float(coef.A[j] + coef.B[j] * L) for j in range(lo, spec.k - dist.k_opt + 1)}
    savings = (blind_t - L) / blind_t
    return DescentResult(spec, blind_t, L, table, savings, L <= blind_t, restart)


def steps_recursion_residual(dist, kernel, result: DescentResult, imp_mode: ImpMode = "normalized") -> float:
    """Largest relative residual of the steps recursion at the solved ``L``."""
    spec = result.spec
    L = result.lbd_steps
    s = dict(result.steps_table)
    worst = 0.0
    for j, sj in s.items():
        row = kernel.row(j)
        q = float(row[: j - dist.k_opt].sum())
        if q <= 0:
            rhs = spec.n + L if not isinstance(spec.n, Infinite) else math.inf
        else:
            imp, nop = imp_and_nop(kernel, j, spec.n)
            succ = 1.0 - nop
            probes = imp if (imp_mode == "normalized" or isinstance(spec.n, Infinite)) else succ * imp
            nxt = sum(row[i - dist.k_opt] / q * s.get(i, 0.0) for i in range(dist.k_opt, j))
            rhs = (0.0 if isinstance(spec.n, Infinite) else nop * (spec.n + L)) + probes + succ * nxt
        worst = max(worst, abs(rhs - sj) / max(abs(sj), 1.0))
    lhs = blind_steps(dist, spec.k)
    i = spec.k - dist.k_opt
    pi = dist.p[: i + 1] / dist.p[: i + 1].sum()
    rhs_L = lhs + sum(pi[j - dist.k_opt] * v for j, v in s.items())
    return max(worst, abs(rhs_L - L) / L)


# ---------------------------------------------------------------------------
# infinite neighbourhoods and the uniform-above-target bound


def _reachable(kernel: NeighbourKernel, k: int, t: int) -> np.ndarray:
    k_opt = kernel.range.k_opt
    reach = np.zeros(kernel.range.size, bool)
    reach[k - k_opt] = True
    for j in range(k - k_opt, t - k_opt, -1):
        if reach[j]:
            reach[:j] |= kernel.pn[j, :j] > 0
    return reach


def steps_infinite_table(dist: CostDistribution, kernel: NeighbourKernel, k: int, t: int) -> dict[int, float]:
    """Expected probes from every reachable level in ``t+1..k`` with unlimited neighbourhood."""
    if t > k:
        raise BadTarget(f"target {t} is above the start {k}")
    k_opt = dist.k_opt
    reach = _reachable(kernel, k, t)
    s = np.zeros(dist.range.size)
    out: dict[int, float] = {}
    for j in range(t - k_opt + 1, k - k_opt + 1):
        if not reach[j]:
            s[j] = np.nan
            continue
        row = kernel.row(k_opt + j)[:j]
        q = float(row.sum())
        if q <= 0:
            raise DeadEnd(f"level {k_opt + j} is reachable but has no improving neighbour")
        live = row > 0
        s[j] = (1.0 + float(np.dot(row[live], s[:j][live]))) / q
        out[k_opt + j] = float(s[j])
    return out


def steps_infinite(dist: CostDistribution, kernel: NeighbourKernel, k: int, t: int) -> float:
    if k <= t:
        return 0.0
    return steps_infinite_table(dist, kernel, k, t)[k]


def uniform_above(dist: CostDistribution, t: int, k: int) -> np.ndarray:
    """``p^u``: ``p`` up to ``t`` and flat at ``p(t)`` on ``t+1..k`` (unnormalised)."""
    i_t, i_k = t - dist.k_opt, k - dist.k_opt
    pu = np.array(dist.p[: i_k + 1], copy=True)
    pu[i_t + 1 :] = dist.p[i_t]
    return pu


def imp_u(dist: CostDistribution, nweights: NWeightTable, k: int, t: int) -> float:
    """``1 / sum_{i<k} p^u(i) r(k, k-i)``."""
    pu = uniform_above(dist, t, k)
    i = k - dist.k_opt
    r = np.nan_to_num(nweights.r[i, 1 : i + 1][::-1], nan=0.0)  # r(k, k-i') for i' = k_opt..k-1
    mass = float(np.dot(pu[:i], r))
    return 1.0 / mass if mass > 0 else math.inf


def steps_u_table(dist: CostDistribution, nweights: NWeightTable, k: int, t: int) -> dict[int, float]:
    if t > k:
        raise BadTarget(f"target {t} is above the start {k}")
    k_opt = dist.k_opt
    pu = uniform_above(dist, t, k)
    s = np.zeros(k - k_opt + 1)
    out: dict[int, float] = {}
    for j in range(t - k_opt + 1, k - k_opt + 1):
        r = np.nan_to_num(nweights.r[j, 1 : j + 1][::-1], nan=0.0)
        pn_u = pu[:j] * r  # unbiased kernel built from p^u and r
        mass = float(pn_u.sum())
        if mass <= 0:
            s[j] = math.inf
        else:
            s[j] = (1.0 + float(np.dot(pn_u, s[:j]))) / mass
        out[k_opt + j] = float(s[j])
    return out


def steps_u(dist: CostDistribution, nweights: NWeightTable, k: int, t: int) -> float:
    if k <= t:
        return 0.0
    return steps_u_table(dist, nweights, k, t)[k]


# ---------------------------------------------------------------------------
# sufficient conditions


@dataclass(frozen=True)
class Theorem3Check:
    k: int
    t: int
    below_mode: bool
    full_nsc: bool
    rbar_bound: bool
    steps: float
    blind: float
    conclusion: bool

    @property
    def hypotheses(self) -> bool:
        return self.below_mode and self.full_nsc and self.rbar_bound


def theorem3_check(
    dist: CostDistribution,
    kernel: NeighbourKernel,
    nweights: NWeightTable,
    k: int,
    t: int,
    report: ConditionReport | None = None,
) -> Theorem3Check:
    """Evaluate the hypotheses and, independently, ``steps_infinite(k, t) <= blind(t)``."""
    rep = report or check_conditions(dist, kernel, nweights)
    blind = blind_steps(dist, t)
    if k == t:
        return Theorem3Check(k, t, k <= rep.k_mod, bool(rep.at("full_nsc", k)), True, 0.0, blind, True)
    p_t = dist.prob(t)
    bound = p_less(dist, t + 1) / p_t if p_t > 0 else math.inf
    rbar_kt = nweights.rbar_t_at(k, t)
    try:
        s = steps_infinite(dist, kernel, k, t)
    except DeadEnd:
        s = math.inf
    return Theorem3Check(
        k,
        t,
        k <= rep.k_mod,
        bool(rep.at("full_nsc", k)),
        bool(rbar_kt >= bound - TOL),
        s,
        blind,
        s <= blind + 1e-9 * blind,
    )


def target_mass(dist: CostDistribution, nweights: NWeightTable, k: int, t: int) -> float:
    """``sum_{i=k_opt..t} r(k, k-i) p(i)``: neighbour mass landing at or below ``t``."""
    i_k, i_t = k - dist.k_opt, t - dist.k_opt
    r = np.nan_to_num(nweights.r[i_k, i_k - np.arange(i_t + 1)], nan=0.0)
    return float(np.dot(r, dist.p[: i_t + 1]))


def _steps_infinite_all(dist: CostDistribution, kernel: NeighbourKernel, top: int, t: int) -> np.ndarray:
    """``steps_infinite(j, t)`` for every ``j <= top`` (``inf`` where descent can stall)."""
    k_opt = dist.k_opt
    s = np.zeros(top - k_opt + 1)
    for j in range(t - k_opt + 1, top - k_opt + 1):
        if not kernel.has_row[j]:
            s[j] = math.inf
            continue
        row = kernel.pn[j, :j]
        q = float(row.sum())
        live = row > 0
        s[j] = (1.0 + float(np.dot(row[live], s[:j][live]))) / q if q > 0 else math.inf
    return s


@dataclass
class AppendixScan:
    """Counts of checked cases and the ``(name, k, t)`` cases that failed."""

    checked: dict[str, int]
    violations: list[tuple[str, int, int]]

    @property
    def clean(self) -> bool:
        return not self.violations


APPENDIX_CHECKS = ("reduced_steps", "monotone_steps", "fixed_count", "upper_bound", "target_mass", "theorem3")


def appendix_scan(
    dist: CostDistribution,
    kernel: NeighbourKernel,
    nweights: NWeightTable,
    report: ConditionReport | None = None,
    targets=None,
    tol: float = 1e-9,
) -> AppendixScan:
    """Check the step-count bounds at every Full-NSC start and target below it.

    ``reduced_steps``: steps_infinite <= steps_u; ``monotone_steps``: steps_u
    nondecreasing in the start; ``fixed_count``: steps_u(k,t) <= imp_u(k)(k-t);
    ``upper_bound``: imp_u(k)(k-t) <= blind(t) when r̄(k,t) >= p^<(t+1)/p(t);
    ``target_mass``: enough mass at or below t from k carries down to every
    lower start; ``theorem3``: steps_infinite(k,t) <= blind(t) under all
    hypotheses.  Starts are restricted to ``k <= k_mod`` except for
    ``target_mass``, which needs Full NSC only.
    """
    rep = report or check_conditions(dist, kernel, nweights)
    k_opt = dist.k_opt
    full = [int(k) for k in dist.costs if k > k_opt and rep.at("full_nsc", int(k))]
    below = [k for k in full if k <= rep.k_mod]
    checked = dict.fromkeys(APPENDIX_CHECKS, 0)
    bad: list[tuple[str, int, int]] = []
    if not full:
        return AppendixScan(checked, bad)

    def le(a, b):
        return a <= b + tol * max(1.0, abs(b))

    top_all = max(full)
    for t in targets if targets is not None else range(k_opt, top_all):
        p_t = dist.prob(t)
        if p_t <= 0:
            continue
        blind = blind_steps(dist, t)
        bound = p_less(dist, t + 1) / p_t
        starts = [k for k in below if k > t]
        if starts:
            top = max(starts)
            su = steps_u_table(dist, nweights, top, t)
            si = _steps_infinite_all(dist, kernel, top, t)
            for i in range(t + 1, top + 1):
                checked["reduced_steps"] += 1
                if not le(si[i - k_opt], su[i]):
                    bad.append(("reduced_steps", i, t))
                if i < top:
                    checked["monotone_steps"] += 1
                    if not le(su[i], su[i + 1]):
                        bad.append(("monotone_steps", i, t))
            for k in starts:
                iu = imp_u(dist, nweights, k, t)
                checked["fixed_count"] += 1
                if not le(su[k], iu * (k - t)):
                    bad.append(("fixed_count", k, t))
                rbar_ok = nweights.rbar_t_at(k, t) >= bound - TOL
                if rbar_ok:
                    checked["upper_bound"] += 1
                    if not le(iu * (k - t), blind):
                        bad.append(("upper_bound", k, t))
                    checked["theorem3"] += 1
                    if not le(si[k - k_opt], blind):
                        bad.append(("theorem3", k, t))
        mass_starts = [k for k in full if k > t]
        if mass_starts:
            need = p_less(dist, t + 1)
            tm = {k1: target_mass(dist, nweights, k1, t) for k1 in range(t + 1, max(mass_starts) + 1)}
            for k in mass_starts:
                if tm[k] < need:
                    continue
                for k1 in range(t + 1, k + 1):
                    checked["target_mass"] += 1
                    if tm[k1] < need - tol * max(1.0, need):
                        bad.append(("target_mass", k1, t))
    return AppendixScan(checked, bad)


# ---------------------------------------------------------------------------
# savings scans and tables


@dataclass(frozen=True)
class SavingsScan:
    t: int
    n: NeighbourhoodSize
    best_k: int
    best_savings: float
    curve: dict[int, float]


def savings_scan(
    dist: CostDistribution,
    kernel: NeighbourKernel,
    t: int,
    n: NeighbourhoodSize = 50,
    k_range: tuple[int, int] | None = None,
    imp_mode: ImpMode = "normalized",
) -> SavingsScan:
    """Savings of local blind descent for each starting cost (default ``t+1..max(k_mod, t+1)``).

    Starting costs whose descent diverges get ``-inf``.  Ties for the best
    savings go to the lowest starting cost.
    """
    if k_range is None:
        # t at or past k_mod still gets the one-step-above start (or k = t at k_max)
        hi = min(max(dist.k_mod, t + 1), dist.k_max)
        k_range = (min(t + 1, hi), hi)
    lo, hi = k_range
    lo = max(lo, t)
    if hi < lo:
        raise BadTarget(f"empty starting-cost range {lo}..{hi}")
    blind_t = blind_steps(dist, t)
    coef = _coefficients(dist, kernel, t, n, imp_mode, hi)
    curve: dict[int, float] = {}
    for k in range(lo, hi + 1):
        try:
            L, _ = _solve(dist, coef, k)
            curve[k] = (blind_t - L) / blind_t
        except (Divergent, DeadEnd):
            curve[k] = DIVERGENT_SAVINGS
    best_k = max(curve, key=lambda kk: (curve[kk], -kk))
    return SavingsScan(t, n, best_k, curve[best_k], curve)


def table7(space_for_bound, bounds=range(1, 18, 2), t: int = 10, n: NeighbourhoodSize = 50, **kw) -> list[tuple[int, int, float]]:
    """``(lipschitz_bound, starting_cost, savings)`` rows; ``space_for_bound(b)`` gives ``(dist, kernel)``."""
    rows = []
    for b in bounds:
        dist, kernel = space_for_bound(b)
        sc = savings_scan(dist, kernel, t, n, **kw)
        rows.append((b, sc.best_k, sc.best_savings))
    return rows


def table8(dist, kernel, targets=range(0, 41, 5), n: NeighbourhoodSize = 50, **kw) -> list[tuple[int, int, float]]:
    """``(target_cost, starting_cost, savings)`` rows for one landscape."""
    rows = []
    for t in targets:
        sc = savings_scan(dist, kernel, t, n, **kw)
        rows.append((t, sc.best_k, sc.best_savings))
    return rows


def write_table_csv(path: str | Path, header: tuple[str, str, str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for a, b, s in rows:
            w.writerow([a, b, f"{s:.2f}"])


def write_curve_csv(path: str | Path, scan: SavingsScan) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["starting_cost", "savings"])
        for k, s in scan.curve.items():
            w.writerow([k, repr(float(s))])


__all__ = [
    "INFINITE",
    "AppendixScan",
    "appendix_scan",
    "DescentResult",
    "DescentSpec",
    "SavingsScan",
    "Theorem3Check",
    "blind_steps",
    "imp_and_nop",
    "imp_u",
    "lbd_steps",
    "savings_scan",
    "steps_infinite",
    "steps_infinite_table",
    "steps_recursion_residual",
    "steps_u",
    "steps_u_table",
    "table7",
    "table8",
    "target_mass",
    "theorem3_check",
    "uniform_above",
]
