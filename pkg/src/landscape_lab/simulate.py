"""Monte Carlo runs of blind search and local blind descent.

Runs are processed in fixed blocks of ``CHUNK_RUNS``; block ``b`` draws from
``default_rng([seed, b])``.  The block layout never depends on the thread
count, so results are identical for any ``threads``.

Within a run, a phase of identical independent trials is drawn in one go:
the number of blind draws until a cost ``<= k`` is geometric, and the
landing cost follows ``p`` restricted to ``<= k``.  The same holds for
neighbour probes from a fixed level.  This is the same law as drawing
trial by trial, but costs one random number per phase.
"""

from __future__ import annotations

import csv
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .core import CostDistribution, Infinite, NeighbourKernel, p_less
from .descent import DescentSpec, blind_steps, lbd_steps
from .errors import UnreachableTarget
from .models.tsp import TspInstance, apply_two_opt, two_opt_moves

CHUNK_RUNS = 8192
DEFAULT_STEP_CAP = 10**7
BLIND, DESCENT = "blind", "descent"


@dataclass(frozen=True)
class SimConfig:
    runs: int
    seed: int
    spec: DescentSpec
    step_cap: int = DEFAULT_STEP_CAP
    threads: int = 1

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.step_cap < 1:
            raise ValueError("step_cap must be >= 1")


@dataclass(frozen=True)
class SimResult:
    runs: int
    mean_steps: float
    std_error: float
    capped_runs: int
    empirical_success_rate: float  # share of descent attempts reaching t without a restart
    mean_blind_draws: float
    mean_probes: float
    trace_hash: str | None = field(default=None, compare=False)

    def agrees_with(self, expected: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean_steps - expected) <= sigmas * self.std_error

    def z_score(self, expected: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean_steps == expected else math.inf
        return (self.mean_steps - expected) / self.std_error


def _seed_key(seed: int) -> int:
    return seed & ((1 << 64) - 1)


def _chunk_sizes(runs: int) -> list[int]:
    return [min(CHUNK_RUNS, runs - s) for s in range(0, runs, CHUNK_RUNS)]


def _map_chunks(fn, runs: int, seed: int, threads: int):
    jobs = [(b, size, np.random.default_rng([_seed_key(seed), b])) for b, size in enumerate(_chunk_sizes(runs))]
    if threads <= 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(lambda j: fn(*j), jobs))


@dataclass
class _Chunk:
    steps: np.ndarray
    blind: np.ndarray
    probes: np.ndarray
    capped: np.ndarray
    attempts: int = 0
    successes: int = 0
    trace: list = field(default_factory=list)


def _summarise(chunks: list[_Chunk], trace_path: str | Path | None = None, always_hash: bool = False) -> SimResult:
    steps = np.concatenate([c.steps for c in chunks])
    capped = np.concatenate([c.capped for c in chunks])
    blind = np.concatenate([c.blind for c in chunks])
    probes = np.concatenate([c.probes for c in chunks])
    ok = ~capped
    n_ok = int(ok.sum())
    if n_ok:
        mean = float(steps[ok].mean())
        se = float(steps[ok].std(ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else 0.0
    else:
        mean, se = math.nan, math.nan
    attempts = sum(c.attempts for c in chunks)
    succ = sum(c.successes for c in chunks)
    rate = succ / attempts if attempts else float(n_ok) / len(steps)
    digest = None
    if always_hash or any(c.trace for c in chunks):
        rows = []
        offset = 0
        for c in chunks:
            rows += [(offset + r, ph, st, co) for r, ph, st, co in c.trace]
            offset += len(c.steps)
        rows.sort(key=lambda x: (x[0], x[2], 0 if x[1] == BLIND else 1))
        digest = _write_trace(rows, trace_path)
    return SimResult(
        runs=len(steps),
        mean_steps=mean,
        std_error=se,
        capped_runs=int(capped.sum()),
        empirical_success_rate=rate,
        mean_blind_draws=float(blind[ok].mean()) if n_ok else math.nan,
        mean_probes=float(probes[ok].mean()) if n_ok else math.nan,
        trace_hash=digest,
    )


def _write_trace(rows, path) -> str:
    h = hashlib.sha256()
    lines = ["run,phase,step,cost"] + [f"{r},{ph},{st},{co}" for r, ph, st, co in rows]
    for ln in lines:
        h.update(ln.encode() + b"\n")
    if path is not None:
        Path(path).write_text("\n".join(lines) + "\n")
    return h.hexdigest()


# ---------------------------------------------------------------------------
# blind search


def simulate_blind(
    dist: CostDistribution,
    t: int,
    cfg: SimConfig,
    method: Literal["auto", "draws", "geometric"] = "auto",
) -> SimResult:
    """Sample costs from ``p`` until one is ``<= t``; every sample is one step.

    ``method="draws"`` draws one cost per step.  ``"geometric"`` draws the
    count directly and is what ``"auto"`` picks once ``blind(t)`` exceeds 1e4.
    """
    P = p_less(dist, t + 1)
    if P <= 0:
        raise UnreachableTarget(f"no probability mass at or below {t}")
    if method == "auto":
        method = "geometric" if 1.0 / P > 1e4 else "draws"
    cdf = np.cumsum(dist.p)
    cdf /= cdf[-1]
    cap = cfg.step_cap
    thresh = t - dist.k_opt

    def run(_b, size, rng):
        if method == "geometric":
            steps = rng.geometric(P, size).astype(np.int64)
        else:
            steps = np.zeros(size, np.int64)
            hit = np.zeros(size, bool)
            active = np.arange(size)
            while active.size:
                steps[active] += 1
                idx = np.searchsorted(cdf, rng.random(active.size), side="right")
                hit[active] = idx <= thresh
                active = active[~hit[active] & (steps[active] < cap)]
        capped = steps > cap if method == "geometric" else ~hit
        return _Chunk(steps.astype(float), steps.astype(float), np.zeros(size), capped)

    return _summarise(_map_chunks(run, cfg.runs, cfg.seed, cfg.threads))


# ---------------------------------------------------------------------------
# local blind descent on a kernel


class _ImprovingSampler:
    """Inverse-CDF draws from ``pn(j, . < j) / pn^<(j)`` for many rows at once."""

    def __init__(self, kernel: NeighbourKernel) -> None:
        pn = kernel.pn
        K = pn.shape[0]
        lower = np.tril(pn, k=-1)
        self.q = lower.sum(axis=1)
        cum = np.cumsum(lower, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            cum = np.where(self.q[:, None] > 0, cum / np.where(self.q > 0, self.q, 1.0)[:, None], 1.0)
        cum = np.minimum(cum, 1.0)
        self.K = K
        self.flat = (np.arange(K)[:, None] + cum).ravel()
        last = np.zeros(K, np.int64)
        for j in range(K):
            nz = np.nonzero(lower[j] > 0)[0]
            last[j] = nz[-1] if nz.size else 0
        self.last = last

    def draw(self, rng: np.random.Generator, rows: np.ndarray) -> np.ndarray:
        u = rng.random(rows.size)
        idx = np.searchsorted(self.flat, rows + u, side="right") - rows * self.K
        return np.minimum(idx, self.last[rows])


def simulate_lbd(
    dist: CostDistribution,
    kernel: NeighbourKernel,
    cfg: SimConfig,
    trace_path: str | Path | None = None,
    trace: bool = False,
) -> SimResult:
    """Local blind descent with independent neighbour probes.

    A blind phase lasts until a cost ``<= k``.  From level ``j`` the probes
    until the first improvement are geometric in ``pn^<(j)``; more than
    ``n`` means ``n`` wasted probes and a fresh blind phase.
    """
    spec = cfg.spec
    spec.validate(dist)
    k_opt = dist.k_opt
    ik, it = spec.k - k_opt, spec.t - k_opt
    Pk = float(dist.p[: ik + 1].sum())
    if Pk <= 0:
        raise UnreachableTarget(f"no probability mass at or below {spec.k}")
    land = np.cumsum(dist.p[: ik + 1]) / Pk
    sampler = _ImprovingSampler(kernel)
    infinite = isinstance(spec.n, Infinite)
    n = None if infinite else int(spec.n)
    cap = cfg.step_cap
    keep_trace = trace or trace_path is not None

    def run(_b, size, rng):
        steps = np.zeros(size, np.int64)
        blind = np.zeros(size, np.int64)
        probes = np.zeros(size, np.int64)
        capped = np.zeros(size, bool)
        level = np.full(size, -1, np.int64)  # -1: in blind phase
        active = np.arange(size)
        attempts = successes = 0
        tr: list = []
        while active.size:
            in_blind = level[active] < 0
            a = active[in_blind]
            if a.size:
                g = rng.geometric(Pk, a.size)
                steps[a] += g
                blind[a] += g
                lv = np.minimum(np.searchsorted(land, rng.random(a.size), side="right"), ik)
                level[a] = lv
                attempts += int(np.count_nonzero(lv > it))
                if keep_trace:
                    tr += [(int(r), BLIND, int(s), int(k_opt + c)) for r, s, c in zip(a, steps[a], lv)]
            d = active[~in_blind]
            if d.size:
                lv = level[d]
                q = sampler.q[lv]
                ok = q > 0
                g = np.full(d.size, np.iinfo(np.int64).max)
                if ok.any():
                    g[ok] = rng.geometric(q[ok])
                if infinite:
                    fail = ~ok
                    capped[d[fail]] = True
                    g[fail] = 0
                else:
                    fail = g > n
                    g[fail] = n
                steps[d] += g
                probes[d] += g
                moved = ~fail
                new = sampler.draw(rng, lv[moved]) if moved.any() else lv[moved]
                level[d[moved]] = new
                level[d[fail]] = -1
                if keep_trace:
                    for r, s, c in zip(d[moved], steps[d[moved]], new):
                        tr.append((int(r), DESCENT, int(s), int(k_opt + c)))
                    for r, s, c in zip(d[fail], steps[d[fail]], lv[fail]):
                        tr.append((int(r), "restart", int(s), int(k_opt + c)))
            done = (level[active] >= 0) & (level[active] <= it)
            successes += int(np.count_nonzero(done & ~in_blind))
            over = steps[active] > cap
            capped[active[over & ~done]] = True
            active = active[~done & ~capped[active]]
        return _Chunk(steps.astype(float), blind.astype(float), probes.astype(float), capped, attempts, successes, tr)

    return _summarise(_map_chunks(run, cfg.runs, cfg.seed, cfg.threads), trace_path)


def probe_level(kernel: NeighbourKernel, k: int, probes: int, seed: int) -> tuple[float, float, float, float]:
    """Draw ``probes`` neighbour costs of level ``k``.

    Returns ``(improve frequency, its standard error, mean gain, its standard error)``
    where gain is ``max(k - k', 0)``.
    """
    row = kernel.row(k)
    rng = np.random.default_rng([_seed_key(seed), 0])
    cdf = np.cumsum(row)
    cdf /= cdf[-1]
    nb = kernel.range.k_opt + np.searchsorted(cdf, rng.random(probes), side="right")
    gain = np.maximum(k - nb, 0).astype(float)
    hit = (gain > 0).astype(float)
    se = lambda x: float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return float(hit.mean()), se(hit), float(gain.mean()), se(gain)


# ---------------------------------------------------------------------------
# concrete TSP descent


def simulate_tsp_descent(
    instance: TspInstance,
    cfg: SimConfig,
    without_replacement: bool = False,
    trace_path: str | Path | None = None,
) -> SimResult:
    """First-improvement 2-opt descent on real tours with blind restarts.

    Uses ``cfg.spec.k`` as starting cost and ``cfg.spec.t`` as target.  With
    ``without_replacement`` each level probes moves in a fresh random order
    and restarts only at a genuine 2-opt local optimum (or after ``n`` moves).
    """
    spec = cfg.spec
    if spec.t > spec.k:
        raise ValueError("target above start")
    d = instance.edge_lengths
    N = instance.num_cities
    moves = two_opt_moves(N)
    M = len(moves)
    n = M if isinstance(spec.n, Infinite) else int(spec.n)
    if without_replacement:
        n = min(n, M)
    cap = cfg.step_cap

    def cost(tour):
        return int(d[tour, np.roll(tour, -1)].sum())

    def run(_b, size, rng):
        steps = np.zeros(size)
        blind = np.zeros(size)
        probes = np.zeros(size)
        capped = np.zeros(size, bool)
        counts = [0, 0]  # descent attempts, attempts reaching t
        tr: list = []

        for r in range(size):
            st = {"s": 0, "bl": 0, "pr": 0}

            def blind_phase():
                while True:
                    tour = rng.permutation(N)
                    c = cost(tour)
                    st["s"] += 1
                    st["bl"] += 1
                    if c <= spec.k or st["s"] > cap:
                        tr.append((r, BLIND, st["s"], c))
                        return tour, c

            tour, c = blind_phase()
            while c > spec.t and st["s"] <= cap:
                counts[0] += 1
                while c > spec.t and st["s"] <= cap:
                    order = rng.permutation(M)[:n] if without_replacement else rng.integers(0, M, n)
                    improved = False
                    for m in order:
                        i, j = moves[m]
                        a, b_, cc, e = tour[i], tour[i + 1], tour[j], tour[(j + 1) % N]
                        delta = int(d[a, cc] + d[b_, e] - d[a, b_] - d[cc, e])
                        st["s"] += 1
                        st["pr"] += 1
                        if delta < 0:
                            tour = apply_two_opt(tour, int(i), int(j))
                            c += delta
                            improved = True
                            break
                    tr.append((r, DESCENT if improved else "restart", st["s"], c))
                    if not improved:
                        break
                if c <= spec.t:
                    counts[1] += 1
                    break
                tour, c = blind_phase()
            steps[r], blind[r], probes[r] = st["s"], st["bl"], st["pr"]
            capped[r] = st["s"] > cap
        return _Chunk(steps, blind, probes, capped, counts[0], counts[1], tr)

    return _summarise(_map_chunks(run, cfg.runs, cfg.seed, cfg.threads), trace_path, always_hash=True)


@dataclass(frozen=True)
class Agreement:
    label: str
    analytic: float
    sim: SimResult

    @property
    def z(self) -> float:
        return self.sim.z_score(self.analytic)

    @property
    def ok(self) -> bool:
        return self.sim.capped_runs == 0 and abs(self.z) <= 3.0


def blind_agreement(dist, t, cfg, label="", **kw) -> Agreement:
    return Agreement(label, blind_steps(dist, t), simulate_blind(dist, t, cfg, **kw))


def lbd_agreement(dist, kernel, cfg, label="") -> Agreement:
    return Agreement(label, lbd_steps(dist, kernel, cfg.spec).lbd_steps, simulate_lbd(dist, kernel, cfg))


def write_sim_csv(path: str | Path, rows: list[Agreement]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "analytic", "mean_steps", "std_error", "z", "capped_runs", "success_rate", "agrees_3sigma"])
        for a in rows:
            s = a.sim
            w.writerow([a.label, repr(a.analytic), repr(s.mean_steps), repr(s.std_error), f"{a.z:.3f}", s.capped_runs,
                        repr(s.empirical_success_rate), int(a.ok)])
