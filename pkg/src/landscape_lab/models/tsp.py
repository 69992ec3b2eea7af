"""Symmetric TSP instances under the 2-opt neighbourhood.

A tour is stored as a permutation of ``0..n-1``.  Enumeration uses the
canonical form "city 0 first, second city smaller than last city", which
lists each undirected tour exactly once.  The 2-opt move ``(i, j)``
(``i + 2 <= j``, not both end edges) removes edges ``(t[i], t[i+1])`` and
``(t[j], t[j+1])`` and reconnects by reversing ``t[i+1..j]``; there are
``n(n-3)/2`` distinct moves per tour.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from pathlib import Path

import numpy as np

from ..core import CostDistribution, CostRange, NeighbourKernel, k_ge_for
from ..errors import TooLarge
from ..rng import SplitMix64

EDGE_MIN, EDGE_MAX = 1, 25
MAX_ENUM_CITIES = 12
CHUNK_TOURS = 1 << 16
SAMPLE_CHUNK = 512


@dataclass(frozen=True)
class TspInstance:
    num_cities: int
    edge_lengths: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        d = np.asarray(self.edge_lengths, dtype=np.int64)
        n = self.num_cities
        if d.shape != (n, n):
            raise ValueError(f"edge matrix shape {d.shape} != ({n}, {n})")
        if not np.array_equal(d, d.T) or np.any(np.diag(d) != 0):
            raise ValueError("edge matrix must be symmetric with zero diagonal")
        off = d[~np.eye(n, dtype=bool)]
        if off.size and (off.min() < EDGE_MIN or off.max() > EDGE_MAX):
            raise ValueError(f"edge lengths must lie in {EDGE_MIN}..{EDGE_MAX}")
        d.flags.writeable = False
        object.__setattr__(self, "edge_lengths", d)

    def tour_cost(self, tour) -> int:
        t = np.asarray(tour)
        return int(self.edge_lengths[t, np.roll(t, -1)].sum())


def tsp_generate(num_cities: int, seed: int) -> TspInstance:
    """Edge lengths drawn from SplitMix64 in lower-triangular row order.

    For ``i = 1..n-1`` and ``j = 0..i-1`` the next output gives
    ``d[i][j] = 1 + u64 % 25``.
    """
    if num_cities < 4:
        raise ValueError("need at least 4 cities")
    g = SplitMix64(seed)
    d = np.zeros((num_cities, num_cities), dtype=np.int64)
    for i in range(1, num_cities):
        for j in range(i):
            d[i, j] = d[j, i] = g.randint(EDGE_MIN, EDGE_MAX)
    return TspInstance(num_cities, d, seed)


def write_instance(instance: TspInstance, path: str | Path) -> None:
    lines = [f"tsp {instance.num_cities} {instance.seed}"]
    d = instance.edge_lengths
    lines += [" ".join(str(int(x)) for x in d[i, :i]) for i in range(1, instance.num_cities)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_instance(path: str | Path) -> TspInstance:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows or rows[0][0] != "tsp" or len(rows[0]) != 3:
        raise ValueError(f"{path}: first line must be 'tsp <num_cities> <seed>'")
    n, seed = int(rows[0][1]), int(rows[0][2])
    if len(rows) != n:
        raise ValueError(f"{path}: expected {n - 1} matrix rows, found {len(rows) - 1}")
    d = np.zeros((n, n), dtype=np.int64)
    for i in range(1, n):
        vals = [int(x) for x in rows[i]]
        if len(vals) != i:
            raise ValueError(f"{path}: row {i} has {len(vals)} entries, expected {i}")
        d[i, :i] = vals
        d[:i, i] = vals
    return TspInstance(n, d, seed)


# ---------------------------------------------------------------------------
# tours and moves


@lru_cache(maxsize=None)
def two_opt_moves(n: int) -> np.ndarray:
    """All ``(i, j)`` edge-position pairs defining distinct 2-opt moves."""
    moves = [(i, j) for i in range(n) for j in range(i + 2, n) if not (i == 0 and j == n - 1)]
    return np.array(moves, dtype=np.int64).reshape(-1, 2)


def apply_two_opt(tour: np.ndarray, i: int, j: int) -> np.ndarray:
    out = tour.copy()
    out[i + 1 : j + 1] = tour[i + 1 : j + 1][::-1]
    return out


def num_tours(n: int) -> int:
    return factorial(n - 1) // 2


def iter_tour_chunks(n: int, chunk: int = CHUNK_TOURS):
    """Yield canonical tours in fixed-size blocks (deterministic order)."""
    perms = (p for p in itertools.permutations(range(1, n)) if p[0] < p[-1])
    while True:
        block = list(itertools.islice(perms, chunk))
        if not block:
            return
        arr = np.empty((len(block), n), dtype=np.int64)
        arr[:, 0] = 0
        arr[:, 1:] = block
        yield arr


def tour_costs(d: np.ndarray, tours: np.ndarray) -> np.ndarray:
    return d[tours, np.roll(tours, -1, axis=1)].sum(axis=1)


def neighbour_costs(d: np.ndarray, tours: np.ndarray, costs: np.ndarray | None = None) -> np.ndarray:
    """Cost of every 2-opt neighbour, shape ``(len(tours), n(n-3)/2)``."""
    n = tours.shape[1]
    nxt = np.roll(tours, -1, axis=1)
    if costs is None:
        costs = tour_costs(d, tours)
    mv = two_opt_moves(n)
    a, b = tours[:, mv[:, 0]], nxt[:, mv[:, 0]]
    c, e = tours[:, mv[:, 1]], nxt[:, mv[:, 1]]
    return costs[:, None] + d[a, c] + d[b, e] - d[a, b] - d[c, e]


def fisher_yates_tours(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """``count`` uniform random tours, shuffled row-wise by Fisher-Yates."""
    tours = np.tile(np.arange(n, dtype=np.int64), (count, 1))
    rows = np.arange(count)
    for i in range(n - 1, 0, -1):
        j = rng.integers(0, i + 1, size=count)
        tmp = tours[rows, i].copy()
        tours[rows, i] = tours[rows, j]
        tours[rows, j] = tmp
    return tours


# ---------------------------------------------------------------------------
# landscapes


@dataclass(frozen=True)
class TspLandscape:
    dist: CostDistribution
    kernel: NeighbourKernel
    k_opt: int
    k_mod: int
    k_ge: int
    tours_evaluated: int
    neighbours_per_tour: int
    sampled: bool


def _count(d, tours):
    costs = tour_costs(d, tours)
    return costs, neighbour_costs(d, tours, costs)


def _landscape(cost_hist: dict[int, int], pair_counts: dict[tuple[int, int], int], lo, hi, n_cities, tours, sampled):
    K = hi - lo + 1
    crange = CostRange(lo, hi)
    hist = np.zeros(K)
    for c, v in cost_hist.items():
        hist[c - lo] = v
    counts = np.zeros((K, K))
    for (c1, c2), v in pair_counts.items():
        counts[c1 - lo, c2 - lo] = v
    dist = CostDistribution(crange, hist / hist.sum())
    kernel = NeighbourKernel.from_counts(crange, counts, len(two_opt_moves(n_cities)))
    k_opt = lo + int(np.nonzero(hist)[0][0])
    mode = dist.mode
    return TspLandscape(dist, kernel, k_opt, mode, k_ge_for(k_opt, mode), tours, len(two_opt_moves(n_cities)), sampled)


class _Counter:
    """Commutative merge of integer histograms (order-independent)."""

    def __init__(self, base: int, size: int) -> None:
        self.base, self.size = base, size
        self.hist = np.zeros(size, dtype=np.int64)
        self.pairs = np.zeros(size * size, dtype=np.int64)

    def add(self, costs: np.ndarray, ncosts: np.ndarray) -> None:
        c = costs - self.base
        self.hist += np.bincount(c, minlength=self.size)
        flat = (c[:, None] * self.size + (ncosts - self.base)).ravel()
        self.pairs += np.bincount(flat, minlength=self.size * self.size)


def _finish(counter: _Counter, n_cities: int, tours: int, sampled: bool) -> TspLandscape:
    K = counter.size
    pairs = counter.pairs.reshape(K, K)
    used = np.nonzero((counter.hist > 0) | (pairs.sum(axis=0) > 0))[0]
    a, b = int(used[0]), int(used[-1])
    hist = {counter.base + i: int(counter.hist[i]) for i in range(a, b + 1) if counter.hist[i]}
    nz = np.argwhere(pairs[a : b + 1, a : b + 1] > 0)
    pc = {(counter.base + a + int(i), counter.base + a + int(j)): int(pairs[a + i, a + j]) for i, j in nz}
    return _landscape(hist, pc, counter.base + a, counter.base + b, n_cities, tours, sampled)


def _bounds(d: np.ndarray) -> tuple[int, int]:
    n = d.shape[0]
    off = np.sort(d[np.triu_indices(n, 1)])
    return int(off[:n].sum()), int(off[-n:].sum())


def tsp_enumerate(instance: TspInstance, threads: int = 1, max_cities: int = MAX_ENUM_CITIES) -> TspLandscape:
    """Exact cost distribution and 2-opt kernel over all ``(n-1)!/2`` tours."""
    n = instance.num_cities
    if n > max_cities:
        raise TooLarge(f"{n} cities means {num_tours(n)} tours; enumeration budget is {max_cities} cities")
    d = instance.edge_lengths
    lo, hi = _bounds(d)
    counter = _Counter(lo, hi - lo + 1)
    chunks = iter_tour_chunks(n)
    if threads <= 1:
        for tours in chunks:
            counter.add(*_count(d, tours))
    else:
        with ThreadPoolExecutor(threads) as ex:
            for costs, ncosts in ex.map(lambda t: _count(d, t), chunks):
                counter.add(costs, ncosts)
    return _finish(counter, n, num_tours(n), sampled=False)


def tsp_sample(instance: TspInstance, num_samples: int, seed: int, threads: int = 1) -> TspLandscape:
    """Estimate ``p`` and ``pn`` from uniform random tours and all their 2-opt neighbours.

    Tours come in fixed blocks of 512, block ``b`` drawing from a generator
    seeded with ``(seed, b)``, so results do not depend on ``threads``.
    The kernel is normalised by neighbour counts; ``k_opt`` is the best
    sampled cost, not the true optimum.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    d = instance.edge_lengths
    n = instance.num_cities
    lo, hi = _bounds(d)
    counter = _Counter(lo, hi - lo + 1)
    sizes = [min(SAMPLE_CHUNK, num_samples - s) for s in range(0, num_samples, SAMPLE_CHUNK)]

    def block(args):
        b, size = args
        rng = np.random.default_rng([seed & ((1 << 64) - 1), b])
        return _count(d, fisher_yates_tours(rng, size, n))

    jobs = list(enumerate(sizes))
    if threads <= 1:
        results = map(block, jobs)
        for costs, ncosts in results:
            counter.add(costs, ncosts)
    else:
        with ThreadPoolExecutor(threads) as ex:
            for costs, ncosts in ex.map(block, jobs):
                counter.add(costs, ncosts)
    return _finish(counter, n, num_samples, sampled=True)
