import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from landscape_lab.core import CostDistribution
from landscape_lab.errors import TooLarge
from landscape_lab.models.tsp import (
    TspInstance,
    apply_two_opt,
    fisher_yates_tours,
    iter_tour_chunks,
    neighbour_costs,
    num_tours,
    read_instance,
    tour_costs,
    tsp_enumerate,
    tsp_generate,
    tsp_sample,
    two_opt_moves,
    write_instance,
)
from landscape_lab.rng import SplitMix64

from oracles import tsp_bruteforce


def test_splitmix_reference_vector():
    g = SplitMix64(0)
    assert [g.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_generate_deterministic_and_in_range():
    a, b = tsp_generate(10, 42), tsp_generate(10, 42)
    assert np.array_equal(a.edge_lengths, b.edge_lengths)
    assert not np.array_equal(a.edge_lengths, tsp_generate(10, 43).edge_lengths)
    d = a.edge_lengths
    assert np.array_equal(d, d.T) and np.all(np.diag(d) == 0)
    assert len(d[np.triu_indices(10, 1)]) == 45


def test_thousand_edges_in_range():
    d = tsp_generate(46, 7).edge_lengths  # 1035 edges
    e = d[np.triu_indices(46, 1)]
    assert e.size >= 1000 and e.min() >= 1 and e.max() <= 25


def test_instance_validation():
    with pytest.raises(ValueError):
        TspInstance(3, np.ones((3, 3), int), 0)
    with pytest.raises(ValueError):
        tsp_generate(3, 0)


def test_instance_file_round_trip(tmp_path):
    inst = tsp_generate(9, 5)
    path = tmp_path / "i.txt"
    write_instance(inst, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "tsp 9 5" and len(lines[1].split()) == 1 and len(lines[-1].split()) == 8
    back = read_instance(path)
    assert back.seed == 5 and np.array_equal(back.edge_lengths, inst.edge_lengths)


def test_move_count_and_tour_count():
    assert len(two_opt_moves(10)) == 35
    assert num_tours(10) == 181440
    total = sum(len(c) for c in iter_tour_chunks(7))
    assert total == num_tours(7)


@pytest.mark.parametrize("n, seed", [(4, 1), (5, 2), (6, 3)])
def test_enumeration_matches_bruteforce(n, seed):
    inst = tsp_generate(n, seed)
    costs, neigh = tsp_bruteforce(inst.edge_lengths)
    assert len(costs) == num_tours(n)
    land = tsp_enumerate(inst)
    lo = land.dist.k_opt
    hist = np.bincount(np.array(costs) - lo, minlength=land.dist.range.size)
    assert np.allclose(land.dist.p, hist / hist.sum())
    counts = np.zeros((land.dist.range.size,) * 2)
    for c, nb in zip(costs, neigh):
        for x in nb:
            counts[c - lo, x - lo] += 1
    rows = counts.sum(axis=1)
    ok = rows > 0
    assert np.allclose(land.kernel.pn[ok], counts[ok] / rows[ok, None])
    assert land.neighbours_per_tour == n * (n - 3) // 2


def test_four_city_by_hand():
    d = np.array([[0, 1, 2, 3], [1, 0, 4, 5], [2, 4, 0, 6], [3, 5, 6, 0]])
    inst = TspInstance(4, d, 0)
    land = tsp_enumerate(inst)
    # tours: 0-1-2-3 (1+4+6+3=14), 0-1-3-2 (1+5+6+2=14), 0-2-1-3 (2+4+5+3=14)
    assert land.dist.range.k_opt == 14 and land.dist.range.size == 1
    assert land.kernel.pn[0, 0] == 1.0


@pytest.fixture(scope="module")
def tsp10():
    inst = tsp_generate(10, 0)
    return inst, tsp_enumerate(inst)


def test_ten_city_enumeration(tsp10):
    inst, land = tsp10
    assert land.tours_evaluated == 181440 and land.neighbours_per_tour == 35
    assert land.kernel.n == 35
    land.kernel.validate_against(land.dist, tol=1e-12)
    assert land.k_mod == land.dist.mode
    assert land.k_ge == land.k_opt + (land.k_mod - land.k_opt) // 2


def test_spot_check_thousand_tours(tsp10):
    inst, land = tsp10
    tours = next(iter_tour_chunks(10, chunk=1000))
    costs = tour_costs(inst.edge_lengths, tours)
    for tour, c in zip(tours, costs):
        assert inst.tour_cost(tour) == c
        assert land.dist.prob(int(c)) > 0


@given(st.integers(0, 2**32), st.integers(0, 34), st.integers(5, 12))
def test_two_opt_delta_matches_reevaluation(seed, m, n):
    inst = tsp_generate(n, seed % 1000)
    rng = np.random.default_rng(seed)
    tour = rng.permutation(n)
    moves = two_opt_moves(n)
    i, j = moves[m % len(moves)]
    nc = neighbour_costs(inst.edge_lengths, tour[None, :])[0, m % len(moves)]
    assert nc == inst.tour_cost(apply_two_opt(tour, int(i), int(j)))


def test_enumeration_thread_independent(tsp10):
    inst, land = tsp10
    other = tsp_enumerate(inst, threads=3)
    assert np.array_equal(other.kernel.pn, land.kernel.pn) and np.array_equal(other.dist.p, land.dist.p)


def test_too_large():
    with pytest.raises(TooLarge):
        tsp_enumerate(tsp_generate(13, 0))


def test_fisher_yates_uniform_permutations():
    rng = np.random.default_rng(0)
    tours = fisher_yates_tours(rng, 60000, 3)
    assert np.all(np.sort(tours, axis=1) == np.arange(3))
    codes = tours[:, 0] * 9 + tours[:, 1] * 3 + tours[:, 2]
    freq = np.unique(codes, return_counts=True)[1] / 60000
    assert len(freq) == 6 and np.allclose(freq, 1 / 6, atol=0.01)


def test_sample_rejects_zero():
    with pytest.raises(ValueError):
        tsp_sample(tsp_generate(8, 0), 0, 1)


def test_sample_deterministic_and_thread_independent():
    inst = tsp_generate(12, 3)
    a = tsp_sample(inst, 2000, 9)
    b = tsp_sample(inst, 2000, 9, threads=4)
    assert np.array_equal(a.dist.p, b.dist.p) and np.array_equal(a.kernel.pn, b.kernel.pn)
    assert a.sampled


def test_sample_agrees_with_enumeration():
    inst = tsp_generate(8, 11)
    full = tsp_enumerate(inst)
    N = 30000
    s = tsp_sample(inst, N, 4)
    lo = full.dist.k_opt
    for k in full.dist.costs:
        p = full.dist.prob(int(k))
        se = np.sqrt(p * (1 - p) / N)
        est = s.dist.prob(int(k))
        assert abs(est - p) <= 3 * se + 1e-12 or (p < 1e-3 and abs(est - p) <= 5 / N), (k, p, est)
    assert s.dist.range.k_opt >= lo


def test_sampled_rows_absent_without_samples():
    inst = tsp_generate(30, 1)
    s = tsp_sample(inst, 50, 0)
    # neighbour costs widen the range beyond sampled tour costs; those rows are absent
    assert not s.kernel.has_row.all()
    assert isinstance(s.dist, CostDistribution)
