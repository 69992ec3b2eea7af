import csv

import numpy as np
import pytest

from landscape_lab.core import INFINITE, pn_less
from landscape_lab.descent import DescentSpec, blind_steps, lbd_steps
from landscape_lab.errors import UnreachableTarget
from landscape_lab.models import tsp_enumerate, tsp_generate
from landscape_lab.rates import expected_improvement
from landscape_lab.simulate import (
    Agreement,
    SimConfig,
    blind_agreement,
    lbd_agreement,
    probe_level,
    simulate_blind,
    simulate_lbd,
    simulate_tsp_descent,
    write_sim_csv,
)


def cfg(runs, seed=1, k=10, t=10, n=50, **kw):
    return SimConfig(runs, seed, DescentSpec(k, t, n), **kw)


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(0)
    with pytest.raises(ValueError):
        cfg(10, step_cap=0)


@pytest.mark.parametrize("method", ["draws", "geometric"])
def test_blind_agrees_on_toy(toy, method):
    d, _ = toy(10)
    a = blind_agreement(d, 10, cfg(20000), method=method)
    assert a.analytic == pytest.approx(201 / 11)
    assert a.ok, a.z
    assert a.sim.mean_probes == 0.0


def test_blind_unreachable():
    from landscape_lab.core import CostDistribution

    with pytest.raises(UnreachableTarget):
        simulate_blind(CostDistribution.from_weights([0, 1]), 0, cfg(5, k=1, t=0))


def test_same_seed_same_result_and_thread_independence(bench):
    d, k = bench(7)
    c1 = cfg(20000, seed=5, k=23)
    a = simulate_lbd(d, k, c1)
    b = simulate_lbd(d, k, SimConfig(20000, 5, c1.spec, threads=3))
    assert a == b
    assert simulate_lbd(d, k, cfg(20000, seed=6, k=23)) != a


def test_lbd_agrees_on_benchmark(bench):
    d, k = bench(7)
    a = lbd_agreement(d, k, cfg(20000, seed=3, k=23, step_cap=10**18))
    assert a.ok, a.z
    assert 0 < a.sim.empirical_success_rate < 1


def test_blind_kernel_matches_blind_search(toy):
    d, k = toy(200)
    res = lbd_steps(d, k, DescentSpec(60, 10))
    assert res.lbd_steps == pytest.approx(blind_steps(d, 10), rel=1e-10)
    a = lbd_agreement(d, k, cfg(20000, seed=2, k=60))
    assert a.ok, a.z


def test_start_at_target_never_probes(bench):
    d, k = bench(5)
    sim = simulate_lbd(d, k, cfg(5000, k=20, t=20))
    assert sim.mean_probes == 0.0
    assert sim.agrees_with(blind_steps(d, 20))


def test_unlimited_probes(toy):
    d, k = toy(10)
    a = lbd_agreement(d, k, cfg(20000, seed=4, k=60, t=5, n=INFINITE))
    assert a.ok and a.sim.empirical_success_rate == 1.0


def test_capped_runs_are_reported(bench):
    d, k = bench(7)
    sim = simulate_lbd(d, k, cfg(200, k=23, step_cap=1000))
    assert sim.capped_runs > 0
    assert not Agreement("x", 1.0, sim).ok


def test_probe_level_matches_kernel(toy):
    _, k = toy(50)
    freq, se, gain, gse = probe_level(k, 30, 200000, seed=9)
    assert abs(freq - pn_less(k, 30)) <= 3 * se
    en = expected_improvement(*toy(50), 30).en_imp
    assert abs(gain - en) <= 3 * gse


def test_trace_step_accounting(tmp_path, bench):
    d, k = bench(5)
    path = tmp_path / "trace.csv"
    sim = simulate_lbd(d, k, cfg(300, seed=8, k=40, t=20, n=10, step_cap=10**18), trace_path=path)
    rows = list(csv.DictReader(open(path)))
    assert sim.trace_hash is not None
    by_run: dict[int, list] = {}
    for r in rows:
        by_run.setdefault(int(r["run"]), []).append(r)
    assert sorted(by_run) == list(range(300))
    finals = []
    for seq in by_run.values():
        assert seq[0]["phase"] == "blind"
        steps = [int(r["step"]) for r in seq]
        assert steps == sorted(steps)
        for prev, nxt in zip(seq, seq[1:]):
            if prev["phase"] == "restart":
                assert nxt["phase"] == "blind"
            if nxt["phase"] == "descent":
                assert int(nxt["cost"]) < int(prev["cost"])
        assert int(seq[-1]["cost"]) <= 20
        finals.append(steps[-1])
    assert np.mean(finals) == pytest.approx(sim.mean_steps)


def test_sim_csv(tmp_path, toy):
    d, _ = toy(10)
    rows = [blind_agreement(d, 10, cfg(1000), label="toy")]
    write_sim_csv(tmp_path / "s.csv", rows)
    got = list(csv.reader(open(tmp_path / "s.csv")))
    assert got[0][:3] == ["label", "analytic", "mean_steps"] and got[1][0] == "toy"


# ---------------------------------------------------------------------------
# concrete TSP descent


@pytest.fixture(scope="module")
def small_tsp():
    inst = tsp_generate(8, 2)
    return inst, tsp_enumerate(inst)


def test_tsp_target_at_start_never_probes(small_tsp):
    inst, land = small_tsp
    k = land.dist.k_max
    sim = simulate_tsp_descent(inst, cfg(200, k=k, t=k, n=20))
    assert sim.mean_probes == 0.0 and sim.mean_steps == 1.0


def test_tsp_trace_reproducible(small_tsp, tmp_path):
    inst, land = small_tsp
    c = cfg(100, seed=3, k=land.k_mod, t=land.k_opt, n=20)
    a = simulate_tsp_descent(inst, c, trace_path=tmp_path / "a.csv")
    b = simulate_tsp_descent(inst, c)
    assert a.trace_hash == b.trace_hash and a == b
    assert simulate_tsp_descent(inst, cfg(100, seed=4, k=land.k_mod, t=land.k_opt, n=20)).trace_hash != a.trace_hash
    rows = list(csv.DictReader(open(tmp_path / "a.csv")))
    assert all(int(r["cost"]) >= land.k_opt for r in rows)


def test_tsp_without_replacement(small_tsp):
    inst, land = small_tsp
    c = cfg(200, seed=1, k=land.k_mod, t=land.k_opt, n=INFINITE)
    sim = simulate_tsp_descent(inst, c, without_replacement=True)
    assert sim.capped_runs == 0 and 0 < sim.empirical_success_rate <= 1
    with pytest.raises(ValueError):
        simulate_tsp_descent(inst, cfg(5, k=land.k_opt, t=land.k_mod))
