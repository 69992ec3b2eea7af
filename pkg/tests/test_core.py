import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from landscape_lab.core import (
    INFINITE,
    CostDistribution,
    CostRange,
    NeighbourKernel,
    check_conditions,
    check_unbiased,
    compute_nweights,
    k_ge_for,
    lemma_violations,
    level_sums,
    monotone_mod,
    p_greater,
    p_less,
    p_much_greater,
    parse_size,
    pn_greater,
    pn_less,
    pn_much_greater,
)
from landscape_lab.errors import MissingRow, RangeMismatch

from oracles import nweight_naive


# ---------------------------------------------------------------------------
# strategies


@st.composite
def distributions(draw, min_size=2, max_size=25, allow_zero=False):
    K = draw(st.integers(min_size, max_size))
    lo = 0.0 if allow_zero else 1e-3
    w = draw(hnp.arrays(float, K, elements=st.floats(lo, 1.0)))
    if w.sum() == 0:
        w[0] = 1.0
    k_opt = draw(st.integers(0, 40))
    return CostDistribution.from_weights(w, k_opt=k_opt)


@st.composite
def spaces(draw):
    dist = draw(distributions())
    K = dist.range.size
    raw = draw(hnp.arrays(float, (K, K), elements=st.floats(0.0, 1.0)))
    raw[np.arange(K), np.arange(K)] += 1e-3
    return dist, NeighbourKernel.from_counts(dist.range, raw, draw(st.integers(1, 60)))


@st.composite
def nsc_spaces(draw):
    """Increasing ``p`` and unbiased kernels with ``r`` nonincreasing in distance."""
    K = draw(st.integers(3, 20))
    w = np.sort(draw(hnp.arrays(float, K, elements=st.floats(0.05, 1.0))))
    dist = CostDistribution.from_weights(w)
    p = dist.p
    pn = np.zeros((K, K))
    for k in range(K):
        steps = draw(hnp.arrays(float, K, elements=st.floats(0.0, 1.0)))
        r = np.cumsum(steps[::-1])[::-1] + 1e-3  # nonincreasing in distance
        row = np.zeros(K)
        for d in range(K):
            if k + d < K:
                row[k + d] += p[k + d] * r[d]
            if d and k - d >= 0:
                row[k - d] += p[k - d] * r[d]
        pn[k] = row / row.sum()
    return dist, NeighbourKernel(dist.range, 10, pn, np.ones(K, bool))


# ---------------------------------------------------------------------------
# types


def test_cost_range_rejects_inverted():
    with pytest.raises(ValueError):
        CostRange(5, 4)


def test_distribution_validates_sum_and_sign():
    with pytest.raises(ValueError):
        CostDistribution(CostRange(0, 1), np.array([0.5, 0.4]))
    with pytest.raises(ValueError):
        CostDistribution(CostRange(0, 1), np.array([1.5, -0.5]))


def test_prob_outside_range_is_zero():
    d = CostDistribution.from_weights([1, 2, 3], k_opt=10)
    assert d.prob(9) == 0.0 and d.prob(13) == 0.0
    assert d.prob(11) == pytest.approx(2 / 6)


def test_k_mod_monotone_definition_and_mode():
    d = CostDistribution.from_weights([1, 2, 2, 5, 3, 7, 1])
    assert d.k_mod == 3  # first drop is after index 3
    assert d.mode == 5
    assert monotone_mod(np.array([1.0, 1.0, 1.0])) == 2


def test_kernel_rejects_shape_and_negative():
    with pytest.raises(ValueError):
        NeighbourKernel(CostRange(0, 1), 1, np.zeros((3, 3)), np.ones(2, bool))
    with pytest.raises(ValueError):
        NeighbourKernel(CostRange(0, 1), 1, -np.eye(2), np.ones(2, bool))


def test_kernel_missing_row():
    k = NeighbourKernel.from_counts(CostRange(0, 2), np.array([[1, 0, 0], [0, 0, 0], [1, 1, 0]]), 2)
    with pytest.raises(MissingRow):
        pn_less(k, 1)
    assert pn_less(k, 2) == pytest.approx(1.0)


def test_validate_against_range_mismatch():
    d = CostDistribution.from_weights([1, 1])
    k = NeighbourKernel.blind(CostDistribution.from_weights([1, 1, 1]))
    with pytest.raises(RangeMismatch):
        k.validate_against(d)
    with pytest.raises(RangeMismatch):
        compute_nweights(d, k)


def test_parse_size():
    assert parse_size("inf") is INFINITE
    assert parse_size("35") == 35
    with pytest.raises(ValueError):
        parse_size(0)


# ---------------------------------------------------------------------------
# improvement probabilities


def test_p_less_uniform_table_value(toy):
    d, _ = toy(10)
    assert p_less(d, 30) == pytest.approx(30 / 201)
    assert p_less(d, d.k_opt) == 0.0
    assert p_less(d, d.k_max + 1) == pytest.approx(1.0)


def test_p_less_sat2_matches_exact_sum(sat2):
    d, _, _ = sat2
    # frozen from oracles.sat2_p_exact summed over C = 0..16
    assert p_less(d, 17) == pytest.approx(0.021110621625089383, rel=1e-12)


@pytest.mark.parametrize("b, expected", [(1, 1 / 3), (5, 5 / 11), (200, 30 / 201)])
def test_pn_less_toy(toy, b, expected):
    _, k = toy(b)
    assert pn_less(k, 30) == pytest.approx(expected)


@given(spaces())
def test_partition_identities(space):
    dist, kernel = space
    for k in dist.costs:
        tot = p_less(dist, k) + dist.prob(k) + p_greater(dist, k) + p_much_greater(dist, k)
        assert abs(tot - 1) <= 1e-12
        tot_n = pn_less(kernel, k) + kernel.prob(k, k) + pn_greater(kernel, k) + pn_much_greater(kernel, k)
        assert abs(tot_n - 1) <= 1e-12


# ---------------------------------------------------------------------------
# NWeights


def test_nweights_toy_b10(toy):
    d, k = toy(10)
    nw = compute_nweights(d, k)
    for delta in range(1, 11):
        assert nw.r_at(30, delta) == pytest.approx(201 / 21)
    assert nw.r_at(30, 11) == 0.0


def test_blind_kernel_unit_weights():
    d = CostDistribution.from_weights(np.arange(1, 12), k_opt=3)
    k = NeighbourKernel.blind(d)
    nw = compute_nweights(d, k)
    defined = ~np.isnan(nw.r)
    assert np.allclose(nw.r[defined], 1.0)
    for kk in range(4, 14):
        rep = check_unbiased(d, k, nw, kk)
        assert rep.unbiased and not rep.positively_biased
        assert all(abs(v) < 1e-15 for v in rep.posr.values())
    cr = check_conditions(d, k, nw)
    assert cr.nsc[1:].all()
    # boundary case of Theorem 1: pn^< equals p^< exactly
    assert np.allclose(cr.sums.pn_less, cr.sums.p_less)


@given(spaces())
def test_nweights_match_naive_ratio(space):
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    K = dist.range.size
    for i in range(K):
        for d in range(K):
            a, b = nw.r[i, d], nweight_naive(dist.p, kernel.pn, i, d)
            assert (np.isnan(a) and np.isnan(b)) or a == pytest.approx(b, rel=1e-12)


@given(spaces())
def test_nweight_mass_sums_to_one(space):
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    K = dist.range.size
    for i in range(K):
        tot = 0.0
        for d in range(K):
            pm = dist.p[i] if d == 0 else dist.window(dist.k_opt + i - d, dist.k_opt + i - d)[0] + dist.window(
                dist.k_opt + i + d, dist.k_opt + i + d
            )[0]
            if not np.isnan(nw.r[i, d]):
                tot += nw.r[i, d] * pm
        assert abs(tot - 1) <= 1e-10


@given(spaces())
def test_rbar_definitions(space):
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    for i in range(1, dist.range.size):
        k = dist.k_opt + i
        vals = [0.0 if np.isnan(nw.r[i, d]) else nw.r[i, d] for d in range(1, i + 1)]
        assert nw.rbar_at(k) == pytest.approx(sum(vals) / i)
        for j in range(i):
            t = dist.k_opt + j
            assert nw.rbar_t_at(k, t) == pytest.approx(sum(vals[: i - j]) / (i - j))


@given(spaces())
def test_round_trip_unbiased_split(space):
    """Rebuild each row from r and the unbiased split; it must sum to 1."""
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    K = dist.range.size
    for i in range(K):
        row = np.zeros(K)
        for d in range(K):
            r = nw.r[i, d]
            if np.isnan(r):
                continue
            if d == 0:
                row[i] += dist.p[i] * r
                continue
            if i + d < K:
                row[i + d] += dist.p[i + d] * r
            if i - d >= 0:
                row[i - d] += dist.p[i - d] * r
        assert abs(row.sum() - 1) <= 1e-10


# ---------------------------------------------------------------------------
# conditions and lemmas


def test_k_ge_formula():
    assert k_ge_for(0, 25) == 12
    assert k_ge_for(57, 117) == 87
    for k_opt, k_mod in [(0, 25), (57, 117), (3, 4)]:
        k_ge = k_ge_for(k_opt, k_mod)
        assert k_ge + (k_ge - k_opt) <= k_mod < (k_ge + 1) + (k_ge + 1 - k_opt)


@given(spaces())
def test_lemma3_and_partition_hold_everywhere(space):
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    v = lemma_violations(dist, kernel, nw)
    assert v["lemma3"] == [] and v["partition"] == []


@given(nsc_spaces())
def test_lemmas_on_nsc_constructions(space):
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    rep = check_conditions(dist, kernel, nw)
    assert rep.nsc[1:].all()
    assert all(v == [] for v in lemma_violations(dist, kernel, nw, rep).values())


@given(spaces())
def test_thm1_implies_improvement(space):
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    rep = check_conditions(dist, kernel, nw)
    s = level_sums(dist, kernel, nw)
    for i in np.nonzero(rep.thm1_holds | rep.thm2_holds)[0]:
        assert s.pn_less[i] >= s.p_less[i] - 1e-10


@given(spaces())
def test_conditions_report_shapes_and_ge(space):
    dist, kernel = space
    nw = compute_nweights(dist, kernel)
    rep = check_conditions(dist, kernel, nw)
    K = dist.range.size
    for name in ("ge", "nsc", "unbiased", "full_nsc", "thm1_holds", "thm2_holds", "weak_cond_slack"):
        assert getattr(rep, name).shape == (K,)
    i = np.arange(K)
    assert np.array_equal(rep.ge, 2 * i <= rep.k_mod - dist.k_opt)
    # full NSC is cumulative over populated levels: once false it stays false
    fn = rep.full_nsc[rep.defined]
    first_bad = np.nonzero(~fn)[0]
    if first_bad.size:
        assert not fn[first_bad[0] :].any()
    assert np.array_equal(rep.positively_biased & ~rep.unbiased, np.zeros(K, bool))
