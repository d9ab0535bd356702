import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chi2

from colrand.oracles import (ChoiceOracle, ChoiceParams, CuttingStockOracle, CuttingStockParams,
                             ExplicitOracle, MDPOracle, MDPParams, enumerate_maximal_patterns,
                             generate_choice, generate_cutting_stock, generate_instance,
                             generate_mdp, lehmer_rank, lehmer_unrank, mdp_column,
                             mnl_probabilities, ranking_choices, ranking_to_column,
                             sample_cutting_pattern, sample_ranking, transport_matrix)
from colrand.rng import stream
from reference import maximal_patterns, ranking_choice


# ---------------------------------------------------------------- cutting stock


def test_single_width_pattern_forced():
    prm = CuttingStockParams(10, (6,), (1,))
    assert {sample_cutting_pattern(prm, stream(0, k)) for k in range(50)} == {(1,)}


def test_sampled_patterns_are_maximal():
    prm = CuttingStockParams(10, (3, 5), (2, 1))
    allowed = set(maximal_patterns(prm.widths, prm.W))
    assert allowed == {(3, 0), (1, 1), (0, 2)}
    seen = {sample_cutting_pattern(prm, stream(1, k)) for k in range(10_000)}
    assert seen <= allowed and seen == allowed


def test_large_patterns_fit():
    prm = generate_cutting_stock(50, 1000, 3)
    w = np.array(prm.widths)
    for k in range(2000):
        a = np.array(sample_cutting_pattern(prm, stream(9, k)))
        assert a @ w <= prm.W
        assert prm.W - a @ w < w.min()


@given(st.lists(st.integers(2, 9), min_size=1, max_size=4, unique=True), st.integers(10, 30))
def test_enumerated_patterns_match_reference(widths, W):
    prm = CuttingStockParams(W, tuple(widths), (1,) * len(widths))
    assert sorted(enumerate_maximal_patterns(prm)) == sorted(maximal_patterns(widths, W))


def test_cutting_stock_oracle_rejects_bad_patterns():
    o = CuttingStockOracle(CuttingStockParams(10, (3, 5), (2, 1)))
    with pytest.raises(ValueError):
        o.materialize((4, 0))
    cost, col = o.materialize((1, 1))
    assert cost == 1.0 and col.to_dense(2).tolist() == [1, 1]


def test_generator_is_deterministic():
    assert generate_cutting_stock(50, 1000, 7) == generate_cutting_stock(50, 1000, 7)
    assert generate_cutting_stock(50, 1000, 7) != generate_cutting_stock(50, 1000, 8)


# ---------------------------------------------------------------- rankings


@given(st.integers(1, 6).flatmap(lambda L: st.permutations(list(range(L)))))
def test_lehmer_roundtrip(perm):
    perm = tuple(perm)
    assert lehmer_unrank(lehmer_rank(perm), len(perm)) == perm


def test_lehmer_is_lexicographic():
    perms = list(itertools.permutations(range(4)))
    assert [lehmer_rank(p) for p in perms] == list(range(24))


def _params(N, assortments):
    rows = tuple(tuple(mnl_probabilities([0.0] * N, S, N)) for S in assortments)
    return ChoiceParams(N, tuple(assortments), rows)


def test_ranking_sampler_uniform_two():
    prm = _params(1, [(1,)])
    counts = np.bincount([sample_ranking(prm, stream(0, k)) for k in range(10_000)], minlength=2)
    assert np.all(np.abs(counts / 10_000 - 0.5) <= 0.02)


def test_ranking_sampler_chi_square_three_options():
    prm = _params(2, [(1, 2)])
    n = 100_000
    counts = np.bincount([sample_ranking(prm, stream(5, k)) for k in range(n)], minlength=6)
    stat = float(((counts - n / 6) ** 2 / (n / 6)).sum())
    assert stat < chi2.ppf(0.999, 5)


def test_ranking_sampler_reproducible():
    prm = _params(3, [(1, 2, 3)])
    assert sample_ranking(prm, stream(3, 1)) == sample_ranking(prm, stream(3, 1))


def test_ranking_column_forced_cases():
    prm = _params(2, [(1,), (1, 2)])
    # sigma[i] = position of option i: 1 first, then 2, then 0
    sigma = (2, 0, 1)
    assert ranking_choices(sigma, prm) == [1, 1]
    _, col = ranking_to_column(sigma, prm)
    assert col.rows == (1, 4, 6)
    assert ranking_choices((0, 1, 2), prm) == [0, 0]


def test_ranking_column_matches_reference():
    prm = generate_choice(4, 6, 2)
    for k in range(50):
        rank = sample_ranking(prm, stream(11, k))
        sigma = lehmer_unrank(rank, 5)
        assert ranking_choices(sigma, prm) == [ranking_choice(sigma, S) for S in prm.assortments]


def test_pattern_and_mdp_columns_are_injective():
    o = CuttingStockOracle(CuttingStockParams(30, (4, 7, 9), (1, 1, 1)))
    pats = list(o.enumerate())
    assert len({o.materialize(a)[1] for a in pats}) == len(pats)
    m = MDPOracle(generate_mdp(3, 4, 0.9, 2))
    ids = list(m.enumerate())
    assert len({m.materialize(i)[1] for i in ids}) == len(ids)


def test_distinct_rankings_can_share_a_column():
    # with one assortment {1}, only the relative order of 0 and 1 matters
    prm = _params(2, [(1,)])
    o = ChoiceOracle(prm)
    assert len({o.materialize(k)[1] for k in o.enumerate()}) == 2


def test_mnl_equal_utilities():
    assert mnl_probabilities([0.0, 0.0], (1, 2), 2) == pytest.approx([1 / 3] * 3)


def test_generated_choice_rows_are_stochastic():
    prm = generate_choice(5, 20, 4)
    v = np.array(prm.v)
    assert np.allclose(v.sum(axis=1), 1.0)
    assert all(S for S in prm.assortments)


def test_choice_params_validation():
    with pytest.raises(ValueError):
        ChoiceParams(2, ((1,),), ((0.5, 0.4, 0.1),))


# ---------------------------------------------------------------- MDP


def test_mdp_column_example():
    P = np.array([[[0.5, 0.5]], [[0.5, 0.5]]])
    prm = MDPParams(0.9, np.zeros((2, 1)), P)
    _, col = mdp_column(0, 0, prm)
    assert col.to_dense(2) == pytest.approx([0.55, -0.45])


def test_mdp_self_loop_column():
    P = np.zeros((2, 1, 2))
    P[0, 0, 0] = P[1, 0, 1] = 1.0
    _, col = mdp_column(1, 0, MDPParams(0.8, np.zeros((2, 1)), P))
    assert col.rows == (1,) and col.values[0] == pytest.approx(0.2)


def test_mdp_columns_sum_to_one_minus_theta():
    prm = generate_mdp(4, 3, 0.9, 1)
    o = MDPOracle(prm)
    for ident in o.enumerate():
        assert o.materialize(ident)[1].to_dense(4).sum() == pytest.approx(0.1)


def test_mdp_groups_are_states():
    o = MDPOracle(generate_mdp(3, 4, 0.5, 0))
    for g in range(3):
        s, a = o.sample_in_group(g, stream(0, g))
        assert s == g and 0 <= a < 4 and o.group_of((s, a)) == g


# ---------------------------------------------------------------- explicit / generators


def test_explicit_degenerate_xi():
    o = ExplicitOracle(np.eye(3), np.ones(3), xi=[0.0, 1.0, 0.0])
    assert {o.sample(stream(0, k)) for k in range(200)} == {1}


def test_explicit_xi_validation():
    with pytest.raises(ValueError):
        ExplicitOracle(np.eye(2), np.ones(2), xi=[0.7, 0.7])


def test_transport_matrix_full_rank_and_unimodular_entries():
    A = transport_matrix(3, 4)
    assert np.linalg.matrix_rank(A) == A.shape[0] == 6
    for B in itertools.combinations(range(A.shape[1]), 6):
        d = np.linalg.det(A[:, B])
        assert min(abs(d), abs(abs(d) - 1)) < 1e-9


@pytest.mark.parametrize("kind", ["cutting_stock", "choice", "mdp", "covering", "packing",
                                  "transport", "explicit"])
def test_generate_instance_kinds(kind):
    sizes = {"cutting_stock": {"m": 5, "W": 100}, "choice": {"N": 3, "M": 4}}.get(kind, {})
    p1, inst = generate_instance(kind, sizes, 3)
    p2, _ = generate_instance(kind, sizes, 3)
    assert inst.m >= 1
    assert repr(p1) == repr(p2)


def test_generate_instance_unknown_kind():
    with pytest.raises(ValueError):
        generate_instance("nope", {}, 0)
