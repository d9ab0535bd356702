import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from colrand.cr_solver import (restricted_instance, solve_cr, solve_cr_structured,
                               solve_distributional, solve_full, solve_near_feasibility)
from colrand.lp_core import INFEASIBLE, OPTIMAL, l1_linearize, solve_simplex
from colrand.oracles import (CuttingStockParams, choice_instance, cutting_stock_instance,
                             explicit_instance, generate_choice, generate_cover_pack,
                             generate_explicit, cover_pack_instance, lehmer_unrank, ranking_to_column)
from colrand.sampling import SampleSet, sample_iid
from reference import highs_lp


def identity_instance(n=3):
    return explicit_instance(np.eye(n), np.ones(n), np.ones(n))


def test_full_coverage_recovers_value():
    run = solve_cr(identity_instance(), SampleSet.from_identities([0, 1, 2]))
    assert run.status == OPTIMAL and run.objective == pytest.approx(3.0)


def test_missing_column_makes_identity_system_infeasible():
    run = solve_cr(identity_instance(), SampleSet.from_identities([0, 1]))
    assert run.status == INFEASIBLE
    assert math.isnan(run.objective)


def test_duplicates_are_kept_and_solution_aggregates():
    run = solve_cr(identity_instance(), SampleSet.from_identities([0, 0, 1, 2, 2]))
    assert run.K == 5 and run.columns_built == 3 and run.duplicates == 2
    assert run.result.x.size == 5
    sol = run.solution()
    assert sol == pytest.approx({0: 1.0, 1: 1.0, 2: 1.0})
    assert run.expand(3) == pytest.approx([1, 1, 1])


def test_empty_sample_rejected():
    with pytest.raises(ValueError):
        solve_cr(identity_instance(), SampleSet.from_identities([]))


def test_tiny_cutting_stock_value():
    inst = cutting_stock_instance(CuttingStockParams(10, (3, 5), (2, 1)))
    res, idents = solve_full(inst)
    assert sorted(idents) == [(0, 2), (1, 1), (3, 0)]
    assert res.objective == pytest.approx(7 / 6, abs=1e-12)


def test_estimation_single_ranking_closed_form():
    prm = generate_choice(2, 2, 0)
    inst = choice_instance(prm)
    run = solve_cr_structured(inst, SampleSet.from_identities([3]))
    _, col = ranking_to_column(lehmer_unrank(3, 3), prm)
    alpha = col.to_dense(inst.m)[: prm.n_fit_rows]
    assert run.objective == pytest.approx(np.abs(alpha - prm.target()).sum())


def test_estimation_with_all_rankings_is_zero():
    prm = generate_choice(3, 5, 1)
    res, _ = solve_full(choice_instance(prm))
    assert res.objective == pytest.approx(0.0, abs=1e-9)


def test_structured_requires_fixed_columns():
    with pytest.raises(ValueError):
        solve_cr_structured(identity_instance(), SampleSet.from_identities([0]))


def test_portfolio_single_asset():
    alpha = np.array([0.3, -0.2, 0.5])
    inst = l1_linearize(np.zeros(3), [(0.0, _col(alpha))])
    assert solve_simplex(inst).objective == pytest.approx(np.abs(alpha).sum())


def _col(v):
    from colrand.lp_core import SparseColumn
    return SparseColumn.from_dense(v)


def test_near_feasibility_examples():
    inst = identity_instance()
    assert solve_near_feasibility(inst, SampleSet.from_identities([0, 1])) == pytest.approx(1.0)
    assert solve_near_feasibility(inst, SampleSet.from_identities([0, 1, 2])) == pytest.approx(0, abs=1e-7)
    prm = generate_cover_pack("covering", 4, 6, 0)
    cov = cover_pack_instance(prm)
    assert solve_near_feasibility(cov) == pytest.approx(np.abs(prm.b).sum())


def test_distributional_identity_examples():
    inst = identity_instance()
    d = solve_distributional(inst, None, C=3)
    assert d.status == OPTIMAL and d.delta_v == pytest.approx(0.0, abs=1e-9)
    d = solve_distributional(inst, None, C=1.5)
    assert d.status == INFEASIBLE and d.delta_v == math.inf


def test_distributional_zero_xi_columns_are_dropped():
    inst = explicit_instance(np.eye(2), np.ones(2), np.ones(2))
    d = solve_distributional(inst, [1.0, 0.0], C=10)
    assert d.status == INFEASIBLE


@pytest.mark.parametrize("seed", range(5))
def test_distributional_gap_nonincreasing_in_C(seed):
    prm = generate_explicit(3, 10, seed)
    inst = explicit_instance(prm.A, prm.b, prm.c)
    deltas = [solve_distributional(inst, None, C=f * 10).delta_v for f in (1, 2, 4, 8)]
    for a, b in zip(deltas, deltas[1:]):
        assert b <= a + 1e-9
    assert deltas[-1] >= -1e-9


@given(st.integers(0, 10_000), st.integers(1, 30))
def test_sampled_value_never_beats_full_value(seed, K):
    prm = generate_explicit(3, 10, seed % 50)
    inst = explicit_instance(prm.A, prm.b, prm.c)
    full = highs_lp(prm.A, prm.b, prm.c, ["eq"] * 3)[1]
    run = solve_cr(inst, sample_iid(inst.oracle, K, seed))
    if run.status == OPTIMAL:
        assert run.objective >= full - 1e-7
    # every sampled optimum is feasible for the full LP
    if run.status == OPTIMAL:
        x = run.expand(10)
        assert np.max(np.abs(prm.A @ x - prm.b)) <= 1e-7


@given(st.integers(0, 1000))
def test_adding_columns_never_hurts(seed):
    prm = generate_explicit(3, 10, seed % 20)
    inst = explicit_instance(prm.A, prm.b, prm.c)
    s = sample_iid(inst.oracle, 25, seed)
    small = solve_cr(inst, SampleSet.from_identities(s.identities[:12]))
    big = solve_cr(inst, s)
    if small.status == OPTIMAL:
        assert big.status == OPTIMAL and big.objective <= small.objective + 1e-9


def test_run_json():
    run = solve_cr(identity_instance(), SampleSet.from_identities([0, 1, 2]))
    d = json.loads(run.to_json())
    assert d["status"] == OPTIMAL and d["K"] == 3


def test_restricted_instance_caches_columns():
    inst = identity_instance()
    sub = restricted_instance(inst, [0, 0, 1])
    assert sub.columns[0] is sub.columns[1]
