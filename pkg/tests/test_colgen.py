import numpy as np
import pytest
from hypothesis import given, strategies as st

from colrand.colgen import (cold_start, knapsack, price_choice_bruteforce, price_cutting_stock,
                            price_mdp, pricing_for, run_cg, warm_start_from_cr)
from colrand.cr_solver import restricted_instance, solve_cr, solve_full
from colrand.lp_core import reduced_costs, solve_simplex
from colrand.oracles import (CuttingStockParams, MDPParams, choice_instance,
                             cutting_stock_instance, generate_choice, generate_cutting_stock,
                             generate_mdp, lehmer_rank, mdp_column, mdp_instance)
from colrand.sampling import SampleSet, sample_iid
from reference import choice_pricing_reference, cutting_stock_value, knapsack_exhaustive

TINY = CuttingStockParams(10, (3, 5), (2, 1))


def test_knapsack_examples():
    assert knapsack([2, 3], [3, 5], 10) == (6.0, (3, 0))
    assert knapsack([1, 0], [1, 2], 4) == (4.0, (4, 0))
    assert knapsack([0, 0], [3, 5], 10) == (0.0, (0, 0))


def test_zero_dual_prices_at_one():
    pattern, rc = price_cutting_stock(np.zeros(2), TINY)
    assert rc == 1.0


@given(st.lists(st.tuples(st.integers(1, 9), st.floats(-1, 3, allow_nan=False)), min_size=1,
                max_size=4), st.integers(1, 25))
def test_knapsack_matches_enumeration(items, W):
    widths = [w for w, _ in items]
    values = [v for _, v in items]
    value, pattern = knapsack(values, widths, W)
    assert value == pytest.approx(knapsack_exhaustive(values, widths, W), abs=1e-9)
    assert sum(a * w for a, w in zip(pattern, widths)) <= W
    assert value == pytest.approx(sum(a * v for a, v in zip(pattern, values)), abs=1e-9)


def test_pricing_value_matches_dense_recomputation():
    inst = cutting_stock_instance(TINY)
    res = solve_simplex(restricted_instance(inst, [(3, 0), (0, 2)]))
    direct = 1.0 - res.p @ np.array([0, 2])
    sub = restricted_instance(inst, [(3, 0), (0, 2), (0, 2)])
    assert reduced_costs(sub, res, [2])[0] == pytest.approx(direct)


def test_cg_tiny_cutting_stock():
    inst = cutting_stock_instance(TINY)
    run = run_cg(inst, pricing_for(inst), cold_start(inst))
    assert cold_start(inst) == [(3, 0), (0, 2)]
    assert run.converged and run.objective == pytest.approx(7 / 6, abs=1e-12)


def test_cg_from_optimal_set_stops_at_once():
    inst = cutting_stock_instance(TINY)
    _, idents = solve_full(inst)
    run = run_cg(inst, pricing_for(inst), idents)
    assert run.iterations == 1 and run.trace[0].added is None


def test_cg_trace_is_monotone():
    inst = cutting_stock_instance(generate_cutting_stock(8, 100, 2))
    run = run_cg(inst, pricing_for(inst), cold_start(inst))
    objs = [t.objective for t in run.trace]
    assert all(b <= a + 1e-9 for a, b in zip(objs, objs[1:]))
    assert run.trace[-1].min_reduced_cost >= -1e-7


@pytest.mark.parametrize("seed", range(5))
def test_cg_matches_exhaustive_lp(seed):
    prm = generate_cutting_stock(6, 60, seed)
    inst = cutting_stock_instance(prm)
    run = run_cg(inst, pricing_for(inst), cold_start(inst))
    assert run.objective == pytest.approx(cutting_stock_value(prm.widths, prm.demands, prm.W),
                                          abs=1e-6)


def test_choice_pricing_two_rankings():
    prm = generate_choice(1, 1, 0)
    # rankings: (0,1) -> option 0 chosen, (1,0) -> option 1 chosen
    p = np.array([0.2, 0.7, 0.1])
    k, rc = price_choice_bruteforce(p, prm)
    assert k == lehmer_rank((1, 0)) and rc == pytest.approx(-0.8)


def test_choice_pricing_matches_both_references():
    prm = generate_choice(3, 5, 3)
    inst = choice_instance(prm)
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rng.normal(size=inst.m)
        _, rc = price_choice_bruteforce(p, prm)
        assert rc == pytest.approx(choice_pricing_reference(p, prm.N, prm.assortments))
        sub = restricted_instance(inst, list(range(24)))
        direct = min(-(p @ col.to_dense(inst.m)) for _, col in sub.columns)
        assert rc == pytest.approx(direct)


def test_choice_zero_dual_terminates():
    prm = generate_choice(2, 3, 0)
    _, rc = price_choice_bruteforce(np.zeros(prm.n_fit_rows + 1), prm)
    assert rc == 0.0


def test_choice_cg_reaches_zero():
    inst = choice_instance(generate_choice(3, 6, 4))
    run = run_cg(inst, pricing_for(inst), cold_start(inst, 1))
    assert run.converged and run.objective <= 1e-6


def test_mdp_pricing_examples():
    prm = generate_mdp(3, 4, 0.9, 0)
    (s, a), rc = price_mdp(np.zeros(3), prm)
    assert rc == pytest.approx(prm.costs.min()) and prm.costs[s, a] == prm.costs.min()
    P = np.ones((1, 2, 1))
    (s, a), _ = price_mdp(np.array([0.3]), MDPParams(0.9, np.array([[1.0, 2.0]]), P))
    assert (s, a) == (0, 0)


def test_mdp_pricing_matches_enumeration():
    prm = generate_mdp(4, 3, 0.9, 5)
    p = np.random.default_rng(1).normal(size=4)
    _, rc = price_mdp(p, prm)
    brute = min(mdp_column(s, a, prm)[0] - mdp_column(s, a, prm)[1].dot(p)
                for s in range(4) for a in range(3))
    assert rc == pytest.approx(brute)


def test_mdp_cg_matches_full_lp():
    prm = generate_mdp(4, 5, 0.9, 2)
    inst = mdp_instance(prm)
    run = run_cg(inst, pricing_for(inst), cold_start(inst, 3))
    assert run.objective == pytest.approx(solve_full(inst)[0].objective, abs=1e-6)


def test_warm_start_support():
    inst = cutting_stock_instance(generate_cutting_stock(6, 60, 1))
    cr = solve_cr(inst, sample_iid(inst.oracle, 200, 0))
    init = warm_start_from_cr(cr)
    assert len(init) == sum(1 for v in cr.solution().values() if v > 1e-7)
    run = run_cg(inst, pricing_for(inst), init, provenance="cr")
    assert run.provenance == "cr" and run.converged


def test_warm_start_from_optimal_sample_stops_immediately():
    inst = cutting_stock_instance(TINY)
    _, idents = solve_full(inst)
    cr = solve_cr(inst, SampleSet.from_identities(idents))
    assert run_cg(inst, pricing_for(inst), warm_start_from_cr(cr)).iterations == 1


def test_warm_start_needs_fewer_iterations_on_most_seeds():
    wins = 0
    for seed in range(20):
        inst = cutting_stock_instance(generate_cutting_stock(8, 120, seed))
        cold = run_cg(inst, pricing_for(inst), cold_start(inst))
        cr = solve_cr(inst, sample_iid(inst.oracle, 200, seed))
        warm = run_cg(inst, pricing_for(inst), warm_start_from_cr(cr), provenance="cr")
        assert warm.objective == pytest.approx(cold.objective, abs=1e-6)
        wins += warm.iterations <= cold.iterations
    assert wins >= 15


def test_cg_rejects_infeasible_start_and_max_problems():
    inst = cutting_stock_instance(TINY)
    with pytest.raises(ValueError):
        run_cg(inst, pricing_for(inst), [(3, 0)])
