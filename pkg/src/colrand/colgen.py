"""Column generation with exact pricing, as the baseline CR is compared against."""

from __future__ import annotations

import functools
import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cr_solver import CRRun, restricted_instance
from .lp_core import FEAS_TOL, OPT_TOL, OPTIMAL, LPInstance, SimplexOptions, SolveResult, solve_simplex
from .oracles import (ChoiceOracle, ChoiceParams, CuttingStockOracle, CuttingStockParams,
                      ExplicitOracle, MDPOracle, MDPParams, sample_ranking)
from .rng import stream

MAX_CHOICE_N = 8


# ---------------------------------------------------------------- pricing


def knapsack(values, widths, W: int) -> tuple[float, tuple[int, ...]]:
    """Unbounded integer knapsack max v^T a s.t. w^T a <= W, by DP over capacity.

    Reconstruction walks down from capacity W: unused capacity is skipped first,
    otherwise the smallest item index that attains the cell value is taken.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(widths, dtype=int)
    items = np.flatnonzero(v > 0)
    dp = np.zeros(W + 1)
    if items.size:
        wi, vi = w[items], v[items]
        for cap in range(1, W + 1):
            fit = wi <= cap
            best = dp[cap - 1]
            if fit.any():
                best = max(best, float(np.max(dp[cap - wi[fit]] + vi[fit])))
            dp[cap] = best
    a = [0] * len(v)
    cap = W
    while cap > 0 and dp[cap] > 0:
        eps = 1e-12 * (1.0 + abs(dp[cap]))
        if dp[cap] <= dp[cap - 1] + eps:
            cap -= 1
            continue
        for i in items:
            if w[i] <= cap and dp[cap - w[i]] + v[i] >= dp[cap] - eps:
                a[i] += 1
                cap -= int(w[i])
                break
        else:  # pragma: no cover - dp cells are always attained
            raise RuntimeError("knapsack reconstruction failed")
    pattern = tuple(a)
    return float(np.dot(v, pattern)), pattern


def price_cutting_stock(p, params: CuttingStockParams) -> tuple[tuple[int, ...], float]:
    value, pattern = knapsack(p, params.widths, params.W)
    return pattern, 1.0 - value


class _ChoiceTable:
    """Choice of every ranking on every assortment, rankings in Lehmer order."""

    def __init__(self, params: ChoiceParams):
        if params.N > MAX_CHOICE_N:
            raise ValueError(f"ranking enumeration is limited to N <= {MAX_CHOICE_N}")
        L = params.N + 1
        perms = np.array(list(itertools.permutations(range(L))), dtype=np.int8)
        self.choice = np.empty((perms.shape[0], params.M), dtype=np.int8)
        for m, S in enumerate(params.assortments):
            offered = np.array((0,) + tuple(S))
            self.choice[:, m] = offered[np.argmin(perms[:, offered], axis=1)]
        self.L, self.M = L, params.M


@functools.lru_cache(maxsize=4)
def _choice_table(params: ChoiceParams) -> _ChoiceTable:
    return _ChoiceTable(params)


def price_choice_bruteforce(p, params: ChoiceParams) -> tuple[int, float]:
    """Exact min over all (N+1)! rankings of 0 - p^T alpha; ties to the lowest rank."""
    table = _choice_table(params)
    p = np.asarray(p, dtype=float)
    fit = p[: table.M * table.L].reshape(table.M, table.L)
    gain = fit[np.arange(table.M), table.choice].sum(axis=1) + p[table.M * table.L]
    k = int(np.argmax(gain))
    return k, float(-gain[k])


def price_mdp(p, params: MDPParams) -> tuple[tuple[int, int], float]:
    p = np.asarray(p, dtype=float)
    rc = params.costs - (p[:, None] - params.theta * params.P @ p)
    k = int(np.argmin(rc))
    s, a = divmod(k, params.n_a)
    return (s, a), float(rc[s, a])


def price_explicit(p, oracle: ExplicitOracle) -> tuple[int, float]:
    rc = oracle.c - np.asarray(p, dtype=float) @ oracle.A
    j = int(np.argmin(rc))
    return j, float(rc[j])


def pricing_for(instance: LPInstance):
    """Exact pricing callable p -> (identity, reduced cost) for the instance family."""
    oracle = instance.oracle
    if instance.objective_sense != "min":
        raise ValueError("column generation is implemented for min problems")
    if isinstance(oracle, CuttingStockOracle):
        return lambda p: price_cutting_stock(p, oracle.params)
    if isinstance(oracle, ChoiceOracle):
        return lambda p: price_choice_bruteforce(p, oracle.params)
    if isinstance(oracle, MDPOracle):
        return lambda p: price_mdp(p, oracle.params)
    if isinstance(oracle, ExplicitOracle):
        return lambda p: price_explicit(p, oracle)
    raise ValueError("no pricing oracle for this instance")


# ---------------------------------------------------------------- CG loop


@dataclass(frozen=True)
class CGOptions:
    max_iters: int = 10_000
    opt_tol: float = OPT_TOL
    simplex: SimplexOptions = field(default_factory=SimplexOptions)


@dataclass
class CGIteration:
    objective: float
    min_reduced_cost: float
    elapsed_ms: float
    added: object = None


@dataclass
class CGRun:
    trace: list[CGIteration]
    result: SolveResult
    columns: list
    provenance: str
    converged: bool
    note: str = ""

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def objective(self) -> float:
        return self.result.objective

    def to_json(self) -> str:
        return json.dumps({
            "provenance": self.provenance,
            "converged": self.converged,
            "iterations": self.iterations,
            "objective": self.objective,
            "note": self.note,
            "trace": [[t.objective, t.min_reduced_cost, t.elapsed_ms] for t in self.trace],
        }, sort_keys=True)


def run_cg(instance: LPInstance, pricing, init, opts: CGOptions | None = None,
           provenance: str = "cold") -> CGRun:
    """Solve the restricted LP, price, add the single best column, repeat."""
    opts = opts or CGOptions()
    pool = list(dict.fromkeys(init))
    members = set(pool)
    trace: list[CGIteration] = []
    prev = math.inf
    res = None
    for _ in range(opts.max_iters):
        t0 = time.perf_counter()
        res = solve_simplex(restricted_instance(instance, pool), opts.simplex)
        if res.status != OPTIMAL:
            raise ValueError(f"restricted LP is {res.status}; supply feasible initial columns")
        if res.objective > prev + 1e-7 * (1.0 + abs(prev)):
            raise RuntimeError("restricted objective increased")
        prev = res.objective
        ident, rc = pricing(res.p)
        done = rc >= -opts.opt_tol
        trace.append(CGIteration(res.objective, rc, 1e3 * (time.perf_counter() - t0),
                                 None if done else ident))
        if done:
            return CGRun(trace, res, pool, provenance, True)
        if ident in members:
            # a pool column priced negative: only possible through round-off
            return CGRun(trace, res, pool, provenance, False, "stalled on an existing column")
        pool.append(ident)
        members.add(ident)
    return CGRun(trace, res, pool, provenance, False, "iteration cap")


def warm_start_from_cr(run: CRRun, tol: float = FEAS_TOL) -> list:
    """Support of the CR solution."""
    if run.status != OPTIMAL:
        raise ValueError("warm start needs an optimal CR run")
    return [ident for ident, val in run.solution().items() if val > tol]


def cold_start(instance: LPInstance, seed: int = 0) -> list:
    """Feasible starting columns per family.

    Cutting stock: the singleton patterns floor(W / w_i) e_i.  Rankings: one
    uniform ranking (the error columns keep the LP feasible).  MDP: one random
    action per state.  Explicit: every column with its index set.
    """
    oracle = instance.oracle
    if isinstance(oracle, CuttingStockOracle):
        prm = oracle.params
        return [tuple(prm.W // prm.widths[i] if k == i else 0 for k in range(prm.m))
                for i in range(prm.m)]
    if isinstance(oracle, ChoiceOracle):
        return [sample_ranking(oracle.params, stream(seed, "cold-start"))]
    if isinstance(oracle, MDPOracle):
        rng = stream(seed, "cold-start")
        return [(s, int(rng.integers(oracle.params.n_a))) for s in range(oracle.params.n_s)]
    if isinstance(oracle, ExplicitOracle):
        return list(range(oracle.n))
    raise ValueError("no cold start for this instance")


__all__ = [
    "CGIteration", "CGOptions", "CGRun", "cold_start", "knapsack",
    "price_choice_bruteforce", "price_cutting_stock", "price_explicit", "price_mdp",
    "pricing_for", "run_cg", "warm_start_from_cr",
]
