"""Optimality-gap guarantees for sampled LPs and their structural constants.

Every ``*_term`` function returns the sampling-error part of a bound on
``v(P_J) - v(P)``; the full bound adds the gap of the box-constrained
distributional counterpart when that is computable.  All terms assume the
cost vector has unit Euclidean norm; :func:`empirical_violation_rate` rescales
instances accordingly.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .cr_solver import enumerate_columns, restricted_instance, solve_cr, solve_distributional
from .lp_core import OPTIMAL, LPInstance, SimplexOptions, solve_simplex
from .oracles import ChoiceParams, ExplicitOracle, MDPOracle
from .rng import derive_seed
from .sampling import (GROUPWISE, SampleSet, canonical_forest, dependency_graph_of, forest_lambda,
                       sample_groupwise, sample_iid)

KINDS = ("Thm1", "Thm2", "Prop1", "Prop2Posterior", "Prop3Posterior", "Thm3MDP", "Prop4TU",
         "CoveringU", "PackingU", "Thm4Dependent", "Thm5Groupwise", "Prop7Portfolio")


def _check(C, K, delta):
    if not C > 0 or not math.isfinite(C):
        raise ValueError("C must be positive and finite")
    if not K > 0:
        raise ValueError("sample size must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")


def _nonneg(**kw):
    for name, val in kw.items():
        if not val >= 0 or not math.isfinite(val):
            raise ValueError(f"{name} must be finite and nonnegative")


def thm1_term(C: float, m: int, gamma: float, A_max: float, K: int, delta: float) -> float:
    """C (1 + m gamma ||A||_max) / sqrt(K) * (1 + sqrt(2 log(2/delta)))."""
    _check(C, K, delta)
    _nonneg(m=m, gamma=gamma, A_max=A_max)
    return C * (1.0 + m * gamma * A_max) / math.sqrt(K) * (1.0 + math.sqrt(2.0 * math.log(2.0 / delta)))


def thm2_term(C: float, chi: float, K: int, delta: float) -> float:
    """C chi / sqrt(K) * (1 + sqrt(2 log(1/delta)))."""
    _check(C, K, delta)
    _nonneg(chi=chi)
    return C * chi / math.sqrt(K) * (1.0 + math.sqrt(2.0 * math.log(1.0 / delta)))


def prop1_term(C: float, m: int, A_max: float, K: int, delta: float) -> float:
    """Bound on the L1 infeasibility of the sampled system."""
    _check(C, K, delta)
    _nonneg(m=m, A_max=A_max)
    return C / math.sqrt(K) * m * A_max * (1.0 + math.sqrt(2.0 * math.log(1.0 / delta)))


def posterior_term(C: float, m: int, A_max: float, K: int, delta: float, p) -> float:
    """thm1 form with the solved dual's ||p||_inf in place of gamma."""
    p = np.asarray(p, dtype=float)
    return thm1_term(C, m, float(np.max(np.abs(p))) if p.size else 0.0, A_max, K, delta)


def reduced_cost_norm(A, c, p) -> float:
    """||c^T - p^T A||_2 for an explicit matrix."""
    return float(np.linalg.norm(np.asarray(c, float) - np.asarray(p, float) @ np.asarray(A, float)))


def posterior_term_reduced(C: float, K: int, delta: float, A, c, p) -> float:
    """thm2 form with the solved dual's reduced-cost norm in place of chi."""
    return thm2_term(C, reduced_cost_norm(A, c, p), K, delta)


def thm4_term(C: float, scale: float, K: int, n_edges: int, lam: float, delta: float,
              variant: str = "gamma") -> float:
    """C * scale * (sqrt((K + 2|E|)/K^2) + sqrt(2 Lambda log(a/delta)/K^2)).

    ``scale`` is 1 + m gamma ||A||_max (variant "gamma", a = 2) or chi
    (variant "chi", a = 1).
    """
    _check(C, K, delta)
    _nonneg(scale=scale, n_edges=n_edges, lam=lam)
    a = _log_numerator(variant)
    K2 = float(K) * float(K)
    return C * scale * (math.sqrt((K + 2.0 * n_edges) / K2)
                        + math.sqrt(2.0 * lam * math.log(a / delta) / K2))


def thm5_term(C: float, scale: float, n_r: int, delta: float, variant: str = "gamma") -> float:
    """C * scale / sqrt(n_r) * (1 + sqrt(2 log(a/delta))), a as in thm4_term."""
    _check(C, n_r, delta)
    _nonneg(scale=scale)
    a = _log_numerator(variant)
    return C * scale / math.sqrt(n_r) * (1.0 + math.sqrt(2.0 * math.log(a / delta)))


def _log_numerator(variant: str) -> float:
    if variant == "gamma":
        return 2.0
    if variant == "chi":
        return 1.0
    raise ValueError("variant must be 'gamma' or 'chi'")


def prop7_term(C: float, L: float, H: float, K: int, delta: float) -> float:
    """C L H / sqrt(K) * (1 + 3 sqrt(log(4/delta) / 2))."""
    _check(C, K, delta)
    _nonneg(L=L, H=H)
    return C * L * H / math.sqrt(K) * (1.0 + 3.0 * math.sqrt(0.5 * math.log(4.0 / delta)))


def choice_lipschitz(params: ChoiceParams) -> float:
    """Lipschitz constant of the L1 fit in the Euclidean norm: sqrt(M (N+1))."""
    return math.sqrt(params.M * (params.N + 1))


def choice_column_norm(params: ChoiceParams) -> float:
    """Euclidean norm of every ranking column, unit-sum entry included."""
    return math.sqrt(params.M + 1)


# ---------------------------------------------------------------- structural constants


def gamma_tu(c, m: int) -> float:
    c = np.asarray(c, dtype=float)
    return float(m * np.max(np.abs(c))) if c.size else 0.0


def gamma_mdp(c, theta: float) -> float:
    if not 0 <= theta < 1:
        raise ValueError("discount must lie in [0, 1)")
    c = np.asarray(c, dtype=float)
    return float(np.max(np.abs(c)) / (1.0 - theta)) if c.size else 0.0


def u_covering(A, c) -> float:
    """max c_j / A_ij over positive entries."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    c = np.asarray(c, dtype=float)
    pos = A > 0
    if not pos.any():
        raise ValueError("matrix has no positive entry")
    return float(np.max(np.where(pos, c[None, :] / np.where(pos, A, 1.0), -np.inf)))


@dataclass(frozen=True)
class PackingConstants:
    W: float
    U: float
    r: tuple[float, ...]
    j_star: tuple[int, ...]


def u_packing(A, b, c) -> PackingConstants:
    """r_i = max_j c_j / A_ij (A_ij > 0), W = sum r_i b_i, U = W / min b."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    pos = A > 0
    ratio = np.where(pos, c[None, :] / np.where(pos, A, 1.0), -np.inf)
    j_star = np.argmax(ratio, axis=1)
    r = np.where(pos.any(axis=1), ratio[np.arange(A.shape[0]), j_star], 0.0)
    W = float(r @ b)
    return PackingConstants(W, W / float(b.min()), tuple(float(v) for v in r),
                            tuple(int(j) for j in j_star))


def dual_basic_solutions(A, c, tol: float = 1e-9, primal_feasible_for=None):
    """Yield (basis, p) for every nonsingular m-column basis of A.

    With ``primal_feasible_for=b`` only bases whose basic solution
    A_B^{-1} b is nonnegative are produced.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    for B in itertools.combinations(range(n), m):
        AB = A[:, B]
        if abs(np.linalg.det(AB)) < tol:
            continue
        if primal_feasible_for is not None:
            xB = np.linalg.solve(AB, primal_feasible_for)
            if np.any(xB < -1e-9):
                continue
        yield B, np.linalg.solve(AB.T, c[list(B)])


def chi_enumerate(A, c) -> float:
    """max over all bases of ||c^T - p_B^T A||_2 (desk scale only)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    best = 0.0
    for _, p in dual_basic_solutions(A, c):
        best = max(best, reduced_cost_norm(A, c, p))
    return best


# ---------------------------------------------------------------- reports


@dataclass
class BoundReport:
    kind: str
    inputs: dict
    provenance: dict
    term: float
    delta_distr: float | None = None
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if self.term < 0:
            raise ValueError("bound terms are nonnegative")

    @property
    def total(self) -> float | None:
        if self.delta_distr is None or not math.isfinite(self.delta_distr):
            return None
        return self.delta_distr + self.term

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        d["delta_distr"] = "unavailable" if self.delta_distr is None else self.delta_distr
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def table(self) -> str:
        rows = [("kind", self.kind, "")]
        for key in sorted(self.inputs):
            rows.append((key, repr(self.inputs[key]), self.provenance.get(key, "supplied")))
        rows.append(("delta_v(P_distr)",
                     "unavailable" if self.delta_distr is None else repr(self.delta_distr),
                     "computed" if self.delta_distr is not None else "unavailable"))
        rows.append(("term", repr(self.term), "computed"))
        rows.append(("total", "unavailable" if self.total is None else repr(self.total), ""))
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{a:<{width}}  {b:<24}  {c}" for a, b, c in rows)


# ---------------------------------------------------------------- empirical validation


@dataclass
class ViolationResult:
    rate: float
    violations: int
    feasible: int
    trials: int
    term: float
    delta_distr: float
    cost_norm: float
    gaps: list[float]


def _explicit_data(instance: LPInstance):
    idents = enumerate_columns(instance)
    sub = restricted_instance(instance, idents)
    A, c = sub.dense()
    return idents, A[:, : len(idents)], c[: len(idents)]


def normalized(instance: LPInstance) -> tuple[LPInstance, float]:
    """Copy of an explicit-xi instance with costs scaled to unit Euclidean norm."""
    oracle = instance.oracle
    if not isinstance(oracle, (ExplicitOracle, MDPOracle)):
        raise ValueError("bound validation needs an oracle with explicit xi")
    idents, A, c = _explicit_data(instance)
    norm = float(np.linalg.norm(c))
    if norm == 0:
        raise ValueError("zero cost vector")
    groups = None
    if oracle.n_groups:
        groups = [oracle.group_of(i) for i in idents]
    scaled = ExplicitOracle(A, c / norm, xi=oracle.xi, groups=groups, kind=oracle.kind)
    inst = LPInstance(b=instance.b, senses=instance.senses, objective_sense=instance.objective_sense,
                      oracle=scaled, name=instance.name)
    return inst, norm


def empirical_violation_rate(kind: str, instance: LPInstance, C: float, delta: float, trials: int,
                             seed: int, K: int | None = None, n_r: int | None = None,
                             gamma: float | None = None, chi: float | None = None,
                             workers: int = 1, opts: SimplexOptions | None = None) -> ViolationResult:
    """Fraction of trials with v(P_J) - v(P) > delta_v(P_distr) + term.

    ``gamma``/``chi`` refer to the instance as given; since every structural
    constant is linear in c they are divided by ||c||_2 together with c.
    Infeasible samples never count as violations, nor (for "thm2") samples
    whose columns do not span all m rows.  ``kind`` is "thm1", "thm2"
    (i.i.d. draws, needs K) or "thm5" (groupwise draws, needs n_r).
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    inst, norm = normalized(instance)
    oracle = inst.oracle
    A_max = float(np.max(np.abs(oracle.A)))
    full = solve_simplex(restricted_instance(inst, list(range(oracle.n))), opts)
    if full.status != OPTIMAL:
        raise ValueError(f"complete LP is {full.status}")
    distr = solve_distributional(inst, oracle.xi, C, opts, full=full)
    m = inst.m
    if kind in ("thm1", "thm5"):
        if gamma is None:
            raise ValueError("gamma is required")
        scale = 1.0 + m * (gamma / norm) * A_max
        variant = "gamma"
    elif kind == "thm2":
        if chi is None:
            raise ValueError("chi is required")
        scale = chi / norm
        variant = "chi"
    else:
        raise ValueError(f"unsupported bound kind {kind!r}")
    if kind == "thm5":
        if n_r is None:
            raise ValueError("n_r is required for groupwise sampling")
        term = thm5_term(C, scale, n_r, delta, variant)
    else:
        if K is None:
            raise ValueError("K is required for i.i.d. sampling")
        term = thm2_term(C, scale, K, delta) if variant == "chi" else \
            thm1_term(C, m, gamma / norm, A_max, K, delta)

    def one(t: int):
        s = derive_seed(seed, "trial", t)
        sample = sample_groupwise(oracle, n_r, s) if kind == "thm5" else sample_iid(oracle, K, s)
        run = solve_cr(inst, sample, opts)
        if run.status != OPTIMAL:
            return None
        if variant == "chi" and run.result.diagnostics.get("redundant_rows"):
            return None  # the chi form only covers samples with rank(A_J) = m
        if inst.objective_sense == "min":
            return run.objective - full.objective
        return full.objective - run.objective

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            gaps = list(pool.map(one, range(trials)))
    else:
        gaps = [one(t) for t in range(trials)]
    feasible = [g for g in gaps if g is not None]
    limit = distr.delta_v + term
    violations = sum(1 for g in feasible if g > limit + 1e-9)
    return ViolationResult(violations / trials, violations, len(feasible), trials, term,
                           distr.delta_v, norm, [math.nan if g is None else g for g in gaps])


def clique_graph_inputs(n_groups: int, n_r: int) -> tuple[int, int, float]:
    """(K, |E|, lambda) for groupwise draws, via the canonical forest."""
    K = n_groups * n_r
    fake = SampleSet([0] * K, GROUPWISE, 0, [(k,) for k in range(K)], n_groups, n_r)
    graph = dependency_graph_of(fake)
    return K, len(graph.edges), forest_lambda(graph, canonical_forest(fake))
