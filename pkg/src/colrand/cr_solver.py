"""Solve LPs restricted to sampled columns, plus the near-feasibility LP and the
box-constrained distributional counterpart used by the bounds."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp_core import (INFEASIBLE, OPTIMAL, LPInstance, SimplexOptions, SolveResult,
                      SparseColumn, solve_simplex, to_standard_form)
from .sampling import SampleSet


@dataclass
class CRRun:
    instance_name: str
    sample: SampleSet
    result: SolveResult
    identities: list  # LP column k <-> identities[k]
    columns_built: int
    sampling_ms: float = field(default=0.0, compare=False)
    solve_ms: float = field(default=0.0, compare=False)

    @property
    def status(self) -> str:
        return self.result.status

    @property
    def objective(self) -> float:
        return self.result.objective

    @property
    def K(self) -> int:
        return len(self.sample)

    @property
    def duplicates(self) -> int:
        return self.K - self.columns_built

    def solution(self) -> dict:
        """Sampled-column solution keyed by identity (columns off J are zero).

        Repeated draws of one identity are separate LP columns; their values add.
        """
        if self.status != OPTIMAL:
            raise ValueError("no solution for a non-optimal run")
        out: dict = {}
        for k, ident in enumerate(self.identities):
            out[ident] = out.get(ident, 0.0) + float(self.result.x[k])
        return out

    def expand(self, n: int) -> np.ndarray:
        """Dense solution over column indices 0..n-1 (explicit oracles)."""
        x = np.zeros(n)
        for ident, val in self.solution().items():
            x[ident] += val
        return x

    def to_json(self) -> str:
        return json.dumps({
            "instance": self.instance_name,
            "K": self.K,
            "seed": self.sample.seed,
            "scheme": self.sample.scheme,
            "status": self.status,
            "objective": None if not math.isfinite(self.objective) else self.objective,
            "sampling_ms": self.sampling_ms,
            "solve_ms": self.solve_ms,
            "columns_built": self.columns_built,
            "duplicates": self.duplicates,
        }, sort_keys=True)


def materialize(instance: LPInstance, ident):
    if instance.oracle is not None:
        return instance.oracle.materialize(ident)
    return instance.columns[ident]


def restricted_instance(instance: LPInstance, identities) -> LPInstance:
    """Explicit LP over the given column identities plus the fixed columns.

    Each distinct identity is materialized once; repeats reuse the column.
    """
    cache: dict = {}
    cols = []
    for ident in identities:
        if ident not in cache:
            cache[ident] = materialize(instance, ident)
        cols.append(cache[ident])
    return LPInstance(b=instance.b, senses=instance.senses, columns=cols,
                      fixed_columns=instance.fixed_columns,
                      objective_sense=instance.objective_sense, name=instance.name)


def solve_cr(instance: LPInstance, sample: SampleSet,
             opts: SimplexOptions | None = None) -> CRRun:
    """Solve P_J.  Infeasible or unbounded outcomes are reported, not raised."""
    if len(sample) == 0:
        raise ValueError("the sample is empty")
    idents = list(sample.identities)
    t0 = time.perf_counter()
    sub = restricted_instance(instance, idents)
    res = solve_simplex(sub, opts)
    built = len(set(idents))
    return CRRun(instance.name, sample, res, idents, built, sample.elapsed_ms,
                 1e3 * (time.perf_counter() - t0))


def solve_cr_structured(instance: LPInstance, sample: SampleSet,
                        opts: SimplexOptions | None = None) -> CRRun:
    """Sample only the structural block; fixed columns (error terms, slacks) stay."""
    if not instance.fixed_columns:
        raise ValueError("a structured instance declares its always-present columns")
    return solve_cr(instance, sample, opts)


def solve_near_feasibility(instance: LPInstance, sample: SampleSet | None = None,
                           opts: SimplexOptions | None = None) -> float:
    """min ||A_J x - b||_1 over x >= 0 (slack and fixed columns stay available)."""
    idents = list(sample.identities) if sample is not None else []
    sub = restricted_instance(instance, idents)
    std, _ = to_standard_form(sub)
    zero_cost = lambda cols: tuple((0.0, col) for _, col in cols)  # noqa: E731
    errors = []
    for r in range(std.m):
        errors.append((1.0, SparseColumn((r,), (1.0,))))
        errors.append((1.0, SparseColumn((r,), (-1.0,))))
    feas = LPInstance(b=std.b, senses=std.senses, columns=zero_cost(std.columns),
                      fixed_columns=zero_cost(std.fixed_columns) + tuple(errors))
    res = solve_simplex(feas, opts)
    if res.status != OPTIMAL:
        raise RuntimeError(f"near-feasibility LP returned {res.status}")
    return res.objective


def enumerate_columns(instance: LPInstance) -> list:
    if instance.oracle is not None:
        return list(instance.oracle.enumerate())
    return list(range(len(instance.columns)))


def solve_full(instance: LPInstance, opts: SimplexOptions | None = None) -> tuple[SolveResult, list]:
    """Solve the complete LP by enumerating every column (desk scale only)."""
    idents = enumerate_columns(instance)
    return solve_simplex(restricted_instance(instance, idents), opts), idents


def _gap(instance: LPInstance, value: float, reference: float) -> float:
    return value - reference if instance.objective_sense == "min" else reference - value


@dataclass
class DistrCounterpart:
    C: float
    xi: np.ndarray
    result: SolveResult
    full_objective: float  # v(P)
    delta_v: float  # v(P_distr) - v(P) for min problems (sign-flipped for max)

    @property
    def status(self) -> str:
        return self.result.status


def solve_distributional(instance: LPInstance, xi=None, C: float = 1.0,
                         opts: SimplexOptions | None = None,
                         full: SolveResult | None = None) -> DistrCounterpart:
    """The complete LP with the extra box 0 <= x <= C * xi.

    Each column with xi_j > 0 gets a row x_j + u_j = C xi_j with its own slack
    u_j; columns with xi_j = 0 are forced to zero and dropped.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    idents = enumerate_columns(instance)
    if xi is None:
        xi = getattr(instance.oracle, "xi", None)
        if xi is None:
            raise ValueError("the distributional counterpart needs an explicit xi")
    xi = np.asarray(xi, dtype=float)
    if xi.size != len(idents):
        raise ValueError("xi does not match the enumerated columns")
    if full is None:
        full = solve_simplex(restricted_instance(instance, idents), opts)
    m = instance.m
    keep = [j for j in range(len(idents)) if xi[j] > 0]
    cols, box_slacks, rhs = [], [], list(instance.b)
    for t, j in enumerate(keep):
        cost, col = materialize(instance, idents[j])
        cols.append((cost, SparseColumn(col.rows + (m + t,), col.values + (1.0,))))
        box_slacks.append((0.0, SparseColumn((m + t,), (1.0,))))
        rhs.append(C * xi[j])
    fixed = tuple((cost, col) for cost, col in instance.fixed_columns)
    boxed = LPInstance(b=np.array(rhs), senses=instance.senses + ("eq",) * len(keep),
                       columns=tuple(cols), fixed_columns=fixed + tuple(box_slacks),
                       objective_sense=instance.objective_sense, name=instance.name)
    res = solve_simplex(boxed, opts)
    if res.status == OPTIMAL and full.status == OPTIMAL:
        delta = _gap(instance, res.objective, full.objective)
    elif res.status == INFEASIBLE:
        delta = math.inf
    else:
        delta = math.nan
    return DistrCounterpart(C, xi, res, full.objective, delta)
