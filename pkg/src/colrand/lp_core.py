"""LP containers and a dense two-phase revised simplex.

The solver works on ``min c^T x, Ax = b, x >= 0``.  Anything else (inequality
rows, a max objective) is brought into that form by :func:`to_standard_form`
and mapped back afterwards, so callers always see primal values for their own
columns and duals in their own sign convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
GAP_TOL = 1e-6
PIVOT_TOL = 1e-9

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"

SENSES = ("eq", "geq", "leq")


@dataclass(frozen=True)
class SparseColumn:
    """Column stored as parallel tuples of sorted row indices and nonzero values."""

    rows: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.values):
            raise ValueError("rows and values differ in length")
        for a, b in zip(self.rows, self.rows[1:]):
            if b <= a:
                raise ValueError("row indices must be strictly increasing")
        if self.rows and self.rows[0] < 0:
            raise ValueError("negative row index")
        if any(v == 0.0 or not math.isfinite(v) for v in self.values):
            raise ValueError("column values must be finite and nonzero")

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[int, float]]) -> "SparseColumn":
        acc: dict[int, float] = {}
        for r, v in entries:
            acc[int(r)] = acc.get(int(r), 0.0) + float(v)
        items = sorted((r, v) for r, v in acc.items() if v != 0.0)
        return cls(tuple(r for r, _ in items), tuple(v for _, v in items))

    @classmethod
    def from_dense(cls, vec: Sequence[float]) -> "SparseColumn":
        vec = np.asarray(vec, dtype=float)
        idx = np.flatnonzero(vec)
        return cls(tuple(int(i) for i in idx), tuple(float(vec[i]) for i in idx))

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.rows, self.values))

    def norm_inf(self) -> float:
        return max((abs(v) for v in self.values), default=0.0)

    def norm2(self) -> float:
        return math.sqrt(sum(v * v for v in self.values))

    def dot(self, p: np.ndarray) -> float:
        return float(sum(p[r] * v for r, v in zip(self.rows, self.values)))

    def to_dense(self, m: int) -> np.ndarray:
        out = np.zeros(m)
        if self.rows:
            out[list(self.rows)] = self.values
        return out


Column = tuple[float, SparseColumn]


@dataclass(frozen=True, eq=False)
class LPInstance:
    """An LP with explicit and/or oracle-backed columns.

    Column ids run over ``columns`` first and then ``fixed_columns``.  An
    oracle-backed instance keeps ``columns`` empty; a solver only ever sees a
    materialized explicit copy.
    """

    b: np.ndarray
    senses: tuple[str, ...]
    columns: tuple[Column, ...] = ()
    fixed_columns: tuple[Column, ...] = ()
    objective_sense: str = "min"
    oracle: object | None = None
    name: str = ""

    def __post_init__(self):
        b = np.array(self.b, dtype=float).reshape(-1)
        b.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", tuple(self.senses))
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "fixed_columns", tuple(self.fixed_columns))
        if b.size == 0:
            raise ValueError("an LP needs at least one row")
        if not np.all(np.isfinite(b)):
            raise ValueError("rhs must be finite")
        if len(self.senses) != b.size or any(s not in SENSES for s in self.senses):
            raise ValueError("one sense in {eq, geq, leq} per row is required")
        if self.objective_sense not in ("min", "max"):
            raise ValueError("objective_sense must be 'min' or 'max'")
        for cost, col in self.columns + self.fixed_columns:
            if not math.isfinite(cost):
                raise ValueError("costs must be finite")
            if col.rows and col.rows[-1] >= b.size:
                raise ValueError("column row index out of range")

    @property
    def m(self) -> int:
        return int(self.b.size)

    @property
    def is_explicit(self) -> bool:
        return self.oracle is None

    @property
    def num_columns(self):
        """Structural column count (symbolic ``oracle.n`` when oracle-backed)."""
        if self.oracle is not None:
            return getattr(self.oracle, "n", None)
        return len(self.columns)

    def all_columns(self) -> tuple[Column, ...]:
        return self.columns + self.fixed_columns

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, c) over explicit columns followed by fixed columns."""
        cols = self.all_columns()
        A = np.zeros((self.m, len(cols)))
        c = np.zeros(len(cols))
        for j, (cost, col) in enumerate(cols):
            c[j] = cost
            if col.rows:
                A[list(col.rows), j] = col.values
        return A, c

    @classmethod
    def from_dense(cls, A, b, c, senses=None, objective_sense="min", name="", fixed=()):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        c = np.asarray(c, dtype=float).reshape(-1)
        if A.shape[1] != c.size:
            raise ValueError("A and c disagree on the column count")
        cols = tuple((float(c[j]), SparseColumn.from_dense(A[:, j])) for j in range(c.size))
        senses = tuple(senses) if senses is not None else ("eq",) * A.shape[0]
        return cls(b=b, senses=senses, columns=cols, fixed_columns=tuple(fixed),
                   objective_sense=objective_sense, name=name)


@dataclass
class SolveResult:
    status: str
    objective: float
    x: np.ndarray
    p: np.ndarray
    basis: tuple[int, ...]
    iterations: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def primal(self) -> dict[int, float]:
        return {int(j): float(v) for j, v in enumerate(self.x) if v != 0.0}


@dataclass(frozen=True)
class SimplexOptions:
    feas_tol: float = FEAS_TOL
    opt_tol: float = OPT_TOL
    gap_tol: float = GAP_TOL
    pivot_tol: float = PIVOT_TOL
    refactor_every: int = 64
    bland_after: int = 200
    max_iters: int | None = None


@dataclass(frozen=True)
class StandardFormMap:
    """How to carry a standard-form solution back to the source LP."""

    n_columns: int
    n_fixed: int
    negated: bool

    def recover(self, res: SolveResult) -> SolveResult:
        keep = self.n_columns + self.n_fixed
        sign = -1.0 if self.negated else 1.0
        return replace(
            res,
            objective=sign * res.objective,
            x=res.x[:keep].copy(),
            p=sign * res.p,
        )


def to_standard_form(inst: LPInstance) -> tuple[LPInstance, StandardFormMap]:
    """Equality rows and a min objective; slacks/surpluses go to fixed_columns.

    For a max objective every cost is negated and the recovered dual is negated
    back, which makes it feasible for the dual of the max problem.
    """
    negated = inst.objective_sense == "max"
    slacks = []
    for i, s in enumerate(inst.senses):
        if s == "leq":
            slacks.append((0.0, SparseColumn((i,), (1.0,))))
        elif s == "geq":
            slacks.append((0.0, SparseColumn((i,), (-1.0,))))
    if negated:
        if inst.oracle is not None:
            raise ValueError("materialize oracle columns before negating a max objective")
        flip = lambda cols: tuple((-cost if cost else 0.0, col) for cost, col in cols)  # noqa: E731
        columns, fixed = flip(inst.columns), flip(inst.fixed_columns)
    else:
        columns, fixed = inst.columns, inst.fixed_columns
    std = replace(
        inst,
        senses=("eq",) * inst.m,
        columns=columns,
        fixed_columns=fixed + tuple(slacks),
        objective_sense="min",
    )
    return std, StandardFormMap(len(inst.columns), len(inst.fixed_columns), negated)


def solve_simplex(inst: LPInstance, opts: SimplexOptions | None = None) -> SolveResult:
    """Solve an explicit LP; x covers its columns then its fixed columns."""
    if not inst.is_explicit:
        raise ValueError("solve_simplex needs explicit columns")
    opts = opts or SimplexOptions()
    std, mapping = to_standard_form(inst)
    A, c = std.dense()
    res = solve_dense(A, std.b, c, opts)
    return mapping.recover(res)


def solve_dense(A: np.ndarray, b: np.ndarray, c: np.ndarray,
                opts: SimplexOptions | None = None) -> SolveResult:
    """min c^T x s.t. Ax = b, x >= 0 with dense data."""
    return _Simplex(np.asarray(A, float), np.asarray(b, float), np.asarray(c, float),
                    opts or SimplexOptions()).run()


class _Simplex:
    """Revised simplex with an explicit basis inverse.

    Artificial variables occupy working columns n..n+m-1 (one per row).  Once an
    artificial leaves the basis it is barred from re-entering.
    """

    def __init__(self, A, b, c, opts: SimplexOptions):
        m, n = A.shape
        if b.shape != (m,) or c.shape != (n,):
            raise ValueError("inconsistent LP dimensions")
        self.m, self.n, self.opts = m, n, opts
        # rows with negative rhs are flipped so the artificial start is feasible
        self.row_sign = np.where(b < 0, -1.0, 1.0)
        self.b = b * self.row_sign
        self.W = np.hstack([A * self.row_sign[:, None], np.eye(m)])
        self.c = c
        self.basis = np.arange(n, n + m)
        self.Binv = np.eye(m)
        self.xB = self.b.copy()
        self.allowed = np.ones(n + m, dtype=bool)
        self.max_iters = opts.max_iters if opts.max_iters is not None else 50 * (m + n)
        self.iterations = 0
        self.since_refactor = 0
        self.degenerate_run = 0
        self.diagnostics: dict = {}

    # -- linear algebra -------------------------------------------------
    def _refactor(self):
        B = self.W[:, self.basis]
        self.Binv = np.linalg.inv(B)
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < 1e-13] = 0.0
        self.since_refactor = 0

    def _pivot(self, r: int, q: int, u: np.ndarray, theta: float):
        self.xB -= theta * u
        self.xB[r] = theta
        np.maximum(self.xB, 0.0, out=self.xB, where=self.xB > -self.opts.feas_tol)
        row = self.Binv[r] / u[r]
        u = u.copy()
        u[r] = 0.0
        self.Binv -= np.outer(u, row)
        self.Binv[r] = row
        leaving = self.basis[r]
        if leaving >= self.n:
            self.allowed[leaving] = False
        self.basis[r] = q
        self.iterations += 1
        self.since_refactor += 1
        if self.since_refactor >= self.opts.refactor_every:
            self._refactor()

    # -- main loop ----------------------------------------------------------
    def _iterate(self, cost: np.ndarray, phase: int) -> str:
        opts = self.opts
        while True:
            if self.iterations >= self.max_iters:
                return ITERATION_LIMIT
            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.W
            d[~self.allowed] = np.inf
            d[self.basis] = np.inf
            bland = self.degenerate_run >= opts.bland_after
            if bland:
                cand = np.flatnonzero(d < -opts.opt_tol)
                if cand.size == 0:
                    return OPTIMAL
                q = int(cand[0])
            else:
                q = int(np.argmin(d))
                if not d[q] < -opts.opt_tol:
                    return OPTIMAL
            u = self.Binv @ self.W[:, q]
            rows = np.flatnonzero(u > opts.pivot_tol)
            if rows.size == 0:
                if phase == 1:  # cannot happen with a bounded phase-1 objective
                    raise RuntimeError("phase-1 ray detected")
                return UNBOUNDED
            ratios = self.xB[rows] / u[rows]
            theta = float(ratios.min())
            ties = rows[ratios <= theta + 1e-12 * (1.0 + theta)]
            if bland and ties.size > 1:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[0])
            theta = max(float(self.xB[r] / u[r]), 0.0)
            if theta <= opts.pivot_tol:
                self.degenerate_run += 1
            else:
                self.degenerate_run = 0
            self._pivot(r, q, u, theta)

    def _drive_out_artificials(self):
        redundant = []
        for r in range(self.m):
            if self.basis[r] < self.n:
                continue
            row = self.Binv[r] @ self.W[:, : self.n]
            row[self.basis[self.basis < self.n]] = 0.0
            j = int(np.argmax(np.abs(row))) if self.n else 0
            if self.n and abs(row[j]) > self.opts.pivot_tol:
                u = self.Binv @ self.W[:, j]
                self.xB[r] = 0.0
                self._pivot(r, j, u, 0.0)
            else:
                redundant.append(r)
        if redundant:
            self.diagnostics["redundant_rows"] = redundant
        return redundant

    def _result(self, status: str, cost: np.ndarray) -> SolveResult:
        x = np.zeros(self.n)
        real = self.basis < self.n
        x[self.basis[real]] = self.xB[real]
        if status == OPTIMAL:
            y = cost[self.basis] @ self.Binv
            p = y * self.row_sign
            obj = float(self.c @ x)
        else:
            p = np.zeros(self.m)
            obj = -math.inf if status == UNBOUNDED else math.nan
        self.diagnostics.setdefault("artificial_basic", int(np.sum(~real)))
        return SolveResult(status, obj, x, p, tuple(int(v) for v in self.basis),
                           self.iterations, self.diagnostics)

    def run(self) -> SolveResult:
        m, n = self.m, self.n
        phase1 = np.zeros(n + m)
        phase1[n:] = 1.0
        status = self._iterate(phase1, phase=1)
        if status == ITERATION_LIMIT:
            return self._result(status, phase1)
        infeas = float(np.sum(self.xB[self.basis >= n]))
        self.diagnostics["phase1_objective"] = infeas
        if infeas > self.opts.feas_tol:
            return self._result(INFEASIBLE, phase1)
        self._drive_out_artificials()
        self.allowed[n:] = False
        phase2 = np.concatenate([self.c, np.zeros(m)])
        self.degenerate_run = 0
        status = self._iterate(phase2, phase=2)
        return self._result(status, phase2)


def reduced_costs(inst: LPInstance, result: SolveResult, cols: Sequence[int]) -> np.ndarray:
    """c_j - p^T A_j for the requested column ids of an explicit instance."""
    if not result.optimal:
        raise ValueError("reduced costs need an optimal result")
    allc = inst.all_columns()
    out = np.empty(len(cols))
    for k, j in enumerate(cols):
        if not 0 <= j < len(allc):
            raise KeyError(f"unknown column id {j}")
        cost, col = allc[j]
        out[k] = cost - col.dot(result.p)
    return out


def l1_linearize(v: Sequence[float], columns: Iterable[Column] = (), oracle=None,
                 name: str = "") -> LPInstance:
    """min ||v - A lam||_1 with 1^T lam = 1, lam >= 0, as an LP.

    Rows 0..len(v)-1 are the fit rows, row len(v) is the unit-sum row.  Each
    fit row gets a pair of cost-1 error columns (+e_r, -e_r) in fixed_columns.
    Explicit ``columns`` are given over the fit rows only and receive their unit
    entry here; oracle columns are expected to carry it already.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("target must be finite")
    k = v.size
    fixed = []
    for r in range(k):
        fixed.append((1.0, SparseColumn((r,), (1.0,))))
        fixed.append((1.0, SparseColumn((r,), (-1.0,))))
    cols = []
    for cost, col in columns:
        if col.rows and col.rows[-1] >= k:
            raise ValueError("structural columns must live on the fit rows")
        cols.append((cost, SparseColumn(col.rows + (k,), col.values + (1.0,))))
    return LPInstance(b=np.append(v, 1.0), senses=("eq",) * (k + 1), columns=tuple(cols),
                      fixed_columns=tuple(fixed), oracle=oracle, name=name)
