"""Independent oracles the package is checked against.

Nothing here imports the solver code paths under test: LP values come from
brute-force basis enumeration or HiGHS, bound formulas from mpmath, pricing
from plain enumeration.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np
from scipy.optimize import linprog

mpmath.mp.dps = 50


def brute_force_lp(A, b, c, tol=1e-9):
    """min c^T x, A x = b, x >= 0 by enumerating every basis.

    Returns (status, value) with status in {"Optimal", "Infeasible", "Unbounded"}.
    Unboundedness is detected by a ray check with HiGHS once a feasible basis exists.
    """
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    m, n = A.shape
    rank = np.linalg.matrix_rank(A)
    # drop dependent rows so a basis has `rank` columns
    rows = []
    for i in range(m):
        if np.linalg.matrix_rank(A[rows + [i]]) > len(rows):
            rows.append(i)
    Ar, br = A[rows], b[rows]
    if np.linalg.matrix_rank(np.column_stack([A, b])) > rank:
        return "Infeasible", math.nan
    best = math.inf
    feasible = False
    if rank == 0:
        feasible = bool(np.allclose(b, 0))
        best = 0.0
    for B in itertools.combinations(range(n), rank):
        AB = Ar[:, B]
        if abs(np.linalg.det(AB)) < tol:
            continue
        xB = np.linalg.solve(AB, br)
        if np.any(xB < -1e-9):
            continue
        x = np.zeros(n)
        x[list(B)] = xB
        if not np.allclose(A @ x, b, atol=1e-7):
            continue
        feasible = True
        best = min(best, float(c @ x))
    if not feasible:
        return "Infeasible", math.nan
    # a feasible LP is unbounded iff some d >= 0, A d = 0 has c^T d < 0
    ray = linprog(c, A_eq=A, b_eq=np.zeros(m), bounds=[(0, 1)] * n, method="highs")
    if ray.status == 0 and ray.fun < -1e-9:
        return "Unbounded", -math.inf
    return "Optimal", best


def highs_lp(A, b, c, senses, sense="min"):
    """Reference LP value via scipy HiGHS. Returns (status, value)."""
    A = np.asarray(A, float)
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    sign = 1.0 if sense == "min" else -1.0
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, rhs, s in zip(A, b, senses):
        if s == "eq":
            A_eq.append(row)
            b_eq.append(rhs)
        elif s == "leq":
            A_ub.append(row)
            b_ub.append(rhs)
        else:
            A_ub.append(-row)
            b_ub.append(-rhs)
    res = linprog(sign * c, A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
                  bounds=[(0, None)] * len(c), method="highs")
    if res.status == 0:
        return "Optimal", sign * res.fun
    if res.status == 2:
        return "Infeasible", math.nan
    if res.status == 3:
        return "Unbounded", sign * -math.inf
    raise RuntimeError(res.message)


def knapsack_exhaustive(values, widths, W):
    """max v^T a, w^T a <= W over integer a >= 0 by enumeration."""
    best = 0.0
    m = len(widths)

    def rec(i, rem, acc):
        nonlocal best
        if i == m:
            best = max(best, acc)
            return
        for k in range(rem // widths[i] + 1):
            rec(i + 1, rem - k * widths[i], acc + k * values[i])

    rec(0, W, 0.0)
    return best


def maximal_patterns(widths, W):
    """All integer a >= 0 with w^T a <= W to which no piece can be added.

    Iterative depth-first walk over a stack of partial patterns, independent
    of the package's recursive enumerator.
    """
    m = len(widths)
    wmin = min(widths)
    out = []
    stack = [((), W)]
    while stack:
        prefix, rem = stack.pop()
        if len(prefix) == m:
            if rem < wmin:
                out.append(prefix)
            continue
        w = widths[len(prefix)]
        for k in range(rem // w + 1):
            stack.append((prefix + (k,), rem - k * w))
    return out


def cutting_stock_value(widths, demands, W):
    """Exhaustive-pattern LP: min 1^T x, sum_a a x_a >= d, via HiGHS."""
    pats = maximal_patterns(widths, W)
    A = np.array(pats, float).T
    return highs_lp(A, demands, np.ones(len(pats)), ["geq"] * len(widths))[1]


# ---------------------------------------------------------------- formulas in mpmath


def mp_thm1(C, m, gamma, A, K, delta):
    C, m, gamma, A, K, delta = map(mpmath.mpf, (C, m, gamma, A, K, delta))
    return C * (1 + m * gamma * A) / mpmath.sqrt(K) * (1 + mpmath.sqrt(2 * mpmath.log(2 / delta)))


def mp_thm2(C, chi, K, delta):
    C, chi, K, delta = map(mpmath.mpf, (C, chi, K, delta))
    return C * chi / mpmath.sqrt(K) * (1 + mpmath.sqrt(2 * mpmath.log(1 / delta)))


def mp_prop1(C, m, A, K, delta):
    C, m, A, K, delta = map(mpmath.mpf, (C, m, A, K, delta))
    return C / mpmath.sqrt(K) * m * A * (1 + mpmath.sqrt(2 * mpmath.log(1 / delta)))


def mp_thm4(C, scale, K, E, lam, delta, a=2):
    C, scale, K, E, lam, delta = map(mpmath.mpf, (C, scale, K, E, lam, delta))
    return C * scale * (mpmath.sqrt((K + 2 * E) / K**2)
                        + mpmath.sqrt(2 * lam * mpmath.log(a / delta) / K**2))


def mp_thm5(C, scale, n_r, delta, a=2):
    C, scale, n_r, delta = map(mpmath.mpf, (C, scale, n_r, delta))
    return C * scale / mpmath.sqrt(n_r) * (1 + mpmath.sqrt(2 * mpmath.log(a / delta)))


def mp_prop7(C, L, H, K, delta):
    C, L, H, K, delta = map(mpmath.mpf, (C, L, H, K, delta))
    return C * L * H / mpmath.sqrt(K) * (1 + 3 * mpmath.sqrt(mpmath.log(4 / delta) / 2))


def rel_err(x, ref):
    ref = mpmath.mpf(ref)
    return float(abs(mpmath.mpf(x) - ref) / max(abs(ref), mpmath.mpf("1e-300")))


# ---------------------------------------------------------------- choice pricing


def ranking_choice(sigma, assortment):
    """Option chosen from {0} u S: the one ranked first (smallest position)."""
    offered = (0,) + tuple(assortment)
    return min(offered, key=lambda i: sigma[i])


def choice_pricing_reference(p, N, assortments):
    """min over all rankings of -p^T alpha, enumerating permutations as position vectors."""
    L = N + 1
    M = len(assortments)
    best = math.inf
    for perm in itertools.permutations(range(L)):
        gain = p[M * L]
        for m, S in enumerate(assortments):
            gain += p[m * L + ranking_choice(perm, S)]
        best = min(best, -gain)
    return best
