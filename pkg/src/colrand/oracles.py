"""Column oracles and instance generators.

An oracle turns a column identity into ``(cost, SparseColumn)`` and knows how
to draw a random identity from a caller-owned generator.  Identities are the
canonical keys: an int for explicit matrices, a pattern tuple for cutting
stock, a Lehmer rank for rankings and an ``(s, a)`` pair for MDPs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .lp_core import LPInstance, SparseColumn, l1_linearize
from .rng import stream


class ColumnOracle:
    """Interface shared by all column families."""

    kind: str = ""
    n = None  # number of columns; None when only symbolic
    n_rows: int = 0
    n_groups: int | None = None
    xi: np.ndarray | None = None  # explicit sampling law over enumerate() order

    def sample(self, rng: np.random.Generator):
        raise NotImplementedError

    def materialize(self, ident) -> tuple[float, SparseColumn]:
        raise NotImplementedError

    def enumerate(self) -> Iterator:
        raise NotImplementedError(f"{self.kind} columns are not enumerable")

    def sample_in_group(self, g: int, rng: np.random.Generator):
        raise NotImplementedError(f"{self.kind} has no column groups")

    def group_of(self, ident) -> int:
        raise NotImplementedError(f"{self.kind} has no column groups")

    def encode(self, ident):
        return ident

    def decode(self, obj):
        return obj


def _inverse_cdf(cdf: np.ndarray, u: float) -> int:
    j = int(np.searchsorted(cdf, u, side="right"))
    return min(j, cdf.size - 1)


class ExplicitOracle(ColumnOracle):
    """Dense matrix with an explicit sampling vector xi (uniform by default).

    ``groups`` optionally labels columns 0..n_G-1 for groupwise sampling; the
    within-group law is xi restricted to the group and renormalized.
    """

    def __init__(self, A, c, xi=None, groups=None, kind: str = "ExplicitDense"):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.c = np.asarray(c, dtype=float).reshape(-1)
        self.n_rows, self.n = self.A.shape
        if self.c.size != self.n:
            raise ValueError("cost vector does not match the column count")
        xi = np.full(self.n, 1.0 / self.n) if xi is None else np.asarray(xi, dtype=float)
        if xi.shape != (self.n,) or np.any(xi < 0) or abs(xi.sum() - 1.0) > 1e-9:
            raise ValueError("xi must be a probability vector over the columns")
        self.xi = xi
        self.kind = kind
        self._cdf = np.cumsum(xi)
        self._cols = [SparseColumn.from_dense(self.A[:, j]) for j in range(self.n)]
        self.groups = None
        if groups is not None:
            self.groups = np.asarray(groups, dtype=int)
            self.n_groups = int(self.groups.max()) + 1
            self._group_members = [np.flatnonzero(self.groups == g) for g in range(self.n_groups)]
            self._group_cdf = []
            for g, members in enumerate(self._group_members):
                mass = xi[members]
                if members.size == 0 or mass.sum() <= 0:
                    raise ValueError(f"group {g} has empty support")
                self._group_cdf.append(np.cumsum(mass / mass.sum()))

    def sample(self, rng):
        return _inverse_cdf(self._cdf, rng.random())

    def sample_in_group(self, g, rng):
        members = self._group_members[g]
        return int(members[_inverse_cdf(self._group_cdf[g], rng.random())])

    def group_of(self, ident):
        return int(self.groups[ident])

    def materialize(self, ident):
        return float(self.c[ident]), self._cols[ident]

    def enumerate(self):
        return iter(range(self.n))


# ---------------------------------------------------------------- cutting stock


@dataclass(frozen=True)
class CuttingStockParams:
    W: int
    widths: tuple[int, ...]
    demands: tuple[int, ...]

    def __post_init__(self):
        if self.W <= 0 or len(self.widths) != len(self.demands) or not self.widths:
            raise ValueError("invalid cutting-stock sizes")
        if any(w <= 0 or w > self.W for w in self.widths):
            raise ValueError("every width must lie in [1, W]")

    @property
    def m(self) -> int:
        return len(self.widths)


def sample_cutting_pattern(params: CuttingStockParams, rng: np.random.Generator) -> tuple[int, ...]:
    """Greedy random fill: repeatedly add a uniformly chosen piece that still fits.

    The candidate set {i : w_i <= remaining} is ordered by (width, index), so it
    is a prefix of that order; a uniform u picks position floor(u * |I|).
    """
    order = sorted(range(params.m), key=lambda i: (params.widths[i], i))
    sorted_w = [params.widths[i] for i in order]
    a = [0] * params.m
    remaining = params.W
    while True:
        k = _count_leq(sorted_w, remaining)
        if k == 0:
            return tuple(a)
        i = order[min(int(rng.random() * k), k - 1)]
        a[i] += 1
        remaining -= params.widths[i]


def _count_leq(sorted_vals: Sequence[int], bound: int) -> int:
    lo, hi = 0, len(sorted_vals)
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_vals[mid] <= bound:
            lo = mid + 1
        else:
            hi = mid
    return lo


def enumerate_maximal_patterns(params: CuttingStockParams) -> list[tuple[int, ...]]:
    """All patterns a with w^T a <= W to which no further piece can be added."""
    w, W, m = params.widths, params.W, params.m
    wmin = min(w)
    out: list[tuple[int, ...]] = []
    a = [0] * m

    def rec(i: int, rem: int):
        if i == m:
            if rem < wmin:
                out.append(tuple(a))
            return
        for k in range(rem // w[i] + 1):
            a[i] = k
            rec(i + 1, rem - k * w[i])
        a[i] = 0

    rec(0, W)
    return out


class CuttingStockOracle(ColumnOracle):
    kind = "CuttingStock"

    def __init__(self, params: CuttingStockParams):
        self.params = params
        self.n_rows = params.m

    def sample(self, rng):
        return sample_cutting_pattern(self.params, rng)

    def materialize(self, ident):
        if len(ident) != self.params.m:
            raise ValueError("pattern has the wrong length")
        if sum(a * w for a, w in zip(ident, self.params.widths)) > self.params.W:
            raise ValueError("pattern exceeds the roll width")
        return 1.0, SparseColumn.from_entries((i, a) for i, a in enumerate(ident) if a)

    def enumerate(self):
        return iter(enumerate_maximal_patterns(self.params))

    def encode(self, ident):
        return list(ident)

    def decode(self, obj):
        return tuple(int(v) for v in obj)


# ---------------------------------------------------------------- rankings


def lehmer_rank(perm: Sequence[int]) -> int:
    """Lexicographic index of a permutation of 0..L-1."""
    L = len(perm)
    rank = 0
    for i in range(L):
        smaller = sum(1 for j in range(i + 1, L) if perm[j] < perm[i])
        rank += smaller * math.factorial(L - 1 - i)
    return rank


def lehmer_unrank(rank: int, L: int) -> tuple[int, ...]:
    if not 0 <= rank < math.factorial(L):
        raise ValueError("rank out of range")
    pool = list(range(L))
    out = []
    for i in range(L):
        f = math.factorial(L - 1 - i)
        d, rank = divmod(rank, f)
        out.append(pool.pop(d))
    return tuple(out)


@dataclass(frozen=True)
class ChoiceParams:
    """Assortments are tuples of products in 1..N; option 0 is no-purchase.

    ``v[m][i]`` is the observed choice frequency of option i under assortment m.
    Rows of the estimation LP are ordered assortment-major: row m*(N+1)+i.
    """

    N: int
    assortments: tuple[tuple[int, ...], ...]
    v: tuple[tuple[float, ...], ...]
    utilities: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.N < 1 or not self.assortments or len(self.v) != len(self.assortments):
            raise ValueError("invalid choice sizes")
        for S, row in zip(self.assortments, self.v):
            if len(row) != self.N + 1 or any(not 1 <= i <= self.N for i in S):
                raise ValueError("malformed assortment data")
            offered = set(S) | {0}
            if abs(sum(row[i] for i in offered) - 1.0) > 1e-9:
                raise ValueError("choice frequencies must sum to one on each assortment")
            if any(row[i] != 0.0 for i in range(self.N + 1) if i not in offered):
                raise ValueError("frequency mass on an option that was not offered")

    @property
    def M(self) -> int:
        return len(self.assortments)

    @property
    def n_fit_rows(self) -> int:
        return self.M * (self.N + 1)

    def target(self) -> np.ndarray:
        return np.array(self.v, dtype=float).reshape(-1)


def sample_ranking(params: ChoiceParams, rng: np.random.Generator) -> int:
    """Uniform ranking via Fisher-Yates; returned as its Lehmer rank.

    The permutation is read as a rank vector: sigma[i] is the position of option i.
    """
    sigma = list(range(params.N + 1))
    for i in range(params.N, 0, -1):
        j = int(rng.integers(0, i + 1))
        sigma[i], sigma[j] = sigma[j], sigma[i]
    return lehmer_rank(sigma)


def ranking_choices(sigma: Sequence[int], params: ChoiceParams) -> list[int]:
    """Chosen option per assortment: the offered option of smallest rank."""
    out = []
    for S in params.assortments:
        best = 0
        for i in S:
            if sigma[i] < sigma[best]:
                best = i
        out.append(best)
    return out


def ranking_to_column(sigma: Sequence[int], params: ChoiceParams) -> tuple[float, SparseColumn]:
    """Cost-0 column with a one per assortment and a one in the unit-sum row."""
    k = params.N + 1
    rows = [m * k + i for m, i in enumerate(ranking_choices(sigma, params))]
    rows.append(params.n_fit_rows)
    return 0.0, SparseColumn(tuple(rows), (1.0,) * len(rows))


class ChoiceOracle(ColumnOracle):
    kind = "ChoiceRanking"

    def __init__(self, params: ChoiceParams):
        self.params = params
        self.n = math.factorial(params.N + 1)
        self.n_rows = params.n_fit_rows + 1

    def sample(self, rng):
        return sample_ranking(self.params, rng)

    def materialize(self, ident):
        return ranking_to_column(lehmer_unrank(int(ident), self.params.N + 1), self.params)

    def enumerate(self):
        return iter(range(self.n))


def choice_instance(params: ChoiceParams, name: str = "") -> LPInstance:
    """min ||v - A lam||_1 over the ranking columns, oracle-backed."""
    return l1_linearize(params.target(), oracle=ChoiceOracle(params), name=name)


# ---------------------------------------------------------------- MDPs


@dataclass(frozen=True, eq=False)
class MDPParams:
    """``P[s, a, s2]`` is the probability of moving s -> s2 under action a."""

    theta: float
    costs: np.ndarray  # (n_s, n_a)
    P: np.ndarray  # (n_s, n_a, n_s)

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=float)
        P = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "P", P)
        if not 0.0 <= self.theta < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        n_s, n_a = costs.shape
        if P.shape != (n_s, n_a, n_s):
            raise ValueError("transition tensor has the wrong shape")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=2) - 1.0) > 1e-9):
            raise ValueError("transitions must be stochastic")

    @property
    def n_s(self) -> int:
        return self.costs.shape[0]

    @property
    def n_a(self) -> int:
        return self.costs.shape[1]


def mdp_column(s: int, a: int, params: MDPParams) -> tuple[float, SparseColumn]:
    """Occupancy-measure column e_s - theta * P(. | s, a)."""
    col = -params.theta * params.P[s, a]
    col[s] += 1.0
    return float(params.costs[s, a]), SparseColumn.from_dense(col)


class MDPOracle(ColumnOracle):
    """Columns (s, a) grouped by state; uniform over actions within a state."""

    kind = "MDP"

    def __init__(self, params: MDPParams):
        self.params = params
        self.n = params.n_s * params.n_a
        self.n_rows = params.n_s
        self.n_groups = params.n_s
        self.xi = np.full(self.n, 1.0 / self.n)

    def sample(self, rng):
        k = min(int(rng.random() * self.n), self.n - 1)
        return divmod(k, self.params.n_a)

    def sample_in_group(self, g, rng):
        return (int(g), min(int(rng.random() * self.params.n_a), self.params.n_a - 1))

    def group_of(self, ident):
        return int(ident[0])

    def materialize(self, ident):
        s, a = ident
        return mdp_column(int(s), int(a), self.params)

    def enumerate(self):
        return iter(itertools.product(range(self.params.n_s), range(self.params.n_a)))

    def encode(self, ident):
        return list(ident)

    def decode(self, obj):
        return (int(obj[0]), int(obj[1]))


def mdp_instance(params: MDPParams, name: str = "") -> LPInstance:
    return LPInstance(b=np.ones(params.n_s), senses=("eq",) * params.n_s,
                      oracle=MDPOracle(params), name=name)


# ---------------------------------------------------------------- covering / packing


@dataclass(frozen=True, eq=False)
class CoverPackParams:
    kind: str  # "covering" or "packing"
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if np.any(A < 0):
            raise ValueError("covering/packing matrices are nonnegative")
        if self.kind == "covering":
            if np.any(A.max(axis=1) <= 0):
                raise ValueError("every covering row needs a positive entry")
        elif self.kind == "packing":
            if np.any(A.max(axis=0) <= 0) or np.any(self.b <= 0) or np.any(self.c < 0):
                raise ValueError("packing needs positive columns, b > 0 and c >= 0")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")


def explicit_instance(A, b, c, senses=None, objective_sense="min", xi=None, groups=None,
                      kind="ExplicitDense", name="") -> LPInstance:
    """Oracle-backed wrapper around a dense matrix (keeps xi for sampling)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    senses = senses if senses is not None else ("eq",) * A.shape[0]
    oracle = ExplicitOracle(A, c, xi=xi, groups=groups, kind=kind)
    return LPInstance(b=b, senses=senses, objective_sense=objective_sense, oracle=oracle, name=name)


def cover_pack_instance(params: CoverPackParams, name: str = "") -> LPInstance:
    if params.kind == "covering":
        return explicit_instance(params.A, params.b, params.c, ("geq",) * params.A.shape[0],
                                 "min", kind="Covering", name=name)
    return explicit_instance(params.A, params.b, params.c, ("leq",) * params.A.shape[0],
                             "max", kind="Packing", name=name)


def transport_matrix(n_src: int, n_dst: int) -> np.ndarray:
    """Source/sink incidence of a complete bipartite graph, last sink row dropped.

    The full incidence matrix has rank n_src + n_dst - 1; dropping one row
    gives full row rank and keeps total unimodularity.
    """
    n = n_src * n_dst
    A = np.zeros((n_src + n_dst - 1, n))
    for i in range(n_src):
        for j in range(n_dst):
            k = i * n_dst + j
            A[i, k] = 1.0
            if j < n_dst - 1:
                A[n_src + j, k] = 1.0
    return A


# ---------------------------------------------------------------- generators

KINDS = ("cutting_stock", "choice", "mdp", "covering", "packing", "transport", "explicit")


def generate_cutting_stock(m: int, W: int, seed: int) -> CuttingStockParams:
    lo, hi = -(-W // 10), W // 4
    if m < 1 or lo < 1 or hi - lo + 1 < m:
        raise ValueError(f"cannot draw {m} distinct widths from [{lo}, {hi}]")
    rng = stream(seed, "generate", "cutting_stock")
    widths = rng.choice(np.arange(lo, hi + 1), size=m, replace=False)
    demands = rng.integers(1, 101, size=m)
    return CuttingStockParams(int(W), tuple(int(w) for w in widths), tuple(int(d) for d in demands))


def mnl_probabilities(utilities: Sequence[float], assortment: Sequence[int], N: int) -> list[float]:
    e = {i: math.exp(utilities[i - 1]) for i in assortment}
    denom = 1.0 + sum(e.values())
    row = [0.0] * (N + 1)
    row[0] = 1.0 / denom
    for i, val in e.items():
        row[i] = val / denom
    return row


def generate_choice(N: int, M: int, seed: int) -> ChoiceParams:
    if N < 1 or M < 1:
        raise ValueError("choice sizes must be positive")
    rng = stream(seed, "generate", "choice")
    u = rng.random(N)
    assortments = []
    for _ in range(M):
        mask = int(rng.integers(1, 2 ** N))  # nonempty subsets only
        assortments.append(tuple(i + 1 for i in range(N) if mask >> i & 1))
    v = tuple(tuple(mnl_probabilities(u, S, N)) for S in assortments)
    return ChoiceParams(N, tuple(assortments), v, tuple(float(x) for x in u))


def generate_mdp(n_s: int, n_a: int, theta: float, seed: int) -> MDPParams:
    if n_s < 1 or n_a < 1:
        raise ValueError("MDP sizes must be positive")
    rng = stream(seed, "generate", "mdp")
    P = rng.dirichlet(np.ones(n_s), size=(n_s, n_a))
    costs = rng.random((n_s, n_a))
    return MDPParams(float(theta), costs, P)


def generate_cover_pack(kind: str, m: int, n: int, seed: int, density: float = 0.5) -> CoverPackParams:
    if m < 1 or n < 1 or not 0 < density <= 1:
        raise ValueError("invalid covering/packing sizes")
    rng = stream(seed, "generate", kind)
    A = rng.random((m, n)) * (rng.random((m, n)) < density)
    # repair: every covering row / packing column gets a positive entry
    if kind == "covering":
        for i in np.flatnonzero(A.max(axis=1) <= 0):
            A[i, rng.integers(n)] = 0.5 + 0.5 * rng.random()
        c = 0.1 + 0.9 * rng.random(n)
        b = 1.0 + rng.random(m)
    else:
        for j in np.flatnonzero(A.max(axis=0) <= 0):
            A[rng.integers(m), j] = 0.5 + 0.5 * rng.random()
        c = rng.random(n)
        b = 1.0 + rng.random(m)
    return CoverPackParams(kind, A, b, c)


@dataclass(frozen=True, eq=False)
class DenseParams:
    """Explicit LP data (transportation and generic random instances)."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    senses: tuple[str, ...]
    objective_sense: str = "min"
    tu: bool = False


def generate_transport(n_src: int, n_dst: int, seed: int) -> DenseParams:
    """Transportation LP whose rhs comes from a point in [0, 1]^n.

    Using b = A x0 with x0 in the unit box keeps the box x <= 1 (C = n under
    uniform xi) feasible, so the distributional counterpart is well defined.
    """
    rng = stream(seed, "generate", "transport")
    A = transport_matrix(n_src, n_dst)
    x0 = rng.random(A.shape[1])
    c = rng.random(A.shape[1])
    return DenseParams(A, A @ x0, c, ("eq",) * A.shape[0], tu=True)


def generate_explicit(m: int, n: int, seed: int) -> DenseParams:
    """Random feasible, bounded standard-form LP (b from a nonnegative point, c > 0)."""
    rng = stream(seed, "generate", "explicit")
    A = rng.normal(size=(m, n))
    x0 = rng.random(n)
    c = 0.1 + rng.random(n)
    return DenseParams(A, A @ x0, c, ("eq",) * m)


def generate_instance(kind: str, sizes: dict, seed: int):
    """Return (params, LPInstance) for a generator kind and its size dict."""
    name = f"{kind}-{seed}"
    if kind == "cutting_stock":
        params = generate_cutting_stock(int(sizes.get("m", 50)), int(sizes.get("W", 1000)), seed)
        return params, cutting_stock_instance(params, name)
    if kind == "choice":
        params = generate_choice(int(sizes.get("N", 5)), int(sizes.get("M", 20)), seed)
        return params, choice_instance(params, name)
    if kind == "mdp":
        params = generate_mdp(int(sizes.get("n_s", 5)), int(sizes.get("n_a", 10)),
                              float(sizes.get("theta", 0.9)), seed)
        return params, mdp_instance(params, name)
    if kind in ("covering", "packing"):
        params = generate_cover_pack(kind, int(sizes.get("m", 5)), int(sizes.get("n", 20)), seed,
                                     float(sizes.get("density", 0.5)))
        return params, cover_pack_instance(params, name)
    if kind == "transport":
        params = generate_transport(int(sizes.get("n_src", 3)), int(sizes.get("n_dst", 4)), seed)
        return params, dense_instance(params, name)
    if kind == "explicit":
        params = generate_explicit(int(sizes.get("m", 3)), int(sizes.get("n", 10)), seed)
        return params, dense_instance(params, name)
    raise ValueError(f"unknown instance kind {kind!r}")


def cutting_stock_instance(params: CuttingStockParams, name: str = "") -> LPInstance:
    return LPInstance(b=np.array(params.demands, dtype=float), senses=("geq",) * params.m,
                      oracle=CuttingStockOracle(params), name=name)


def dense_instance(params: DenseParams, name: str = "") -> LPInstance:
    kind = "TU" if params.tu else "ExplicitDense"
    return explicit_instance(params.A, params.b, params.c, params.senses, params.objective_sense,
                             kind=kind, name=name)
