"""Randomization schemes and dependency-graph bookkeeping."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .rng import stream

IID = "iid"
GROUPWISE = "groupwise"


@dataclass
class SampleSet:
    identities: list
    scheme: str
    seed: int
    stream_ids: list[tuple]
    n_groups: int | None = None
    n_rounds: int | None = None
    groups: list[int] | None = None  # group of each draw (groupwise only)
    elapsed_ms: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if len(self.stream_ids) != len(self.identities):
            raise ValueError("one stream id per identity is required")
        if self.scheme == GROUPWISE:
            if self.n_groups is None or self.n_rounds is None:
                raise ValueError("groupwise samples record n_groups and n_rounds")
            if len(self.identities) != self.n_groups * self.n_rounds:
                raise ValueError("groupwise sample size must be n_rounds * n_groups")

    def __len__(self) -> int:
        return len(self.identities)

    @property
    def K(self) -> int:
        return len(self.identities)

    @classmethod
    def from_identities(cls, identities, seed: int = 0) -> "SampleSet":
        """Hand-picked sample, e.g. a fixed J for tests."""
        ids = list(identities)
        return cls(ids, IID, seed, [(k,) for k in range(len(ids))])

    def to_json(self, oracle=None) -> str:
        enc = oracle.encode if oracle is not None else (lambda x: x)
        return json.dumps({
            "scheme": self.scheme,
            "seed": self.seed,
            "n_groups": self.n_groups,
            "n_rounds": self.n_rounds,
            "groups": self.groups,
            "stream_ids": [list(s) for s in self.stream_ids],
            "identities": [enc(i) for i in self.identities],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, oracle=None) -> "SampleSet":
        d = json.loads(text)
        dec = oracle.decode if oracle is not None else (lambda x: x)
        return cls([dec(i) for i in d["identities"]], d["scheme"], d["seed"],
                   [tuple(s) for s in d["stream_ids"]], d["n_groups"], d["n_rounds"], d["groups"])


def _parallel_map(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sample_iid(oracle, K: int, seed: int, workers: int = 1) -> SampleSet:
    """K independent draws; draw k uses stream (seed, k)."""
    if K < 1:
        raise ValueError("K must be positive")
    t0 = time.perf_counter()
    ids = _parallel_map(lambda k: oracle.sample(stream(seed, k)), list(range(K)), workers)
    return SampleSet(ids, IID, seed, [(k,) for k in range(K)],
                     elapsed_ms=1e3 * (time.perf_counter() - t0))


def sample_groupwise(oracle, n_r: int, seed: int, workers: int = 1) -> SampleSet:
    """n_r rounds; each round visits every group once in a uniformly random order.

    The order of round r comes from stream (seed, r, "order") and the draw for
    group g in round r from stream (seed, r, g).  Rounds are independent.
    """
    if n_r < 1:
        raise ValueError("n_r must be positive")
    n_G = oracle.n_groups
    if not n_G:
        raise ValueError("oracle exposes no column groups")
    t0 = time.perf_counter()
    plan = []
    for r in range(n_r):
        order = stream(seed, r, "order").permutation(n_G)
        plan.extend((r, int(g)) for g in order)
    ids = _parallel_map(lambda rg: oracle.sample_in_group(rg[1], stream(seed, rg[0], rg[1])),
                        plan, workers)
    return SampleSet(ids, GROUPWISE, seed, plan, n_G, n_r, [g for _, g in plan],
                     elapsed_ms=1e3 * (time.perf_counter() - t0))


# ---------------------------------------------------------------- dependency graphs


@dataclass(frozen=True)
class DependencyGraph:
    K: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v or not (0 <= u < self.K and 0 <= v < self.K):
                raise ValueError("edges must join two distinct vertices")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError("duplicate edge")
            seen.add(key)


@dataclass(frozen=True)
class ForestApproximation:
    phi: tuple[int, ...]  # graph vertex -> forest vertex
    n_vertices: int
    edges: tuple[tuple[int, int], ...]


def dependency_graph_of(sample: SampleSet) -> DependencyGraph:
    """Empty for i.i.d. draws; one clique per round for groupwise draws."""
    if sample.scheme == IID:
        return DependencyGraph(len(sample), ())
    n_G = sample.n_groups
    edges = []
    for r in range(sample.n_rounds):
        base = r * n_G
        edges.extend((base + i, base + j) for i in range(n_G) for j in range(i + 1, n_G))
    return DependencyGraph(len(sample), tuple(edges))


def canonical_forest(sample: SampleSet) -> ForestApproximation:
    """Identity map for i.i.d. draws; each groupwise round collapsed to a point."""
    if sample.scheme == IID:
        return ForestApproximation(tuple(range(len(sample))), len(sample), ())
    phi = tuple(k // sample.n_groups for k in range(len(sample)))
    return ForestApproximation(phi, sample.n_rounds, ())


def _forest_components(n: int, edges) -> list[int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            raise ValueError("forest edges contain a cycle")
        parent[ru] = rv
    return [find(x) for x in range(n)]


def forest_lambda(graph: DependencyGraph, approx: ForestApproximation) -> float:
    """lambda = sum over forest edges of (|phi^-1 u| + |phi^-1 v|)^2
    plus, per tree, the smallest |phi^-1 u|^2 among its vertices."""
    if len(approx.phi) != graph.K or any(not 0 <= f < approx.n_vertices for f in approx.phi):
        raise ValueError("phi must map every graph vertex into the forest")
    fedges = {(min(u, v), max(u, v)) for u, v in approx.edges}
    if len(fedges) != len(approx.edges) or any(u == v for u, v in fedges):
        raise ValueError("forest edges must be simple")
    for u, v in graph.edges:
        a, b = approx.phi[u], approx.phi[v]
        if a != b and (min(a, b), max(a, b)) not in fedges:
            raise ValueError(f"edge ({u}, {v}) is not covered by the forest")
    comp = _forest_components(approx.n_vertices, fedges)
    size = [0] * approx.n_vertices
    for f in approx.phi:
        size[f] += 1
    lam = sum((size[u] + size[v]) ** 2 for u, v in fedges)
    tree_min: dict[int, int] = {}
    for u in range(approx.n_vertices):
        tree_min[comp[u]] = min(tree_min.get(comp[u], size[u]), size[u])
    return float(lam + sum(v * v for v in tree_min.values()))
