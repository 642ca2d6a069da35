"""Weighted hypergraph model for k-local spin problems.

A hypergraph instance holds ``n`` vertices plus weighted hyperedges; each
hyperedge of locality ``k`` stands for one signed parity constraint over
``k`` spins (Max-k-XORSAT).  This module owns the data model, the random
instance generator (independent per-candidate inclusion at each locality,
retried until connected), Berge-cycle detection, and the degree statistics
consumed by the angle-transfer rules.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Mapping

import numpy as np


class GenerationError(RuntimeError):
    """Raised when no connected instance is found within the retry budget."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class Hyperedge:
    """A strictly increasing vertex tuple with a nonzero real weight."""

    nodes: tuple[int, ...]
    weight: float = 1.0

    def __post_init__(self):
        nodes = tuple(int(v) for v in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weight", float(self.weight))
        if not nodes:
            raise ValueError("hyperedge must contain at least one vertex")
        if nodes[0] < 0:
            raise ValueError(f"negative vertex index in {nodes}")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise ValueError(f"vertices must be strictly increasing, got {nodes}")
        if self.weight == 0.0:
            raise ValueError("hyperedge weight must be nonzero")

    @property
    def locality(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Hypergraph:
    """``n`` vertices plus a duplicate-free tuple of weighted hyperedges.

    Immutable after construction; all derived statistics are cached.
    """

    n: int
    edges: tuple[Hyperedge, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.n < 1:
            raise ValueError("vertex count must be positive")
        seen: set[tuple[int, ...]] = set()
        for e in self.edges:
            if not isinstance(e, Hyperedge):
                raise TypeError(f"expected Hyperedge, got {type(e).__name__}")
            if e.nodes[-1] >= self.n:
                raise ValueError(f"edge {e.nodes} references vertex >= n={self.n}")
            if e.nodes in seen:
                raise ValueError(f"duplicate edge {e.nodes}")
            seen.add(e.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def locality_counts(self) -> dict[int, int]:
        """m_k: number of edges at each locality k (missing k means zero)."""
        counts: dict[int, int] = {}
        for e in self.edges:
            counts[e.locality] = counts.get(e.locality, 0) + 1
        return counts

    def locality_count(self, k: int) -> int:
        return self.locality_counts.get(k, 0)


@dataclass(frozen=True)
class GenerationSpec:
    """Recipe for one random instance.

    ``probs`` maps locality k to the independent inclusion probability of
    each of the C(n, k) candidate hyperedges at that locality.  The same
    spec (seed included) always yields the same hypergraph.
    """

    n: int
    probs: Mapping[int, float]
    seed: int
    max_retries: int = 10_000

    def __post_init__(self):
        probs = {int(k): float(p) for k, p in dict(self.probs).items()}
        object.__setattr__(self, "probs", probs)
        if self.n < 1:
            raise ValueError("vertex count must be positive")
        if self.max_retries < 1:
            raise ValueError("max_retries must be positive")
        for k, p in probs.items():
            if k < 1:
                raise ValueError(f"locality {k} is invalid")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} for locality {k} outside [0, 1]")
        if not any(p > 0 for k, p in probs.items() if k >= 2):
            raise ValueError("at least one locality k >= 2 needs a nonzero probability")


def rescale_probability(base_p: float, k: int, n: int) -> float:
    """Rescale a locality-2 inclusion probability to locality ``k``.

    Returns ``min(1, base_p * C(n,2)/C(n,k))`` so that the expected number
    of hyperedges at locality k matches the expectation at locality 2.
    The clamp covers k=1, where the ratio exceeds one for useful n.
    """
    if k < 1:
        raise ValueError(f"locality {k} is invalid")
    if k > n:
        raise ValueError(f"locality {k} exceeds vertex count {n}")
    if not 0.0 <= base_p <= 1.0:
        raise ValueError(f"base probability {base_p} outside [0, 1]")
    ratio = math.comb(n, 2) / math.comb(n, k)
    return min(1.0, base_p * ratio)


def generate_random(spec: GenerationSpec) -> Hypergraph:
    """Generate a connected random hypergraph from ``spec``.

    Every candidate vertex set at each specified locality is included
    independently with that locality's probability; weights are uniform
    over {+1, -1}.  Generation repeats with fresh draws until the result
    is connected, up to ``spec.max_retries`` attempts.
    """
    rng = np.random.default_rng(spec.seed)
    localities = sorted(k for k, p in spec.probs.items() if p > 0 and k <= spec.n)
    candidates = {k: list(combinations(range(spec.n), k)) for k in localities}
    for _ in range(spec.max_retries):
        edges = []
        for k in localities:
            p = spec.probs[k]
            include = rng.random(len(candidates[k])) < p
            signs = rng.random(len(candidates[k])) < 0.5
            for nodes, inc, neg in zip(candidates[k], include, signs):
                if inc:
                    edges.append(Hyperedge(nodes, -1.0 if neg else 1.0))
        h = Hypergraph(spec.n, tuple(edges))
        if is_connected(h):
            return h
    raise GenerationError(
        f"no connected hypergraph after {spec.max_retries} attempts "
        f"(n={spec.n}, probs={spec.probs})",
        attempts=spec.max_retries,
    )


def is_connected(h: Hypergraph) -> bool:
    """True iff the vertex-edge incidence structure forms a single component.

    A vertex incident to no edge counts as isolated, so any such vertex
    makes the hypergraph disconnected (including the single-vertex,
    zero-edge case).
    """
    incident: list[list[int]] = [[] for _ in range(h.n)]
    for i, e in enumerate(h.edges):
        for v in e.nodes:
            incident[v].append(i)
    if any(not lst for lst in incident):
        return False
    seen_v = {0}
    seen_e: set[int] = set()
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for i in incident[v]:
            if i in seen_e:
                continue
            seen_e.add(i)
            for u in h.edges[i].nodes:
                if u not in seen_v:
                    seen_v.add(u)
                    queue.append(u)
    return len(seen_v) == h.n


def has_short_berge_cycle(h: Hypergraph, max_len: int = 3) -> bool:
    """Detect Berge cycles of length 2 (and 3 when ``max_len`` is 3).

    Length 2: two distinct edges sharing at least two vertices.  Length 3:
    distinct vertices v1, v2, v3 and distinct edges e1, e2, e3 with
    {v1,v2} in e1, {v2,v3} in e2, {v3,v1} in e3.  Exhaustive enumeration
    over edge pairs/triples; quadratic-to-cubic in the edge count, which
    is fine at the intended instance sizes but does not scale.
    """
    if max_len not in (2, 3):
        raise ValueError(f"max_len must be 2 or 3, got {max_len}")
    sets = [frozenset(e.nodes) for e in h.edges]
    for a, b in combinations(range(len(sets)), 2):
        if len(sets[a] & sets[b]) >= 2:
            return True
    if max_len == 2:
        return False
    for a, b, c in combinations(range(len(sets)), 3):
        ab = sets[a] & sets[b]
        bc = sets[b] & sets[c]
        ca = sets[c] & sets[a]
        if not (ab and bc and ca):
            continue
        for v1 in ab:
            for v2 in bc:
                if v2 == v1:
                    continue
                for v3 in ca:
                    if v3 != v1 and v3 != v2:
                        return True
    return False


def average_degree(h: Hypergraph) -> float:
    """Mean number of hyperedge memberships per vertex: sum_k k*m_k / n."""
    return sum(e.locality for e in h.edges) / h.n


def neighborhood(h: Hypergraph, alpha: int) -> tuple[set[int], dict[int, list[int]]]:
    """Neighborhood structure of edge ``alpha``.

    Returns ``(nodes, by_vertex)`` where ``nodes`` is the set of vertices
    sharing some hyperedge with edge alpha's vertices (alpha's own
    vertices excluded) and ``by_vertex[j]`` lists the indices of edges
    containing vertex j, excluding edge alpha itself.
    """
    if not 0 <= alpha < len(h.edges):
        raise IndexError(f"edge index {alpha} out of range")
    q = set(h.edges[alpha].nodes)
    nodes: set[int] = set()
    by_vertex: dict[int, list[int]] = {j: [] for j in h.edges[alpha].nodes}
    for i, e in enumerate(h.edges):
        if i == alpha:
            continue
        overlap = q.intersection(e.nodes)
        if overlap:
            nodes.update(set(e.nodes) - q)
            for j in overlap:
                by_vertex[j].append(i)
    return nodes, by_vertex


def regular_graph(n: int, degree: int, seed: int) -> Hypergraph:
    """A random ``degree``-regular graph as a locality-2 hypergraph, unit weights."""
    import networkx as nx

    g = nx.random_regular_graph(degree, n, seed=seed)
    edges = tuple(
        Hyperedge(tuple(sorted((u, v))), 1.0) for u, v in sorted(map(sorted, g.edges()))
    )
    return Hypergraph(n, edges)


def to_text(h: Hypergraph) -> str:
    """Serialize to the line format ``n <int>`` then ``w <weight> : <v1> <v2> ...``.

    Weights are written with ``repr`` so the round-trip is bit-exact.
    """
    lines = [f"n {h.n}"]
    for e in h.edges:
        lines.append(f"w {e.weight!r} : " + " ".join(str(v) for v in e.nodes))
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Hypergraph:
    """Parse the serialization produced by :func:`to_text`."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n "):
        raise ValueError("expected header line 'n <int>'")
    n = int(lines[0].split()[1])
    edges = []
    for ln in lines[1:]:
        if not ln.startswith("w "):
            raise ValueError(f"expected edge line 'w <weight> : ...', got {ln!r}")
        head, _, tail = ln.partition(":")
        weight = float(head.split()[1])
        nodes = tuple(int(tok) for tok in tail.split())
        edges.append(Hyperedge(nodes, weight))
    return Hypergraph(n, tuple(edges))


def save(h: Hypergraph, path) -> None:
    with open(path, "w") as f:
        f.write(to_text(h))


def load(path) -> Hypergraph:
    with open(path) as f:
        return from_text(f.read())
