"""Graphs, the exact clique oracle, planted cliques and sign-vector encoding.

Vertices are 1-based everywhere in this module, matching DIMACS.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised when a graph file cannot be parsed or violates the graph invariants."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``1..m``.

    ``edges`` holds normalized pairs ``(i, j)`` with ``i < j``.
    """

    m: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise GraphFormatError(f"vertex count must be a positive integer, got {self.m!r}")
        normalized = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise GraphFormatError(f"self-loop on vertex {i}")
            if i > j:
                i, j = j, i
            if i < 1 or j > self.m:
                raise GraphFormatError(f"edge ({i}, {j}) outside vertex range 1..{self.m}")
            normalized.add((i, j))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "edges", frozenset(normalized))
        nbrs = [set() for _ in range(self.m + 1)]
        for i, j in normalized:
            nbrs[i].add(j)
            nbrs[j].add(i)
        object.__setattr__(self, "_nbrs", tuple(frozenset(s) for s in nbrs))

    @classmethod
    def complete(cls, m: int) -> "Graph":
        return cls(m, frozenset(combinations(range(1, m + 1), 2)))

    @classmethod
    def path(cls, m: int) -> "Graph":
        return cls(m, frozenset((i, i + 1) for i in range(1, m)))

    @classmethod
    def petersen(cls) -> "Graph":
        outer = [(i, i % 5 + 1) for i in range(1, 6)]
        spokes = [(i, i + 5) for i in range(1, 6)]
        inner = [(6 + i, 6 + (i + 2) % 5) for i in range(5)]
        return cls(10, frozenset(outer + spokes + inner))

    def adjacent(self, i: int, j: int) -> bool:
        return j in self._nbrs[i]

    def neighbors(self, i: int) -> frozenset:
        return self._nbrs[i]

    def degree(self, i: int) -> int:
        return len(self._nbrs[i])

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.m, self.m), dtype=np.int64)
        for i, j in self.edges:
            A[i - 1, j - 1] = A[j - 1, i - 1] = 1
        return A

    def sorted_edges(self) -> list:
        return sorted(self.edges)

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = sorted(set(vertices))
        if any(v < 1 or v > self.m for v in vs):
            return False
        return all(self.adjacent(a, b) for a, b in combinations(vs, 2))

    def to_json_obj(self) -> dict:
        return {"m": self.m, "edges": [list(e) for e in self.sorted_edges()]}

    def to_dimacs(self) -> str:
        lines = [f"p edge {self.m} {len(self.edges)}"]
        lines += [f"e {i} {j}" for i, j in self.sorted_edges()]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CliqueInstance:
    graph: Graph
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= self.graph.m:
            raise ValueError(f"k must satisfy 1 <= k <= m={self.graph.m}, got {self.k}")

    @property
    def m(self) -> int:
        return self.graph.m


def _parse_dimacs(text: str) -> Graph:
    m = None
    declared_edges = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if m is not None:
                raise GraphFormatError(f"line {lineno}: duplicate header")
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}")
            try:
                m, declared_edges = int(parts[2]), int(parts[3])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}") from None
            if m < 1 or declared_edges < 0:
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}")
        elif parts[0] == "e":
            if m is None:
                raise GraphFormatError(f"line {lineno}: edge before 'p edge' header")
            if len(parts) != 3:
                raise GraphFormatError(f"line {lineno}: malformed edge line {line!r}")
            try:
                i, j = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed edge line {line!r}") from None
            if i == j:
                raise GraphFormatError(f"line {lineno}: self-loop on vertex {i}")
            if min(i, j) < 1 or max(i, j) > m:
                raise GraphFormatError(f"line {lineno}: vertex index outside 1..{m}")
            edges.append((i, j))
        else:
            raise GraphFormatError(f"line {lineno}: unrecognized line {line!r}")
    if m is None:
        raise GraphFormatError("missing 'p edge m |E|' header")
    # duplicates collapse silently; the header edge count is informational
    return Graph(m, frozenset(edges))


def _parse_json(text: str) -> Graph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or "m" not in obj or "edges" not in obj:
        raise GraphFormatError('JSON graph must be an object with "m" and "edges"')
    m = obj["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise GraphFormatError(f"invalid vertex count {m!r}")
    edges = []
    for e in obj["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise GraphFormatError(f"malformed edge {e!r}")
        i, j = e
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (i, j)):
            raise GraphFormatError(f"malformed edge {e!r}")
        edges.append((i, j))
    return Graph(m, frozenset(edges))


def parse_graph(text: str, format: str = "dimacs") -> Graph:
    """Parse a DIMACS edge list or a ``{"m", "edges"}`` JSON document."""
    if format == "dimacs":
        return _parse_dimacs(text)
    if format == "json":
        return _parse_json(text)
    raise ValueError(f"unknown graph format {format!r}")


def load_graph(path: str, format: str | None = None) -> Graph:
    if format is None:
        format = "json" if str(path).endswith(".json") else "dimacs"
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read(), format)


def _extend(graph: Graph, clique: list, candidates: list, k: int) -> list | None:
    if len(clique) == k:
        return clique
    for idx, v in enumerate(candidates):
        if len(clique) + len(candidates) - idx < k:
            return None
        nbrs = graph.neighbors(v)
        rest = [u for u in candidates[idx + 1:] if u in nbrs]
        found = _extend(graph, clique + [v], rest, k)
        if found is not None:
            return found
    return None


def has_k_clique(instance: CliqueInstance) -> frozenset | None:
    """Return the lexicographically smallest k-clique, or ``None``.

    Depth-first search over increasing vertex sequences, so the first
    clique found is the lexicographically smallest one. Vertices of degree
    below ``k - 1`` are discarded up front.
    """
    g, k = instance.graph, instance.k
    candidates = [v for v in range(1, g.m + 1) if g.degree(v) >= k - 1]
    found = _extend(g, [], candidates, k)
    return None if found is None else frozenset(found)


def iter_k_cliques(graph: Graph, k: int) -> Iterator[tuple]:
    """All k-cliques in lexicographic order, by plain enumeration."""
    for combo in combinations(range(1, graph.m + 1), k):
        if graph.is_clique(combo):
            yield combo


def random_graph(m: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(m, p) with pairs visited in lexicographic order."""
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(1, m + 1), 2))
    keep = rng.random(len(pairs)) < p
    return Graph(m, frozenset(e for e, kept in zip(pairs, keep) if kept))


def planted_clique(m: int, k: int, seed: int) -> tuple[Graph, frozenset]:
    """Sample G(m, 1/2) and add every edge inside a uniform random k-subset."""
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got m={m}, k={k}")
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(1, m + 1), 2))
    keep = rng.random(len(pairs)) < 0.5
    planted = frozenset(int(v) + 1 for v in rng.choice(m, size=k, replace=False))
    edges = {e for e, kept in zip(pairs, keep) if kept}
    edges.update(combinations(sorted(planted), 2))
    return Graph(m, frozenset(edges)), planted


def sign_decode(point: Sequence, m: int) -> tuple:
    """Componentwise sign of the first ``m`` coordinates, with sgn(0) = +1."""
    if len(point) < m:
        raise ValueError(f"point has {len(point)} coordinates, need at least {m}")
    return tuple(1 if point[i] >= 0 else -1 for i in range(m))


def sign_to_support(signs: Sequence[int]) -> frozenset:
    for s in signs:
        if s not in (1, -1):
            raise ValueError(f"sign vector entries must be +1 or -1, got {s!r}")
    return frozenset(i + 1 for i, s in enumerate(signs) if s == 1)


def indicator_to_sign(vertices: Iterable[int], m: int) -> tuple:
    vs = set(vertices)
    if any(v < 1 or v > m for v in vs):
        raise ValueError(f"vertex set {sorted(vs)} not within 1..{m}")
    return tuple(1 if i in vs else -1 for i in range(1, m + 1))
