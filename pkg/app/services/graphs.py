"""Graphs, local complementation and exact treewidth."""
import logging
import warnings
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from app.services.errors import OrbitTruncated, TooLarge, ValidationError, VertexOutOfRange

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
LcSequence = Tuple[int, ...]

TREEWIDTH_MAX_VERTICES = 16


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph over vertices 0..n-1.

    Edges are stored as normalized (min, max) pairs, so two graphs compare
    equal exactly when their labeled edge sets match.
    """
    n: int
    edges: FrozenSet[Edge]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> 'Graph':
        if n < 1:
            raise ValidationError(f"Graph needs at least one vertex, got n={n}")
        normalized = set()
        for edge in edges:
            i, j = int(edge[0]), int(edge[1])
            if i == j:
                raise ValidationError(f"Self-loop on vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise VertexOutOfRange(f"Edge ({i}, {j}) outside 0..{n - 1}")
            normalized.add((min(i, j), max(i, j)))
        return cls(n=n, edges=frozenset(normalized))

    @classmethod
    def path(cls, n: int) -> 'Graph':
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def star(cls, n: int, center: int = 0) -> 'Graph':
        return cls.from_edges(n, [(center, v) for v in range(n) if v != center])

    @classmethod
    def complete(cls, n: int) -> 'Graph':
        return cls.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    @classmethod
    def cycle(cls, n: int) -> 'Graph':
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    def edge_list(self) -> List[Edge]:
        """Edges in lexicographic (min, max) order."""
        return sorted(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def neighbors(self, v: int) -> List[int]:
        self._check_vertex(v)
        return sorted(j if i == v else i for i, j in self.edges if v in (i, j))

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges)
        return graph

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def is_star(self) -> bool:
        if self.n < 2 or len(self.edges) != self.n - 1:
            return False
        return any(self.degree(v) == self.n - 1 for v in range(self.n))

    def is_complete(self) -> bool:
        return len(self.edges) == self.n * (self.n - 1) // 2

    def to_dict(self) -> dict:
        return {'n': self.n, 'edges': [list(e) for e in self.edge_list()]}

    def _check_vertex(self, v: int):
        if not 0 <= v < self.n:
            raise VertexOutOfRange(f"Vertex {v} outside 0..{self.n - 1}")

    def __repr__(self):
        return f'<Graph n={self.n} edges={self.edge_list()}>'


def local_complement(g: Graph, v: int) -> Graph:
    """Toggle every edge between distinct pairs of neighbors of v."""
    g._check_vertex(v)
    hood = g.neighbors(v)
    toggled = set(g.edges)
    for a_idx, a in enumerate(hood):
        for b in hood[a_idx + 1:]:
            toggled ^= {(a, b)}
    return Graph(n=g.n, edges=frozenset(toggled))


def apply_lc_sequence(g: Graph, seq: Sequence[int]) -> Graph:
    for v in seq:
        g = local_complement(g, v)
    return g


def lc_history(g: Graph, seq: Sequence[int]) -> List[Graph]:
    """Graphs seen while applying seq: the input, then one entry per LC step."""
    history = [g]
    for v in seq:
        history.append(local_complement(history[-1], v))
    return history


def consolidate(raw: Iterable[int]) -> LcSequence:
    """Collapse runs of equal consecutive entries, so [a, a] becomes [a]."""
    out: List[int] = []
    for v in raw:
        if not out or out[-1] != v:
            out.append(int(v))
    return tuple(out)


def sample_lc_sequences(n: int, count: int, seed: Union[int, Sequence[int], np.random.SeedSequence]) -> List[LcSequence]:
    """Draw count random LC sequences over n vertices.

    Raw lengths are uniform on {1, ..., 2n}, entries uniform on {0, ..., n-1},
    sampled with replacement; consecutive duplicates are consolidated.
    """
    if n < 2:
        raise ValidationError(f"LC sampling needs n >= 2, got {n}")
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")

    rng = np.random.default_rng(seed)
    sequences = []
    for _ in range(count):
        length = int(rng.integers(1, 2 * n + 1))
        raw = rng.integers(0, n, size=length)
        sequences.append(consolidate(raw.tolist()))
    return sequences


@dataclass(frozen=True)
class Orbit:
    graphs: FrozenSet[Graph]
    truncated: bool

    def __len__(self):
        return len(self.graphs)

    def __contains__(self, g):
        return g in self.graphs


def enumerate_orbit(g: Graph, limit: int = 10000) -> Orbit:
    """Breadth-first closure of g under LC, deduplicated by labeled edge set."""
    if limit < 1:
        raise ValidationError(f"limit must be >= 1, got {limit}")

    seen = {g}
    queue = deque([g])
    truncated = False
    while queue and not truncated:
        current = queue.popleft()
        for v in range(current.n):
            nxt = local_complement(current, v)
            if nxt in seen:
                continue
            if len(seen) >= limit:
                truncated = True
                break
            seen.add(nxt)
            queue.append(nxt)

    if truncated:
        logger.warning(f"Orbit enumeration truncated at {limit} graphs (n={g.n})")
        warnings.warn(f"orbit truncated at {limit} graphs", OrbitTruncated, stacklevel=2)
    return Orbit(graphs=frozenset(seen), truncated=truncated)


def _reach_outside(adj: List[int], inner: int, v: int) -> int:
    """Vertices outside inner|{v} reachable from v through paths inside inner."""
    visited = 1 << v
    stack = [v]
    found = 0
    while stack:
        u = stack.pop()
        frontier = adj[u] & ~visited
        visited |= frontier
        found |= frontier & ~inner
        step = frontier & inner
        while step:
            low = step & -step
            stack.append(low.bit_length() - 1)
            step ^= low
    return found & ~(1 << v)


@lru_cache(maxsize=4096)
def treewidth(g: Graph) -> int:
    """Exact treewidth by dynamic programming over vertex subsets.

    TW(S) is the best width achievable when the vertices of S are eliminated
    first; TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|) where
    Q(S, v) counts the vertices outside S reachable from v through S.
    """
    if g.n > TREEWIDTH_MAX_VERTICES:
        raise TooLarge(f"Exact treewidth limited to n <= {TREEWIDTH_MAX_VERTICES}, got {g.n}")
    if g.n == 1:
        return 0

    adj = [0] * g.n
    for i, j in g.edges:
        adj[i] |= 1 << j
        adj[j] |= 1 << i

    full = (1 << g.n) - 1
    best = {0: -1}
    # masks grouped by popcount so every subset is solved before its supersets
    for _ in range(g.n):
        layer = {}
        for prev, prev_width in best.items():
            free = full & ~prev
            while free:
                low = free & -free
                v = low.bit_length() - 1
                free ^= low
                mask = prev | low
                q = bin(_reach_outside(adj, prev, v)).count('1')
                width = max(prev_width, q)
                if mask not in layer or width < layer[mask]:
                    layer[mask] = width
        best = layer
    return max(best[full], 0)


def max_treewidth(graphs: Iterable[Graph]) -> Optional[int]:
    widths = [treewidth(g) for g in graphs]
    return max(widths) if widths else None
