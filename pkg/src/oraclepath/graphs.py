"""Undirected simple graphs with array-backed storage and traversal helpers.

Vertices are the integers 0..n-1.  Edges live in a canonical numpy array
(u < v, lexicographically sorted), and adjacency structures are built
lazily so that large graphs can be created and filtered with pure numpy
before anything per-vertex is materialized.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction input (range, self-loop, format)."""


def canonical_edge(u: int, v: int) -> tuple[int, int]:
    """Return the (min, max) form of an undirected edge."""
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable undirected simple graph on vertices 0..n-1.

    Construct via :func:`build_graph`; the raw constructor trusts its
    input.  Neighbor lists are sorted ascending, so ``neighbor_at(u, i)``
    is deterministic and uniform sampling by index is O(1).
    """

    __slots__ = ("n", "_edges", "_keys", "_indptr", "_indices", "_adj")

    def __init__(self, n: int, edges: np.ndarray):
        self.n = int(n)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        e.setflags(write=False)
        self._edges = e
        self._keys = None
        self._indptr = None
        self._indices = None
        self._adj = None

    # -- basic accessors -------------------------------------------------

    @property
    def edge_count(self) -> int:
        return int(self._edges.shape[0])

    @property
    def edges_array(self) -> np.ndarray:
        """Read-only (m, 2) array of canonical edges, lexicographically sorted."""
        return self._edges

    def edges(self):
        """Iterate edges as python int tuples (u, v) with u < v."""
        for u, v in self._edges:
            yield (int(u), int(v))

    def _edge_keys(self) -> np.ndarray:
        if self._keys is None:
            k = self._edges[:, 0] * self.n + self._edges[:, 1]
            k.setflags(write=False)
            self._keys = k
        return self._keys

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        lo, hi = (u, v) if u < v else (v, u)
        keys = self._edge_keys()
        i = int(np.searchsorted(keys, lo * self.n + hi))
        return i < keys.shape[0] and int(keys[i]) == lo * self.n + hi

    # -- adjacency (lazy CSR) --------------------------------------------

    def _csr(self) -> tuple[np.ndarray, np.ndarray]:
        if self._indptr is None:
            e = self._edges
            src = np.concatenate([e[:, 0], e[:, 1]])
            dst = np.concatenate([e[:, 1], e[:, 0]])
            order = np.lexsort((dst, src))
            indices = dst[order]
            counts = np.bincount(src, minlength=self.n)
            indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
            indices.setflags(write=False)
            indptr.setflags(write=False)
            self._indptr, self._indices = indptr, indices
        return self._indptr, self._indices

    def degree(self, u: int) -> int:
        indptr, _ = self._csr()
        return int(indptr[u + 1] - indptr[u])

    def degrees(self) -> np.ndarray:
        indptr, _ = self._csr()
        return np.diff(indptr)

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor array of u.  Treat as read-only."""
        indptr, indices = self._csr()
        return indices[indptr[u]:indptr[u + 1]]

    def neighbor_at(self, u: int, i: int) -> int:
        indptr, indices = self._csr()
        return int(indices[indptr[u] + i])

    @property
    def adjacency(self) -> list[list[int]]:
        """Per-vertex sorted neighbor lists (materialized once)."""
        if self._adj is None:
            indptr, indices = self._csr()
            self._adj = [indices[indptr[u]:indptr[u + 1]].tolist() for u in range(self.n)]
        return self._adj

    # -- misc -------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._edges, other._edges)

    def __hash__(self):
        return hash((self.n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


class CompleteGraph:
    """K_n with implicit adjacency, for worlds too large to materialize.

    Implements the read interface of :class:`Graph` that oracle sessions
    and validators rely on.  ``edges_array`` materializes all pairs and is
    only intended for small n.
    """

    __slots__ = ("n",)

    def __init__(self, n: int):
        if n < 1:
            raise GraphError("complete graph needs n >= 1")
        self.n = int(n)

    @property
    def edge_count(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def edges_array(self) -> np.ndarray:
        iu, iv = np.triu_indices(self.n, k=1)
        return np.column_stack((iu, iv)).astype(np.int64)

    def edges(self):
        for u in range(self.n):
            for v in range(u + 1, self.n):
                yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and 0 <= u < self.n and 0 <= v < self.n

    def degree(self, u: int) -> int:
        return self.n - 1

    def neighbors(self, u: int) -> np.ndarray:
        out = np.arange(self.n, dtype=np.int64)
        return np.delete(out, u)

    def neighbor_at(self, u: int, i: int) -> int:
        return i if i < u else i + 1

    def __repr__(self) -> str:
        return f"CompleteGraph(n={self.n})"


def build_graph(n: int, edges) -> Graph:
    """Validated graph constructor.

    Endpoints must lie in [0, n); self-loops are rejected; duplicate pairs
    (in either orientation) collapse to a single edge.
    """
    if n < 0:
        raise GraphError("vertex count must be nonnegative")
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        return Graph(n, np.empty((0, 2), dtype=np.int64))
    arr = arr.reshape(-1, 2)
    if arr.min() < 0 or arr.max() >= n:
        raise GraphError(f"edge endpoint out of range [0, {n})")
    if (arr[:, 0] == arr[:, 1]).any():
        raise GraphError("self-loops are not allowed")
    lo = arr.min(axis=1)
    hi = arr.max(axis=1)
    keys = np.unique(lo * n + hi)
    canon = np.column_stack((keys // n, keys % n))
    return Graph(n, canon)


@dataclass
class ComponentLabeling:
    """Connected-component labels; each label is the smallest member vertex."""

    n: int
    labels: np.ndarray
    sizes: dict[int, int]

    def component_of(self, u: int) -> int:
        return int(self.labels[u])

    def same_component(self, u: int, v: int) -> bool:
        return self.labels[u] == self.labels[v]

    def component_ids(self) -> list[int]:
        return sorted(self.sizes)

    def largest_component(self) -> int:
        """Id of a maximum-size component (smallest id on ties)."""
        best = min(self.sizes, key=lambda c: (-self.sizes[c], c))
        return best

    def members(self, comp_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == comp_id)


def connected_components(g) -> ComponentLabeling:
    """Label vertices by connected component, deterministically.

    Labels are remapped so that each component's label equals its smallest
    contained vertex id, making output independent of traversal order.
    """
    n = g.n
    if n == 0:
        return ComponentLabeling(0, np.empty(0, dtype=np.int64), {})
    if isinstance(g, CompleteGraph):
        labels = np.zeros(n, dtype=np.int64)
        return ComponentLabeling(n, labels, {0: n})
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components as _cc

    e = g.edges_array
    if e.shape[0] == 0:
        labels = np.arange(n, dtype=np.int64)
        return ComponentLabeling(n, labels, {i: 1 for i in range(n)})
    data = np.ones(e.shape[0], dtype=np.int8)
    mat = coo_matrix((data, (e[:, 0], e[:, 1])), shape=(n, n))
    ncomp, raw = _cc(mat, directed=False)
    smallest = np.full(ncomp, n, dtype=np.int64)
    np.minimum.at(smallest, raw, np.arange(n, dtype=np.int64))
    labels = smallest[raw]
    labels.setflags(write=False)
    counts = np.bincount(raw, minlength=ncomp)
    sizes = {int(smallest[c]): int(counts[c]) for c in range(ncomp)}
    return ComponentLabeling(n, labels, sizes)


def _gather_frontier(indptr: np.ndarray, indices: np.ndarray,
                     frontier: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All (neighbor, source) pairs for a frontier, CSR-gathered."""
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    ends = np.cumsum(counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
    flat = np.repeat(starts, counts) + offsets
    return indices[flat], np.repeat(frontier, counts)


def bfs_path(g, s: int, t: int) -> list[int] | None:
    """Shortest s-t path in g, or None if s and t are disconnected.

    Returns [s] when s == t.  For :class:`Graph` the search is a
    level-synchronized frontier BFS over the CSR arrays.
    """
    n = g.n
    if not (0 <= s < n and 0 <= t < n):
        raise GraphError("bfs_path endpoints out of range")
    if s == t:
        return [s]
    if isinstance(g, CompleteGraph):
        return [s, t]
    indptr, indices = g._csr()
    parent = np.full(n, -1, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    visited[s] = True
    frontier = np.array([s], dtype=np.int64)
    while frontier.size:
        nbrs, srcs = _gather_frontier(indptr, indices, frontier)
        fresh = ~visited[nbrs]
        nbrs, srcs = nbrs[fresh], srcs[fresh]
        if nbrs.size == 0:
            return None
        # duplicate targets within a level: any parent is a valid shortest-path parent
        parent[nbrs] = srcs
        visited[nbrs] = True
        if visited[t]:
            break
        frontier = np.unique(nbrs)
    if not visited[t]:
        return None
    path = [t]
    while path[-1] != s:
        path.append(int(parent[path[-1]]))
    path.reverse()
    return path


def is_simple_path(g, vertices: list[int]) -> bool:
    """True iff vertices form a simple path whose steps are edges of g."""
    if len(vertices) == 0:
        return False
    if len(set(vertices)) != len(vertices):
        return False
    if any(not (0 <= v < g.n) for v in vertices):
        return False
    return all(g.has_edge(a, b) for a, b in zip(vertices, vertices[1:]))


# -- internal K-connectivity --------------------------------------------

_EXHAUSTIVE_K_LIMIT = 4


def _connected_after_removal(adj: dict[int, set[int]], s: int, t: int,
                             removed: frozenset) -> bool:
    if s == t:
        return True
    if s not in adj or t not in adj:
        return False
    seen = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v in seen:
                continue
            e = (u, v) if u < v else (v, u)
            if e in removed:
                continue
            if v == t:
                return True
            seen.add(v)
            q.append(v)
    return False


def _max_flow_at_least(edge_caps: dict[tuple[int, int], int], s: int, t: int,
                       target: int) -> bool:
    """Edmonds-Karp on an undirected capacity map, stopping at target flow."""
    cap: dict[int, dict[int, int]] = {}
    for (u, v), c in edge_caps.items():
        cap.setdefault(u, {})[v] = cap.setdefault(u, {}).get(v, 0) + c
        cap.setdefault(v, {})[u] = cap.setdefault(v, {}).get(u, 0) + c
    if s not in cap or t not in cap:
        return target <= 0
    flow = 0
    while flow < target:
        parent = {s: None}
        q = deque([s])
        while q and t not in parent:
            u = q.popleft()
            for v, c in cap[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    q.append(v)
        if t not in parent:
            return False
        bottleneck = target - flow
        v = t
        while parent[v] is not None:
            u = parent[v]
            bottleneck = min(bottleneck, cap[u][v])
            v = u
        v = t
        while parent[v] is not None:
            u = parent[v]
            cap[u][v] -= bottleneck
            cap[v][u] += bottleneck
            v = u
        flow += bottleneck
    return True


def internally_k_connected(subgraph_edges, prior, s: int, t: int, K: int) -> bool:
    """Does every removal of fewer than K prior-owned edges leave s-t connected?

    Removals are drawn from the subgraph's edges that also belong to the
    prior graph.  K <= 4 is decided by exhaustive removal enumeration;
    larger K by a min-cut in which prior-owned edges have unit capacity
    and the remaining subgraph edges are uncuttable.
    """
    if K < 1:
        raise GraphError("K must be >= 1")
    if s == t:
        return True
    edges = {canonical_edge(int(u), int(v)) for u, v in subgraph_edges}
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    if not _connected_after_removal(adj, s, t, frozenset()):
        return False
    if K == 1:
        return True
    prior_owned = sorted(e for e in edges if prior.has_edge(*e))
    if K <= _EXHAUSTIVE_K_LIMIT:
        r = min(K - 1, len(prior_owned))
        # removal sets are monotone: checking the largest size covers the rest
        for combo in itertools.combinations(prior_owned, r):
            if not _connected_after_removal(adj, s, t, frozenset(combo)):
                return False
        return True
    caps = {e: (1 if e in set(prior_owned) else K) for e in edges}
    return _max_flow_at_least(caps, s, t, K)


# -- edge-list text format -----------------------------------------------


def write_edge_list(g, path) -> None:
    """Write the "n m" header followed by one "u v" line per edge."""
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.edge_count}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> Graph:
    """Parse the edge-list text format, rejecting malformed input."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise GraphError("edge list header must be 'n m'")
        try:
            n, m = int(header[0]), int(header[1])
        except ValueError as exc:
            raise GraphError("edge list header must contain two integers") from exc
        pairs = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise GraphError(f"line {lineno}: expected 'u v'")
            u, v = int(parts[0]), int(parts[1])
            if u == v:
                raise GraphError(f"line {lineno}: self-loop {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"line {lineno}: endpoint out of range [0, {n})")
            pairs.append((u, v))
    if len(pairs) != m:
        raise GraphError(f"header declared {m} edges but file has {len(pairs)}")
    return build_graph(n, pairs)
