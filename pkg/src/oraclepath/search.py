"""Search procedures that find paths and robust subgraphs through oracle calls.

All procedures are grounded: they output only prior edges and edges an
oracle call returned or confirmed in the same session.  Each returns a
:class:`SearchOutcome` whose provenance map tags every output edge, so a
run can be audited against the session trace afterwards.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graphs import (
    Graph,
    GraphError,
    bfs_path,
    canonical_edge,
    connected_components,
    internally_k_connected,
)
from .oracles import OracleSession, SessionStats
from .worlds import color_edges

FOUND = "found"
NO = "no"
BUDGET_EXHAUSTED = "budget_exhausted"

PRIOR = "prior"
RETRIEVED = "retrieved"
VERIFIED = "verified"


@dataclass
class SearchOutcome:
    """Result of one algorithm run: an answer plus its query bill.

    Exactly one of ``path`` and ``edges`` is set for FOUND outcomes
    (paths for path finders, edge sets for tree/subgraph builders).
    """

    status: str
    path: list[int] | None = None
    edges: set[tuple[int, int]] | None = None
    provenance: dict[tuple[int, int], str] = field(default_factory=dict)
    queries: SessionStats | None = None
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        q = self.queries
        return {
            "status": self.status,
            "path": None if self.path is None else [int(v) for v in self.path],
            "edges": None if self.edges is None else sorted([list(map(int, e)) for e in self.edges]),
            "provenance": {f"{u}-{v}": tag for (u, v), tag in sorted(self.provenance.items())},
            "queries": {
                "retrieval": q.retrieval_queries if q else 0,
                "cci": q.cci_queries if q else 0,
                "verify": q.verify_queries if q else 0,
            },
            "meta": {k: v for k, v in self.meta.items() if not k.startswith("_")},
        }


@dataclass
class RobustSubgraph:
    """K color-disjoint prior routes between two endpoints."""

    edges: set[tuple[int, int]]
    route_color: dict[tuple[int, int], int]
    K: int


def _tag_path(path: list[int], prior) -> dict[tuple[int, int], str]:
    prov = {}
    for a, b in zip(path, path[1:]):
        e = canonical_edge(a, b)
        prov[e] = PRIOR if prior.has_edge(a, b) else RETRIEVED
    return prov


def _augmented_bfs(prior: Graph, extra: dict[int, set[int]], s: int, t: int) -> list[int] | None:
    """Shortest s-t path over prior edges plus a small retrieved-edge overlay."""
    if s == t:
        return [s]
    n = prior.n
    indptr, indices = prior._csr()
    parent = np.full(n, -1, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    visited[s] = True
    frontier = [s]
    while frontier:
        nxt: list[int] = []
        farr = np.asarray(frontier, dtype=np.int64)
        starts = indptr[farr]
        counts = indptr[farr + 1] - starts
        total = int(counts.sum())
        if total:
            ends = np.cumsum(counts)
            offs = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
            nbrs = indices[np.repeat(starts, counts) + offs]
            srcs = np.repeat(farr, counts)
            fresh = ~visited[nbrs]
            nbrs, srcs = nbrs[fresh], srcs[fresh]
            parent[nbrs] = srcs
            visited[nbrs] = True
            nxt.extend(np.unique(nbrs).tolist())
        for u in frontier:
            for v in extra.get(u, ()):
                if not visited[v]:
                    visited[v] = True
                    parent[v] = u
                    nxt.append(v)
        if visited[t]:
            break
        frontier = nxt
    if not visited[t]:
        return None
    path = [t]
    while path[-1] != s:
        path.append(int(parent[path[-1]]))
    path.reverse()
    return path


def _add_extra(extra: dict[int, set[int]], u: int, v: int) -> None:
    extra.setdefault(u, set()).add(v)
    extra.setdefault(v, set()).add(u)


def birag(session: OracleSession, s: int, t: int, max_iterations: int) -> SearchOutcome:
    """Bidirectional retrieval: query both endpoints, regrow, regenerate.

    The generation attempt runs before any query, so endpoint pairs that
    the prior already connects cost zero oracle calls.  A BOTTOM answer at
    either endpoint means that endpoint is isolated in the truth graph,
    which certifies NO.
    """
    if s == t:
        raise ValueError("endpoints must differ")
    if max_iterations <= 0:
        raise ValueError("max_iterations must be positive")
    prior = session.prior
    extra: dict[int, set[int]] = {}
    path = _augmented_bfs(prior, extra, s, t)
    if path is not None:
        return SearchOutcome(FOUND, path=path, provenance=_tag_path(path, prior),
                             queries=session.session_stats(), meta={"iterations": 0})
    for it in range(1, max_iterations + 1):
        e_s = session.retrieval_query(s)
        e_t = session.retrieval_query(t)
        if e_s is None or e_t is None:
            return SearchOutcome(NO, queries=session.session_stats(), meta={"iterations": it})
        _add_extra(extra, *e_s)
        _add_extra(extra, *e_t)
        path = _augmented_bfs(prior, extra, s, t)
        if path is not None:
            return SearchOutcome(FOUND, path=path, provenance=_tag_path(path, prior),
                                 queries=session.session_stats(), meta={"iterations": it})
    return SearchOutcome(BUDGET_EXHAUSTED, queries=session.session_stats(),
                         meta={"iterations": max_iterations})


def _stitch_tree(prior: Graph, anchors: list[int]) -> tuple[set, set]:
    """Grow a prior tree over the anchors: BFS each new anchor to the claimed set.

    Returns (edge set, claimed vertex set).  All anchors must share a prior
    component.
    """
    claimed = {anchors[0]}
    edges: set[tuple[int, int]] = set()
    indptr, indices = prior._csr()
    for a in anchors[1:]:
        if a in claimed:
            continue
        parent = {a: None}
        q = deque([a])
        hit = None
        while q and hit is None:
            u = q.popleft()
            for v in map(int, indices[indptr[u]:indptr[u + 1]]):
                if v in parent:
                    continue
                parent[v] = u
                if v in claimed:
                    hit = v
                    break
                q.append(v)
        if hit is None:
            raise GraphError("anchors do not share a prior component")
        node = hit
        while parent[node] is not None:
            prev = parent[node]
            edges.add(canonical_edge(node, prev))
            claimed.add(node)
            node = prev
        claimed.add(a)
    return edges, claimed


def steiner_connect(session: OracleSession, terminals: list[int],
                    max_iterations: int) -> SearchOutcome:
    """Connect M terminals with a grounded tree.

    Terminals already sharing a prior component are stitched with zero
    queries.  Otherwise each terminal is retrieval-sampled until an answer
    lands in the largest prior component, then the anchors are joined by
    prior paths; expected cost is one geometric draw per terminal.
    """
    if len(terminals) < 1:
        raise ValueError("need at least one terminal")
    if len(set(terminals)) != len(terminals):
        raise ValueError("terminals must be distinct")
    if max_iterations <= 0:
        raise ValueError("max_iterations must be positive")
    prior = session.prior
    if len(terminals) == 1:
        return SearchOutcome(FOUND, edges=set(), queries=session.session_stats(),
                             meta={"tree_vertices": [terminals[0]]})
    labeling = connected_components(prior)
    if len({labeling.component_of(x) for x in terminals}) == 1:
        edges, claimed = _stitch_tree(prior, list(terminals))
        prov = {e: PRIOR for e in edges}
        return SearchOutcome(FOUND, edges=edges, provenance=prov,
                             queries=session.session_stats(),
                             meta={"tree_vertices": sorted(claimed)})
    witness = labeling.largest_component()
    anchors: list[int] = []
    attach: list[tuple[int, int] | None] = []
    for x in terminals:
        if labeling.component_of(x) == witness:
            anchors.append(x)
            attach.append(None)
            continue
        hit = None
        for _ in range(max_iterations):
            ans = session.retrieval_query(x)
            if ans is None:
                return SearchOutcome(NO, queries=session.session_stats())
            if labeling.component_of(ans[1]) == witness:
                hit = ans
                break
        if hit is None:
            return SearchOutcome(BUDGET_EXHAUSTED, queries=session.session_stats())
        anchors.append(hit[1])
        attach.append(hit)
    edges, claimed = _stitch_tree(prior, anchors)
    prov = {e: PRIOR for e in edges}
    for link in attach:
        if link is None:
            continue
        e = canonical_edge(*link)
        edges.add(e)
        prov[e] = RETRIEVED
        claimed.add(link[0])
    return SearchOutcome(FOUND, edges=edges, provenance=prov,
                         queries=session.session_stats(),
                         meta={"tree_vertices": sorted(claimed)})


def robust_k_routes(session: OracleSession, s: int, t: int, K: int,
                    coloring_seed, max_iterations: int) -> SearchOutcome:
    """Build an internally K-connected subgraph from K color-disjoint routes.

    Prior edges are colored uniformly into K classes; each endpoint is
    retrieval-sampled until every color's largest component holds an anchor
    (coupon collection), then one prior path per color joins the anchors.
    An anchor whose attachment edge is a prior edge is accepted only when
    that edge carries the route's own color, so deleting the other K-1
    color classes can never sever the surviving route.
    """
    if s == t:
        raise ValueError("endpoints must differ")
    if K < 1:
        raise ValueError("K must be >= 1")
    if max_iterations <= 0:
        raise ValueError("max_iterations must be positive")
    prior = session.prior
    n = prior.n
    pe = prior.edges_array
    colors = color_edges(pe, K, coloring_seed)
    color_of = {(int(u), int(v)): int(c) for (u, v), c in zip(pe, colors)}

    if K == 1:
        # single color: same zero-query fast path as the bidirectional finder
        whole = connected_components(prior)
        if whole.same_component(s, t):
            segment = bfs_path(prior, s, t)
            edges = {canonical_edge(a, b) for a, b in zip(segment, segment[1:])}
            return SearchOutcome(FOUND, edges=edges,
                                 provenance={e: PRIOR for e in edges},
                                 queries=session.session_stats(),
                                 meta={"robust": RobustSubgraph(edges=set(edges),
                                                                route_color={e: 0 for e in edges},
                                                                K=1)})

    subgraphs: list[Graph] = []
    labelings = []
    designated: list[int | None] = []
    for k in range(K):
        gk = Graph(n, pe[colors == k])
        subgraphs.append(gk)
        lab = connected_components(gk)
        labelings.append(lab)
        designated.append(lab.largest_component())

    def in_designated(k: int, v: int) -> bool:
        return labelings[k].component_of(v) == designated[k]

    anchors = {s: [None] * K, t: [None] * K}
    attach_edges = {s: [None] * K, t: [None] * K}
    for x in (s, t):
        missing = set(range(K))
        tries = 0
        while missing:
            if tries >= max_iterations:
                return SearchOutcome(BUDGET_EXHAUSTED, queries=session.session_stats())
            tries += 1
            ans = session.retrieval_query(x)
            if ans is None:
                return SearchOutcome(NO, queries=session.session_stats())
            v = ans[1]
            e = canonical_edge(x, v)
            prior_color = color_of.get(e)
            for k in list(missing):
                if in_designated(k, v) and (prior_color is None or prior_color == k):
                    anchors[x][k] = v
                    attach_edges[x][k] = e
                    missing.discard(k)

    edges: set[tuple[int, int]] = set()
    route_color: dict[tuple[int, int], int] = {}
    prov: dict[tuple[int, int], str] = {}
    for k in range(K):
        va, vb = anchors[s][k], anchors[t][k]
        segment = bfs_path(subgraphs[k], va, vb)
        if segment is None:
            raise GraphError("anchors left the designated component")
        for a, b in zip(segment, segment[1:]):
            e = canonical_edge(a, b)
            edges.add(e)
            route_color[e] = k
            prov[e] = PRIOR
        for x in (s, t):
            link = attach_edges[x][k]
            if link is not None:
                edges.add(link)
                route_color.setdefault(link, k)
                prov[link] = PRIOR if color_of.get(link) is not None else RETRIEVED
    if not internally_k_connected(edges, prior, s, t, K):
        raise GraphError("constructed routes failed the K-connectivity check")
    return SearchOutcome(FOUND, edges=edges, provenance=prov,
                         queries=session.session_stats(),
                         meta={"robust": RobustSubgraph(edges=set(edges),
                                                        route_color=route_color, K=K)})


def _candidate_paths(prior: Graph, s: int, t: int, c: int):
    """Simple s-t paths of length <= c, shortest first, lexicographic ties."""
    n = prior.n
    dist = np.full(n, n + 1, dtype=np.int64)
    dist[t] = 0
    frontier = [t]
    d = 0
    indptr, indices = prior._csr()
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in map(int, indices[indptr[u]:indptr[u + 1]]):
                if dist[v] > d:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    for length in range(1, c + 1):
        # depth-first over ascending neighbors emits length-L paths in lex order
        stack = [(s, [s])]
        while stack:
            u, path = stack.pop()
            remaining = length - (len(path) - 1)
            if remaining == 0:
                if u == t:
                    yield list(path)
                continue
            nbrs = [int(v) for v in prior.neighbors(u)]
            for v in reversed(nbrs):
                if v in path:
                    continue
                if dist[v] > remaining - 1:
                    continue
                if v == t and remaining != 1:
                    continue
                stack.append((v, path + [v]))


def generate_then_verify(session: OracleSession, s: int, t: int, c: int,
                         max_candidates: int) -> SearchOutcome:
    """Enumerate prior paths and certify the first one the verifier accepts.

    Candidates are checked left to right and abandoned at the first false
    edge; verdicts are cached so no pair is queried twice.  Useful when the
    prior may contain false edges.
    """
    if s == t:
        raise ValueError("endpoints must differ")
    if c < 1:
        raise ValueError("maximum path length must be >= 1")
    if max_candidates < 1:
        raise ValueError("max_candidates must be >= 1")
    verdicts: dict[tuple[int, int], bool] = {}
    examined = 0
    for path in _candidate_paths(session.prior, s, t, c):
        if examined >= max_candidates:
            return SearchOutcome(BUDGET_EXHAUSTED, queries=session.session_stats(),
                                 meta={"candidates": examined})
        examined += 1
        ok = True
        for a, b in zip(path, path[1:]):
            e = canonical_edge(a, b)
            verdict = verdicts.get(e)
            if verdict is None:
                verdict = session.verify_edge(a, b)
                verdicts[e] = verdict
            if not verdict:
                ok = False
                break
        if ok:
            prov = {canonical_edge(a, b): VERIFIED for a, b in zip(path, path[1:])}
            return SearchOutcome(FOUND, path=path, provenance=prov,
                                 queries=session.session_stats(),
                                 meta={"candidates": examined})
    return SearchOutcome(NO, queries=session.session_stats(),
                         meta={"candidates": examined})


def grounded_bidirectional_probe(session: OracleSession, s: int, t: int,
                                 budget: int) -> SearchOutcome:
    """Alternate memory queries at s and t until the neighbor sets collide.

    A collision is a common returned vertex or the direct edge itself.  A
    first-query BOTTOM at an endpoint with no incident prior edges proves
    isolation (NO); later exhaustion is inconclusive and counts as budget
    exhaustion.
    """
    if s == t:
        raise ValueError("endpoints must differ")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    seen_s: set[int] = set()
    seen_t: set[int] = set()
    exhausted = {s: False, t: False}
    answered = {s: False, t: False}
    order = [(s, seen_s, seen_t, t), (t, seen_t, seen_s, s)]
    queries = 0
    while queries < budget and not (exhausted[s] and exhausted[t]):
        for x, mine, other, mate in order:
            if exhausted[x] or queries >= budget:
                continue
            ans = session.memory_retrieval_query(x)
            queries += 1
            if ans is None:
                if not answered[x] and session.prior.degree(x) == 0:
                    return SearchOutcome(NO, queries=session.session_stats(),
                                         meta={"collision_queries": queries})
                exhausted[x] = True
                continue
            answered[x] = True
            v = ans[1]
            if v == mate:
                path = [s, t]
                return SearchOutcome(FOUND, path=path,
                                     provenance=_tag_path(path, session.prior),
                                     queries=session.session_stats(),
                                     meta={"collision_queries": queries})
            if v in other:
                path = [s, v, t]
                return SearchOutcome(FOUND, path=path,
                                     provenance=_tag_path(path, session.prior),
                                     queries=session.session_stats(),
                                     meta={"collision_queries": queries})
            mine.add(v)
    return SearchOutcome(BUDGET_EXHAUSTED, queries=session.session_stats(),
                         meta={"collision_queries": queries})


class _UnionFind:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        p = self.parent.setdefault(x, x)
        while p != x:
            self.parent[x] = self.parent.setdefault(p, p)
            x = self.parent[x]
            p = self.parent.setdefault(x, x)
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def budgeted_cci_search(session: OracleSession, s: int, t: int,
                        budget: int) -> SearchOutcome:
    """Bidirectional greedy frontier search over prior components via CCI calls.

    Components discovered from each side are queried FIFO, alternating
    sides.  Because a CCI answer is exhaustive for its component, an
    exhausted frontier without reaching the other side certifies NO.
    """
    if s == t:
        raise ValueError("endpoints must differ")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    labeling = session.prior_labels()
    comp_s, comp_t = labeling.component_of(s), labeling.component_of(t)
    extra: dict[int, set[int]] = {}

    def finish_found(queries_used: int) -> SearchOutcome:
        path = _augmented_bfs(session.prior, extra, s, t)
        return SearchOutcome(FOUND, path=path,
                             provenance=_tag_path(path, session.prior),
                             queries=session.session_stats(),
                             meta={"cci_calls": queries_used})

    if comp_s == comp_t:
        return finish_found(0)
    uf = _UnionFind()
    queues = {0: deque([comp_s]), 1: deque([comp_t])}
    queried: set[int] = set()
    used = 0
    side = 0
    while used < budget:
        if not queues[side] and not queues[1 - side]:
            return SearchOutcome(NO, queries=session.session_stats(),
                                 meta={"cci_calls": used})
        if not queues[side]:
            side = 1 - side
        comp = queues[side].popleft()
        if comp in queried:
            continue
        queried.add(comp)
        answer = session.cci_query(comp)  # component labels double as member ids
        used += 1
        if answer is None:
            # isolated component: if it is s's or t's own, NO is certain
            if comp in (comp_s, comp_t) and uf.find(comp_s) != uf.find(comp_t):
                return SearchOutcome(NO, queries=session.session_stats(),
                                     meta={"cci_calls": used})
            side = 1 - side
            continue
        for u, w in answer:
            _add_extra(extra, u, w)
            cw = labeling.component_of(w)
            uf.union(labeling.component_of(u), cw)
            if cw not in queried:
                queues[side].append(cw)
        if uf.find(comp_s) == uf.find(comp_t):
            return finish_found(used)
        side = 1 - side
    return SearchOutcome(BUDGET_EXHAUSTED, queries=session.session_stats(),
                         meta={"cci_calls": used})


def double_bfs(truth, s: int, t: int) -> tuple[list[int] | None, int]:
    """Alternating bidirectional BFS over the truth graph.

    Expands the smaller frontier each round until the two sides meet.
    Returns the path (None if disconnected) and the number of distinct
    vertices visited by either side.
    """
    n = truth.n
    if not (0 <= s < n and 0 <= t < n):
        raise GraphError("double_bfs endpoints out of range")
    if s == t:
        return [s], 1
    side = np.zeros(n, dtype=np.int8)  # 0 unvisited, 1 from s, 2 from t
    parent = np.full(n, -1, dtype=np.int64)
    side[s], side[t] = 1, 2
    frontiers = {1: [s], 2: [t]}
    fast = isinstance(truth, Graph)
    if fast:
        indptr, indices = truth._csr()

    def neighbors_of(front):
        if fast:
            farr = np.asarray(front, dtype=np.int64)
            starts = indptr[farr]
            counts = indptr[farr + 1] - starts
            total = int(counts.sum())
            if total == 0:
                return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
            ends = np.cumsum(counts)
            offs = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
            return indices[np.repeat(starts, counts) + offs], np.repeat(farr, counts)
        nb, sr = [], []
        for u in front:
            for v in map(int, truth.neighbors(u)):
                nb.append(v)
                sr.append(u)
        return np.asarray(nb, dtype=np.int64), np.asarray(sr, dtype=np.int64)

    meet = None
    while meet is None:
        lens = {k: len(v) for k, v in frontiers.items()}
        if lens[1] == 0 or lens[2] == 0:
            break
        tag = 1 if lens[1] <= lens[2] else 2
        other = 3 - tag
        nbrs, srcs = neighbors_of(frontiers[tag])
        if nbrs.size == 0:
            frontiers[tag] = []
            continue
        hit = side[nbrs] == other
        if hit.any():
            i = int(np.flatnonzero(hit)[0])
            meet = (int(srcs[i]), int(nbrs[i]))
            break
        fresh = side[nbrs] == 0
        nbrs, srcs = nbrs[fresh], srcs[fresh]
        parent[nbrs] = srcs
        side[nbrs] = tag
        frontiers[tag] = np.unique(nbrs).tolist()
    visited = int(np.count_nonzero(side))
    if meet is None:
        return None, visited
    a, b = meet
    if side[a] == 2:
        a, b = b, a
    left = [a]
    while left[-1] != s:
        left.append(int(parent[left[-1]]))
    left.reverse()
    right = [b]
    while right[-1] != t:
        right.append(int(parent[right[-1]]))
    return left + right, visited


# -- grounding audit --------------------------------------------------------


def validate_outcome(outcome: SearchOutcome, world) -> bool:
    """Soundness: every output edge (path or subgraph) exists in the truth graph."""
    if outcome.status != FOUND:
        return True
    truth = world.truth
    if outcome.path is not None:
        if len(set(outcome.path)) != len(outcome.path):
            return False
        return all(truth.has_edge(a, b) for a, b in zip(outcome.path, outcome.path[1:]))
    if outcome.edges is not None:
        return all(truth.has_edge(u, v) for u, v in outcome.edges)
    return False


def grounding_violations(outcome: SearchOutcome, session: OracleSession) -> list[tuple]:
    """Output edges not justified by the prior or by this session's oracle calls.

    Replays the session trace rather than trusting the bookkeeping sets, so
    a tampered provenance map cannot hide an unobserved edge.
    """
    if outcome.status != FOUND:
        return []
    revealed: set[tuple[int, int]] = set()
    confirmed: set[tuple[int, int]] = set()
    for kind, arg, answer in session.trace:
        if answer is None:
            continue
        if kind in ("retrieval", "memory"):
            revealed.add(canonical_edge(*answer))
        elif kind == "cci":
            for u, w in answer:
                revealed.add(canonical_edge(u, w))
        elif kind == "verify" and answer:
            confirmed.add(canonical_edge(*arg))
    prior = session.prior
    if outcome.path is not None:
        out_edges = [canonical_edge(a, b) for a, b in zip(outcome.path, outcome.path[1:])]
    else:
        out_edges = sorted(outcome.edges or ())
    bad = []
    for e in out_edges:
        tag = outcome.provenance.get(e)
        if tag == PRIOR:
            if not prior.has_edge(*e):
                bad.append((e, "tagged prior but absent from prior"))
        elif tag == RETRIEVED:
            if e not in revealed:
                bad.append((e, "tagged retrieved but never returned"))
        elif tag == VERIFIED:
            if e not in confirmed:
                bad.append((e, "tagged verified but never confirmed"))
        else:
            if not (prior.has_edge(*e) or e in revealed or e in confirmed):
                bad.append((e, "untagged and unobserved"))
    return bad
