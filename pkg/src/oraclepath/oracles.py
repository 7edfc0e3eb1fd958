"""Query gateways over a world pair, with per-session memory and accounting.

A session is the only sanctioned route from search code to the truth
graph.  It owns a seeded RNG stream, counts every call (including BOTTOM
answers), and records every edge it ever reveals so grounding can be
audited after the fact.  BOTTOM is represented as ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import canonical_edge, connected_components
from .worlds import WorldPair


@dataclass(frozen=True)
class SessionStats:
    retrieval_queries: int
    cci_queries: int
    verify_queries: int
    revealed_edges: int

    @property
    def total_queries(self) -> int:
        return self.retrieval_queries + self.cci_queries + self.verify_queries


class OracleSession:
    """Stateful oracle frontend for one algorithm run.

    Single-owner and single-threaded; open many sessions over one
    immutable world for concurrent trials.  Counters never decrease and
    charge BOTTOM answers as full queries.
    """

    def __init__(self, world: WorldPair, seed, record_trace: bool = True):
        self.world = world
        self.prior = world.prior
        self._truth = world.truth
        self.rng = np.random.default_rng(seed)
        self.retrieval_count = 0
        self.cci_count = 0
        self.verify_count = 0
        self.revealed: set[tuple[int, int]] = set()
        self.verified_true: set[tuple[int, int]] = set()
        self.record_trace = record_trace
        self.trace: list[tuple] = []
        # memory-oracle state, built on first use
        self._seen_keys: set[int] | None = None
        self._seen_inc: np.ndarray | None = None
        # CCI state, built on first use; the prior is fixed for the whole
        # session, so component structure is computed once and never merged
        self._prior_labels = None
        self._cci_cache: dict[int, tuple[tuple[int, int], ...]] = {}

    # -- plain retrieval ---------------------------------------------------

    def retrieval_query(self, u: int) -> tuple[int, int] | None:
        """A uniformly random truth neighbor of u, or BOTTOM if isolated."""
        self.retrieval_count += 1
        deg = self._truth.degree(u)
        if deg == 0:
            self._log("retrieval", u, None)
            return None
        v = self._truth.neighbor_at(u, int(self.rng.integers(deg)))
        self.revealed.add(canonical_edge(u, v))
        self._log("retrieval", u, (u, v))
        return (u, v)

    # -- prior-aware retrieval with memory ----------------------------------

    def _ensure_memory_state(self):
        if self._seen_keys is not None:
            return
        n = self.prior.n
        e = self.prior.edges_array
        self._seen_keys = set((e[:, 0] * n + e[:, 1]).tolist())
        inc = np.zeros(n, dtype=np.int64)
        if e.shape[0]:
            inc += np.bincount(e[:, 0], minlength=n)
            inc += np.bincount(e[:, 1], minlength=n)
        self._seen_inc = inc

    def memory_retrieval_query(self, u: int) -> tuple[int, int] | None:
        """Uniform over the unseen truth neighbors of u; never repeats an edge.

        Seen edges start out as the prior's edge set, so prior edges are
        never returned either.
        """
        self._ensure_memory_state()
        self.retrieval_count += 1
        n = self.prior.n
        deg = self._truth.degree(u)
        unseen = deg - int(self._seen_inc[u])
        if unseen <= 0:
            self._log("memory", u, None)
            return None
        if unseen * 4 >= deg:
            while True:
                v = self._truth.neighbor_at(u, int(self.rng.integers(deg)))
                lo, hi = (u, v) if u < v else (v, u)
                if lo * n + hi not in self._seen_keys:
                    break
        else:
            candidates = [w for w in map(int, self._truth.neighbors(u))
                          if min(u, w) * n + max(u, w) not in self._seen_keys]
            v = candidates[int(self.rng.integers(len(candidates)))]
        lo, hi = (u, v) if u < v else (v, u)
        self._seen_keys.add(lo * n + hi)
        self._seen_inc[u] += 1
        self._seen_inc[v] += 1
        self.revealed.add((lo, hi))
        self._log("memory", u, (u, v))
        return (u, int(v))

    # -- component-incidence oracle -----------------------------------------

    def prior_labels(self):
        if self._prior_labels is None:
            self._prior_labels = connected_components(self.prior)
        return self._prior_labels

    def _component_cross_edges(self, comp_id: int) -> tuple[tuple[int, int], ...]:
        cached = self._cci_cache.get(comp_id)
        if cached is not None:
            return cached
        labeling = self.prior_labels()
        members = labeling.members(comp_id)
        truth = self._truth
        out: list[tuple[int, int]] = []
        if hasattr(truth, "_csr") and members.size > 1:
            indptr, indices = truth._csr()
            starts = indptr[members]
            counts = indptr[members + 1] - starts
            total = int(counts.sum())
            if total:
                ends = np.cumsum(counts)
                offs = np.arange(total, dtype=np.int64) - np.repeat(ends - counts, counts)
                nbrs = indices[np.repeat(starts, counts) + offs]
                srcs = np.repeat(members, counts)
                cross = labeling.labels[nbrs] != comp_id
                out = list(zip(srcs[cross].tolist(), nbrs[cross].tolist()))
        else:
            for m in map(int, members):
                for w in map(int, truth.neighbors(m)):
                    if labeling.labels[w] != comp_id:
                        out.append((m, w))
        answer = tuple(sorted(out))
        self._cci_cache[comp_id] = answer
        return answer

    def cci_query(self, v: int) -> tuple[tuple[int, int], ...] | None:
        """All truth edges leaving the prior component of v, or BOTTOM.

        Each returned pair (u, w) has u inside the component and w outside;
        the answer depends only on the component, not the queried member.
        """
        self.cci_count += 1
        comp = self.prior_labels().component_of(v)
        answer = self._component_cross_edges(comp)
        if not answer:
            self._log("cci", v, None)
            return None
        for u, w in answer:
            self.revealed.add(canonical_edge(u, w))
        self._log("cci", v, answer)
        return answer

    # -- verifier -------------------------------------------------------------

    def verify_edge(self, u: int, v: int) -> bool:
        """Membership of {u, v} in the truth edge set.  Self-pairs are rejected."""
        if u == v:
            raise ValueError("verifier rejects self-pairs")
        self.verify_count += 1
        answer = self._truth.has_edge(u, v)
        if answer:
            self.verified_true.add(canonical_edge(u, v))
        self._log("verify", (u, v), answer)
        return bool(answer)

    # -- accounting -------------------------------------------------------------

    def session_stats(self) -> SessionStats:
        return SessionStats(
            retrieval_queries=self.retrieval_count,
            cci_queries=self.cci_count,
            verify_queries=self.verify_count,
            revealed_edges=len(self.revealed),
        )

    def _log(self, kind: str, arg, answer) -> None:
        if self.record_trace:
            self.trace.append((kind, arg, answer))

    def trace_lines(self) -> list[str]:
        """Audit log, one line per call: "kind arg answer"."""
        lines = []
        for kind, arg, answer in self.trace:
            if kind == "verify":
                u, v = arg
                lines.append(f"verify {u}-{v} {'yes' if answer else 'no'}")
                continue
            if answer is None:
                text = "bottom"
            elif kind == "cci":
                text = ";".join(f"{u}-{w}" for u, w in answer)
            else:
                text = f"{answer[0]}-{answer[1]}"
            lines.append(f"{kind} {arg} {text}")
        return lines

    def write_trace(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.trace_lines():
                fh.write(line + "\n")


def observed_edge_sets(session: OracleSession) -> tuple[set, set]:
    """(edges revealed by retrieval/cci, pairs confirmed true by the verifier)."""
    return set(session.revealed), set(session.verified_true)
