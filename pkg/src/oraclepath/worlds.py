"""Generators for (truth, prior) world pairs.

Every generator is a deterministic function of its seed.  The truth graph
is sampled first and the prior derived from it by edge retention; the
distributionally equivalent reverse direction (sample the prior, then add
each missing pair with :func:`equivalent_readd_probability`) is exposed
only as a documented constant because the forward direction is simpler to
audit.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .graphs import CompleteGraph, Graph, GraphError, build_graph, connected_components, read_edge_list, write_edge_list


@dataclass
class WorldPair:
    """A hidden truth graph plus the partial prior an algorithm starts from.

    ``family`` carries the generator tag, its parameters, and hidden
    metadata (e.g. double-star bridge endpoints) used for analysis only;
    search code must never read it.
    """

    truth: Graph | CompleteGraph
    prior: Graph
    family: dict
    prior_reliable: bool

    def __post_init__(self):
        if self.truth.n != self.prior.n:
            raise GraphError("truth and prior must share a vertex set")

    @property
    def n(self) -> int:
        return self.truth.n


@dataclass
class ErPriorParams:
    n: int
    p: float
    eta: float
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must lie in [0, 1]")


@dataclass
class DoubleStarParams:
    n: int
    seed: int

    def __post_init__(self):
        if self.n % 2 != 0 or self.n < 6:
            raise ValueError("double star needs an even n >= 6")


@dataclass
class PartitionParams:
    group_sizes: list[int]
    p: float
    eta: float
    seed: int

    def __post_init__(self):
        if len(self.group_sizes) < 1 or any(s <= 0 for s in self.group_sizes):
            raise ValueError("group sizes must be positive")
        if not (0.0 <= self.p <= 1.0) or not (0.0 <= self.eta <= 1.0):
            raise ValueError("p and eta must lie in [0, 1]")

    @property
    def n(self) -> int:
        return sum(self.group_sizes)


@dataclass
class NoisyPriorParams:
    n: int
    p: float
    eta: float
    r: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.r <= 1.0):
            raise ValueError("r must lie in (0, 1]")
        if not (0.0 <= self.p <= 1.0) or not (0.0 <= self.eta <= 1.0):
            raise ValueError("p and eta must lie in [0, 1]")


@dataclass
class MetaGraph:
    """Prior components contracted to super-nodes, truth edges projected."""

    meta: Graph
    membership: np.ndarray


def equivalent_readd_probability(p: float, eta: float) -> float:
    """Edge probability that re-adding to a sampled prior reproduces the truth law.

    Sampling truth ~ ER(n, p) then retaining edges with probability eta is
    distributionally identical to sampling the prior ~ ER(n, p*eta) and
    adding each absent pair independently with this probability.
    """
    if p * eta >= 1.0:
        return 1.0
    return (p - p * eta) / (1.0 - p * eta)


# -- pair-index arithmetic for ER sampling --------------------------------


def _pairs_from_indices(n: int, k: np.ndarray) -> np.ndarray:
    """Map linear indices into the lexicographic (u < v) pair ordering."""
    k = k.astype(np.float64)
    b = 2 * n - 1
    u = np.floor((b - np.sqrt(b * b - 8.0 * k)) / 2.0).astype(np.int64)
    u = np.clip(u, 0, n - 2)
    # float sqrt can land one row off; nudge into the row whose range covers k
    for _ in range(2):
        start = u * (2 * n - u - 1) // 2
        u = np.where(k.astype(np.int64) < start, u - 1, u)
        start = u * (2 * n - u - 1) // 2
        width = n - 1 - u
        u = np.where(k.astype(np.int64) >= start + width, u + 1, u)
    start = u * (2 * n - u - 1) // 2
    v = k.astype(np.int64) - start + u + 1
    return np.column_stack((u, v))


def _sample_pair_indices(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of an i.i.d. Bernoulli(p) subset of [0, total), by geometric skips."""
    if total == 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    first = max(1024, int(total * p * 1.05) + 64)
    chunks = []
    position = -1
    batch = first
    while position < total:
        draws = rng.geometric(p, size=batch).astype(np.int64)
        idx = np.cumsum(draws) + position
        chunks.append(idx)
        position = int(idx[-1])
        batch = 65536
    keep = np.concatenate(chunks)
    return keep[keep < total]


def gen_er(n: int, p: float, seed) -> Graph:
    """Erdős–Rényi G(n, p), each unordered pair an edge independently.

    Runs in O(m) expected time via geometric skip sampling, so sparse
    graphs on 10^5 vertices are cheap.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    total = n * (n - 1) // 2
    idx = _sample_pair_indices(total, p, rng)
    if idx.size == 0:
        return Graph(n, np.empty((0, 2), dtype=np.int64))
    return Graph(n, _pairs_from_indices(n, idx))


def subsample_prior(truth: Graph, eta: float, seed) -> Graph:
    """Retain each truth edge independently with probability eta."""
    if not (0.0 <= eta <= 1.0):
        raise ValueError("eta must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    e = truth.edges_array
    keep = rng.random(e.shape[0]) < eta
    return Graph(truth.n, e[keep])


def gen_er_world(params: ErPriorParams) -> WorldPair:
    """ER truth with an eta-retained prior; the workhorse admissible family."""
    rng = np.random.default_rng(params.seed)
    truth = gen_er(params.n, params.p, rng)
    prior = subsample_prior(truth, params.eta, rng)
    family = {"family": "er-prior", "n": params.n, "p": params.p,
              "eta": params.eta, "seed": params.seed}
    return WorldPair(truth, prior, family, prior_reliable=True)


def gen_double_star(params: DoubleStarParams) -> WorldPair:
    """Two stars joined by one hidden leaf-to-leaf bridge.

    The prior is the truth minus the bridge; bridge endpoints are stored in
    family metadata for analysis but are never visible to search code.
    """
    n = params.n
    h = n // 2
    rng = np.random.default_rng(params.seed)
    c_s, c_t = 0, h
    star_edges = [(c_s, i) for i in range(1, h)] + [(c_t, j) for j in range(h + 1, n)]
    u = 1 + int(rng.integers(h - 1))          # uniform over S \ {c_s}
    v = h + 1 + int(rng.integers(h - 1))      # uniform over T \ {c_t}
    truth = build_graph(n, star_edges + [(u, v)])
    prior = build_graph(n, star_edges)
    family = {"family": "double-star", "n": n, "seed": params.seed,
              "centers": [c_s, c_t], "bridge": [u, v]}
    return WorldPair(truth, prior, family, prior_reliable=True)


def gen_partitioned(params: PartitionParams) -> WorldPair:
    """ER truth; prior keeps only intra-group edges, each with probability eta."""
    n = params.n
    rng = np.random.default_rng(params.seed)
    truth = gen_er(n, params.p, rng)
    gid = np.repeat(np.arange(len(params.group_sizes)), params.group_sizes)
    e = truth.edges_array
    intra = gid[e[:, 0]] == gid[e[:, 1]]
    keep = intra & (rng.random(e.shape[0]) < params.eta)
    prior = Graph(n, e[keep])
    family = {"family": "partitioned", "n": n, "p": params.p, "eta": params.eta,
              "seed": params.seed, "group_sizes": list(params.group_sizes)}
    return WorldPair(truth, prior, family, prior_reliable=True)


def gen_noisy_prior(params: NoisyPriorParams) -> WorldPair:
    """Prior mixing retained truth edges with uniformly sampled false pairs.

    The false-edge count is binomial with mean |T|*(1-r)/r, the minimal
    i.i.d. model under which a prior edge is a truth edge with probability
    r in expectation.
    """
    n = params.n
    rng = np.random.default_rng(params.seed)
    truth = gen_er(n, params.p, rng)
    e = truth.edges_array
    keep = rng.random(e.shape[0]) < params.eta
    kept = e[keep]
    n_true = kept.shape[0]
    total = n * (n - 1) // 2
    n_false_pool = total - e.shape[0]
    mean_false = n_true * (1.0 - params.r) / params.r
    if n_false_pool <= 0 or mean_false <= 0.0:
        f = 0
    else:
        f = int(rng.binomial(n_false_pool, min(1.0, mean_false / n_false_pool)))
    truth_keys = set((e[:, 0] * n + e[:, 1]).tolist())
    false_edges: list[tuple[int, int]] = []
    chosen: set[int] = set()
    while len(false_edges) < f:
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u == v:
            continue
        lo, hi = (u, v) if u < v else (v, u)
        key = lo * n + hi
        if key in truth_keys or key in chosen:
            continue
        chosen.add(key)
        false_edges.append((lo, hi))
    prior = build_graph(n, [tuple(x) for x in kept.tolist()] + false_edges)
    family = {"family": "noisy-prior", "n": n, "p": params.p, "eta": params.eta,
              "r": params.r, "seed": params.seed,
              "true_edges": int(n_true), "false_edges": int(f)}
    return WorldPair(truth, prior, family, prior_reliable=False)


def gen_complete_empty(n: int, materialize: bool | None = None) -> WorldPair:
    """Complete truth, empty prior: the no-knowledge collision testbed.

    Above a few thousand vertices the truth stays implicit (adjacency is
    arithmetic) so that large sweeps do not materialize K_n.
    """
    if n < 2:
        raise ValueError("complete/empty worlds need n >= 2")
    if materialize is None:
        materialize = n <= 2048
    truth = build_graph(n, CompleteGraph(n).edges_array) if materialize else CompleteGraph(n)
    prior = build_graph(n, [])
    family = {"family": "complete-empty", "n": n}
    return WorldPair(truth, prior, family, prior_reliable=True)


def contract_components(pair: WorldPair) -> MetaGraph:
    """Collapse prior components into super-nodes; keep crossing truth edges."""
    labeling = connected_components(pair.prior)
    comp_ids = labeling.component_ids()
    index_of = {c: i for i, c in enumerate(comp_ids)}
    labels = labeling.labels
    membership = np.array([index_of[int(c)] for c in labels], dtype=np.int64)
    e = pair.truth.edges_array
    a = membership[e[:, 0]]
    b = membership[e[:, 1]]
    cross = a != b
    lo = np.minimum(a[cross], b[cross])
    hi = np.maximum(a[cross], b[cross])
    meta = build_graph(len(comp_ids), np.column_stack((lo, hi)))
    return MetaGraph(meta=meta, membership=membership)


def color_edges(edges: np.ndarray, k: int, seed) -> np.ndarray:
    """Uniform i.i.d. color in [0, k) per edge; shared by routing and analysis."""
    if k < 1:
        raise ValueError("need at least one color")
    rng = np.random.default_rng(seed)
    return rng.integers(0, k, size=edges.shape[0])


def trial_rng(root_seed: int, trial: int) -> np.random.Generator:
    """Independent per-trial stream: PCG64 seeded by (root, trial) entropy."""
    return np.random.default_rng(np.random.SeedSequence(entropy=(int(root_seed), int(trial))))


# -- directory serialization ----------------------------------------------


def save_world(pair: WorldPair, directory) -> None:
    """Write truth.edges, prior.edges and meta.json into a directory."""
    os.makedirs(directory, exist_ok=True)
    truth = pair.truth
    if isinstance(truth, CompleteGraph):
        truth = build_graph(truth.n, truth.edges_array)
    write_edge_list(truth, os.path.join(directory, "truth.edges"))
    write_edge_list(pair.prior, os.path.join(directory, "prior.edges"))
    meta = {"family": pair.family, "prior_reliable": pair.prior_reliable}
    with open(os.path.join(directory, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_world(directory) -> WorldPair:
    truth = read_edge_list(os.path.join(directory, "truth.edges"))
    prior = read_edge_list(os.path.join(directory, "prior.edges"))
    with open(os.path.join(directory, "meta.json")) as fh:
        meta = json.load(fh)
    return WorldPair(truth, prior, meta["family"], bool(meta["prior_reliable"]))
