"""Oracle sessions: answer semantics, memory discipline, counting, determinism."""

import numpy as np
import pytest
from scipy import stats

from oraclepath.graphs import build_graph, canonical_edge
from oraclepath.oracles import OracleSession, observed_edge_sets
from oraclepath.worlds import (
    ErPriorParams,
    NoisyPriorParams,
    WorldPair,
    gen_complete_empty,
    gen_er_world,
    gen_noisy_prior,
)


def make_world(n, truth_edges, prior_edges, reliable=True):
    return WorldPair(build_graph(n, truth_edges), build_graph(n, prior_edges),
                     {"family": "manual", "n": n}, prior_reliable=reliable)


# -- plain retrieval ---------------------------------------------------------


def test_retrieval_isolated_vertex_is_bottom():
    w = make_world(3, [(0, 1)], [])
    ses = OracleSession(w, seed=1)
    assert ses.retrieval_query(2) is None
    assert ses.retrieval_count == 1  # BOTTOM is charged


def test_retrieval_degree_one_always_unique():
    w = make_world(3, [(0, 1)], [])
    ses = OracleSession(w, seed=1)
    for _ in range(10):
        assert ses.retrieval_query(0) == (0, 1)


def test_retrieval_uniformity_chi_square():
    # degree-8 hub, 1e5 draws, alpha = 0.001
    star = [(0, i) for i in range(1, 9)]
    w = make_world(9, star, [])
    ses = OracleSession(w, seed=5, record_trace=False)
    counts = np.zeros(9, dtype=int)
    for _ in range(100_000):
        counts[ses.retrieval_query(0)[1]] += 1
    assert stats.chisquare(counts[1:]).pvalue > 0.001


# -- memory retrieval ----------------------------------------------------------


def test_memory_star_center_with_prior_edges_is_bottom():
    star = [(0, i) for i in range(1, 6)]
    w = make_world(6, star, star)
    ses = OracleSession(w, seed=2)
    assert ses.memory_retrieval_query(0) is None


def test_memory_exhaustion_after_degree_queries():
    edges = [(0, 1), (0, 2), (0, 3)]
    w = make_world(4, edges, [])
    ses = OracleSession(w, seed=3)
    answers = {canonical_edge(*ses.memory_retrieval_query(0)) for _ in range(3)}
    assert answers == {(0, 1), (0, 2), (0, 3)}
    assert ses.memory_retrieval_query(0) is None


def test_memory_first_answer_uniform_over_unseen():
    edges = [(0, 1), (0, 2), (0, 3), (0, 4)]
    prior = [(0, 1)]  # one edge pre-seen: first answer uniform over the other three
    counts = {}
    for seed in range(3000):
        ses = OracleSession(make_world(5, edges, prior), seed=seed)
        _, v = ses.memory_retrieval_query(0)
        counts[v] = counts.get(v, 0) + 1
    assert set(counts) == {2, 3, 4}
    assert stats.chisquare(list(counts.values())).pvalue > 0.001


def test_memory_never_repeats_and_never_prior_fuzz():
    w = gen_er_world(ErPriorParams(n=150, p=0.25, eta=0.4, seed=8))
    prior_edges = {tuple(e) for e in w.prior.edges_array.tolist()}
    truth_count = w.truth.edge_count
    ses = OracleSession(w, seed=4, record_trace=False)
    rng = np.random.default_rng(0)
    returned = set()
    for _ in range(3000):
        ans = ses.memory_retrieval_query(int(rng.integers(150)))
        if ans is None:
            continue
        e = canonical_edge(*ans)
        assert e not in returned
        assert e not in prior_edges
        assert w.truth.has_edge(*e)
        returned.add(e)
    assert len(returned) <= truth_count - len(prior_edges)


# -- CCI -------------------------------------------------------------------------


def test_cci_full_component_is_bottom():
    tri = [(0, 1), (1, 2), (0, 2)]
    w = make_world(3, tri, tri)
    ses = OracleSession(w, seed=1)
    assert ses.cci_query(0) is None
    assert ses.cci_count == 1


def test_cci_empty_prior_returns_incident_edges():
    edges = [(0, 1), (0, 2), (1, 2), (2, 3)]
    w = make_world(4, edges, [])
    ses = OracleSession(w, seed=1)
    assert ses.cci_query(2) == ((2, 0), (2, 1), (2, 3))


def test_cci_matches_brute_force_scan():
    rng = np.random.default_rng(30)
    for trial in range(50):
        n = int(rng.integers(5, 31))
        w = gen_er_world(ErPriorParams(n=n, p=0.3, eta=0.3, seed=trial))
        ses = OracleSession(w, seed=trial)
        labels = ses.prior_labels().labels
        v = int(rng.integers(n))
        directed = [(a, b) for a, b in w.truth.edges()] + [(b, a) for a, b in w.truth.edges()]
        expected = tuple(sorted(
            (inside, outside) for inside, outside in directed
            if labels[inside] == labels[v] and labels[outside] != labels[v]))
        got = ses.cci_query(v)
        assert (got or ()) == expected


def test_cci_invariant_to_queried_member():
    w = gen_er_world(ErPriorParams(n=25, p=0.3, eta=0.4, seed=6))
    ses = OracleSession(w, seed=1)
    labels = ses.prior_labels().labels
    comp = int(labels[0])
    members = [v for v in range(25) if labels[v] == comp]
    answers = {ses.cci_query(v) for v in members}
    assert len(answers) == 1


# -- verifier ----------------------------------------------------------------------


def test_verify_truth_and_noise_edges():
    w = gen_noisy_prior(NoisyPriorParams(n=50, p=0.2, eta=0.6, r=0.6, seed=4))
    truth = {tuple(e) for e in w.truth.edges_array.tolist()}
    ses = OracleSession(w, seed=1)
    false_edges = [e for e in w.prior.edges() if e not in truth]
    true_edges = [e for e in w.prior.edges() if e in truth]
    assert false_edges and true_edges
    assert not ses.verify_edge(*false_edges[0])
    assert ses.verify_edge(*true_edges[0])


def test_verify_exhaustive_small_world():
    w = gen_er_world(ErPriorParams(n=10, p=0.4, eta=0.5, seed=2))
    ses = OracleSession(w, seed=1, record_trace=False)
    for u in range(10):
        for v in range(u + 1, 10):
            assert ses.verify_edge(u, v) == w.truth.has_edge(u, v)


def test_verify_rejects_self_pair():
    w = make_world(3, [(0, 1)], [])
    ses = OracleSession(w, seed=1)
    with pytest.raises(ValueError):
        ses.verify_edge(1, 1)


# -- accounting ----------------------------------------------------------------------


def test_fresh_session_counters_zero():
    ses = OracleSession(make_world(3, [(0, 1)], []), seed=1)
    st = ses.session_stats()
    assert (st.retrieval_queries, st.cci_queries, st.verify_queries) == (0, 0, 0)
    assert st.revealed_edges == 0


def test_counters_per_kind():
    w = make_world(4, [(0, 1), (1, 2), (2, 3)], [(0, 1)])
    ses = OracleSession(w, seed=1)
    for _ in range(3):
        ses.retrieval_query(1)
    ses.verify_edge(0, 3)
    ses.verify_edge(1, 2)
    st = ses.session_stats()
    assert (st.retrieval_queries, st.cci_queries, st.verify_queries) == (3, 0, 2)


def test_counters_match_shadow_log():
    w = gen_er_world(ErPriorParams(n=40, p=0.3, eta=0.4, seed=3))
    ses = OracleSession(w, seed=9)
    rng = np.random.default_rng(1)
    shadow = []
    for _ in range(200):
        kind = int(rng.integers(4))
        u = int(rng.integers(40))
        if kind == 0:
            ses.retrieval_query(u)
            shadow.append("retrieval")
        elif kind == 1:
            ses.memory_retrieval_query(u)
            shadow.append("memory")
        elif kind == 2:
            ses.cci_query(u)
            shadow.append("cci")
        else:
            v = int(rng.integers(40))
            if v != u:
                ses.verify_edge(u, v)
                shadow.append("verify")
    st = ses.session_stats()
    assert st.retrieval_queries == shadow.count("retrieval") + shadow.count("memory")
    assert st.cci_queries == shadow.count("cci")
    assert st.verify_queries == shadow.count("verify")
    assert len(ses.trace) == len(shadow)


def test_trace_lines_format():
    w = make_world(3, [(0, 1)], [])
    ses = OracleSession(w, seed=1)
    ses.retrieval_query(0)
    ses.verify_edge(0, 2)
    lines = ses.trace_lines()
    assert lines[0] == "retrieval 0 0-1"
    assert lines[1] == "verify 0-2 no"


def test_grounding_revealed_subset_of_truth():
    w = gen_er_world(ErPriorParams(n=60, p=0.2, eta=0.3, seed=5))
    ses = OracleSession(w, seed=2)
    rng = np.random.default_rng(4)
    for _ in range(300):
        u = int(rng.integers(60))
        if rng.random() < 0.5:
            ses.retrieval_query(u)
        else:
            ses.cci_query(u)
    revealed, _ = observed_edge_sets(ses)
    for e in revealed:
        assert w.truth.has_edge(*e)


def test_determinism_same_seed_same_answers():
    w = gen_er_world(ErPriorParams(n=50, p=0.3, eta=0.4, seed=6))
    seq = [(kind, v) for kind, v in zip([0, 1, 0, 2, 1, 0] * 10, range(60))]

    def run():
        ses = OracleSession(w, seed=42)
        out = []
        for kind, v in seq:
            v = v % 50
            if kind == 0:
                out.append(ses.retrieval_query(v))
            elif kind == 1:
                out.append(ses.memory_retrieval_query(v))
            else:
                out.append(ses.cci_query(v))
        return out

    assert run() == run()
