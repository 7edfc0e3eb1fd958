"""Reproducible experiment harness: worlds in, trial records and sweeps out.

Every trial's randomness derives from (root seed, experiment, n, trial,
role) through a SHA-256 based 64-bit mix, so records are stable when the
grid grows and independent across workers.  The CSV schema is fixed:
``experiment,n,trial,seed,status,retrieval_q,cci_q,verify_q,visited,wall_ms``
with rows ordered by (n, trial).  Wall times are written as 0 unless
timing is requested, keeping default output byte-identical across runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from multiprocessing import Pool

import numpy as np

from . import analysis, search, worlds
from .oracles import OracleSession

CSV_HEADER = ["experiment", "n", "trial", "seed", "status",
              "retrieval_q", "cci_q", "verify_q", "visited", "wall_ms"]

EXPERIMENT_NAMES = ("birag-admissible", "double-star", "birthday", "cci-budget",
                    "robust-k", "steiner", "verify", "double-bfs", "k-birthday")

# primary per-trial metric used for aggregation and scaling fits
METRIC_COLUMN = {
    "birag-admissible": "retrieval_q",
    "double-star": "retrieval_q",
    "birthday": "retrieval_q",
    "cci-budget": "cci_q",
    "robust-k": "retrieval_q",
    "steiner": "retrieval_q",
    "verify": "verify_q",
    "double-bfs": "visited",
    "k-birthday": "visited",
}


def derive_seed(root_seed: int, experiment: str, n: int, trial: int, role: str = "") -> int:
    """Stable 64-bit seed mixed from the run coordinates."""
    text = f"{root_seed}|{experiment}|{n}|{trial}|{role}"
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class ExperimentConfig:
    experiment: str
    n_grid: list[int]
    trials: int
    seed: int
    params: dict = field(default_factory=dict)
    budget: int | None = None
    timing: bool = False
    workers: int = 1

    def validate(self) -> None:
        if self.experiment not in EXPERIMENT_NAMES:
            raise ValueError(f"experiment: unknown name {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials: must be >= 1")
        if not self.n_grid:
            raise ValueError("n_grid: must be nonempty")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid: must be strictly increasing")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget: must be >= 1 when given")
        if self.workers < 1:
            raise ValueError("workers: must be >= 1")


@dataclass
class TrialRecord:
    experiment: str
    n: int
    trial: int
    seed: int
    status: str
    retrieval_q: int
    cci_q: int
    verify_q: int
    visited: int
    wall_ms: int


@dataclass
class SweepAggregate:
    n: int
    trials: int
    success_rate: float
    mean_q: float
    median_q: float
    q90_q: float
    se_mean: float


@dataclass
class SweepResult:
    config: dict
    per_n: list[SweepAggregate]
    fit: analysis.ScalingFit | None
    grounding_violations: int

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "per_n": [asdict(a) for a in self.per_n],
            "fit": None if self.fit is None else asdict(self.fit),
            "grounding_violations": self.grounding_violations,
        }


def _pick_distinct(rng: np.random.Generator, n: int, count: int = 2) -> list[int]:
    return [int(v) for v in rng.choice(n, size=count, replace=False)]


def _audit(outcome, session, world) -> int:
    if outcome.status != search.FOUND:
        return 0
    bad = search.grounding_violations(outcome, session)
    if not search.validate_outcome(outcome, world):
        bad = bad + [("output", "invalid against truth")]
    return len(bad)


def _birag_budget(world, override: int | None) -> int:
    if override is not None:
        return override
    gamma = analysis.admissibility_gamma(world).gamma_hat
    if gamma > 0.0:
        return 50 * math.ceil(1.0 / gamma)
    return 10 * world.n


def _run_birag(n, trial, root, params, budget):
    p = params.get("p", min(1.0, 10.0 * math.log(n) / n))
    eta = params.get("eta", 0.5)
    world = worlds.gen_er_world(worlds.ErPriorParams(
        n=n, p=p, eta=eta, seed=derive_seed(root, "birag-admissible", n, trial, "world")))
    pick = np.random.default_rng(derive_seed(root, "birag-admissible", n, trial, "pick"))
    s, t = _pick_distinct(pick, n)
    session = OracleSession(world, derive_seed(root, "birag-admissible", n, trial, "session"))
    outcome = search.birag(session, s, t, _birag_budget(world, budget))
    return outcome, session, world, 0


def _run_steiner(n, trial, root, params, budget):
    p = params.get("p", min(1.0, 10.0 * math.log(n) / n))
    eta = params.get("eta", 0.5)
    m_terms = int(params.get("terminals", 5))
    world = worlds.gen_er_world(worlds.ErPriorParams(
        n=n, p=p, eta=eta, seed=derive_seed(root, "steiner", n, trial, "world")))
    pick = np.random.default_rng(derive_seed(root, "steiner", n, trial, "pick"))
    terminals = _pick_distinct(pick, n, m_terms)
    session = OracleSession(world, derive_seed(root, "steiner", n, trial, "session"))
    outcome = search.steiner_connect(session, terminals, _birag_budget(world, budget))
    return outcome, session, world, 0


def _run_double_star(n, trial, root, params, budget):
    world = worlds.gen_double_star(worlds.DoubleStarParams(
        n=n, seed=derive_seed(root, "double-star", n, trial, "world")))
    session = OracleSession(world, derive_seed(root, "double-star", n, trial, "session"))
    pick = np.random.default_rng(derive_seed(root, "double-star", n, trial, "pick"))
    h = n // 2
    s = int(pick.integers(0, h))
    t = int(pick.integers(h, n))
    outcome = scan_for_bridge(session, s, t, budget)
    return outcome, session, world, 0


def scan_for_bridge(session: OracleSession, s: int, t: int,
                    budget: int | None = None) -> search.SearchOutcome:
    """Probe the leaves on s's side of a double star with the memory oracle.

    The prior shows two stars; the only unseen edge incident to a leaf is
    the hidden bridge, so leaves are probed once each in random order until
    one answers.  This is the optimal one-sided strategy for the family.
    """
    prior = session.prior
    n = prior.n
    h = n // 2
    side = range(0, h) if s < h else range(h, n)
    # the star center is identifiable from the prior alone by its degree
    degrees = [prior.degree(v) for v in side]
    center_vertex = side[int(np.argmax(degrees))]
    candidates = [v for v in side if v != center_vertex]
    order = [int(v) for v in session.rng.permutation(candidates)]
    limit = budget if budget is not None else len(order)
    for i, leaf in enumerate(order[:limit]):
        ans = session.memory_retrieval_query(leaf)
        if ans is None:
            continue
        bridge = ans
        extra = {}
        search._add_extra(extra, *bridge)
        path = search._augmented_bfs(prior, extra, s, t)
        return search.SearchOutcome(
            search.FOUND, path=path, provenance=search._tag_path(path, prior),
            queries=session.session_stats(), meta={"scan_position": i + 1})
    return search.SearchOutcome(search.BUDGET_EXHAUSTED, queries=session.session_stats())


def _run_birthday(n, trial, root, params, budget):
    world = worlds.gen_complete_empty(n)
    session = OracleSession(world, derive_seed(root, "birthday", n, trial, "session"))
    pick = np.random.default_rng(derive_seed(root, "birthday", n, trial, "pick"))
    s, t = _pick_distinct(pick, n)
    outcome = search.grounded_bidirectional_probe(session, s, t,
                                                  budget if budget is not None else 10 * n)
    return outcome, session, world, 0


def cci_budget_default(n: int, p: float) -> int:
    """Component-incidence query allowance: the hardness threshold 1/(p ln^2 n sqrt(n)).

    At desk scales the threshold is below one query, so it is clamped to a
    single call; success then measures the one-neighborhood meeting
    probability, which decays with n.
    """
    return max(1, int(1.0 / (p * math.log(n) ** 2 * math.sqrt(n))))


def _run_cci(n, trial, root, params, budget):
    p = params.get("p", min(1.0, 1.5 * math.log(n) / n))
    subcritical = params.get("prior_mean_degree", 0.5)  # keeps p*eta < 1/n
    eta = min(1.0, subcritical / (p * n))
    world = worlds.gen_er_world(worlds.ErPriorParams(
        n=n, p=p, eta=eta, seed=derive_seed(root, "cci-budget", n, trial, "world")))
    pick = np.random.default_rng(derive_seed(root, "cci-budget", n, trial, "pick"))
    s, t = _pick_distinct(pick, n)
    session = OracleSession(world, derive_seed(root, "cci-budget", n, trial, "session"))
    outcome = search.budgeted_cci_search(
        session, s, t, budget if budget is not None else cci_budget_default(n, p))
    return outcome, session, world, 0


def _run_robust(n, trial, root, params, budget):
    K = int(params.get("K", 2))
    eta = params.get("eta", 0.35)
    per_color_c = params.get("per_color_c", 2.5)
    p = min(1.0, K * per_color_c / (eta * n))
    world = worlds.gen_er_world(worlds.ErPriorParams(
        n=n, p=p, eta=eta, seed=derive_seed(root, "robust-k", n, trial, "world")))
    pick = np.random.default_rng(derive_seed(root, "robust-k", n, trial, "pick"))
    s, t = _pick_distinct(pick, n)
    session = OracleSession(world, derive_seed(root, "robust-k", n, trial, "session"))
    outcome = search.robust_k_routes(
        session, s, t, K, derive_seed(root, "robust-k", n, trial, "coloring"),
        budget if budget is not None else 50 * K)
    return outcome, session, world, 0


def _run_verify(n, trial, root, params, budget):
    p = params.get("p", min(1.0, 25.0 / n))
    eta = params.get("eta", 0.7)
    r = params.get("r", 0.8)
    c = int(params.get("c", 3))
    world = worlds.gen_noisy_prior(worlds.NoisyPriorParams(
        n=n, p=p, eta=eta, r=r, seed=derive_seed(root, "verify", n, trial, "world")))
    pick = np.random.default_rng(derive_seed(root, "verify", n, trial, "pick"))
    s, t = _pick_distinct(pick, n)
    session = OracleSession(world, derive_seed(root, "verify", n, trial, "session"))
    outcome = search.generate_then_verify(
        session, s, t, c, budget if budget is not None else 10000)
    return outcome, session, world, 0


def _run_double_bfs(n, trial, root, params, budget):
    scale = params.get("log4_scale", 0.01)
    p = min(1.0, scale * math.log(n) ** 4 / n)
    truth = worlds.gen_er(n, p, derive_seed(root, "double-bfs", n, trial, "world"))
    pick = np.random.default_rng(derive_seed(root, "double-bfs", n, trial, "pick"))
    s, t = _pick_distinct(pick, n)
    path, visited = search.double_bfs(truth, s, t)
    status = search.FOUND if path is not None else search.NO
    outcome = search.SearchOutcome(status, path=path)
    return outcome, None, None, visited


def _run_k_birthday(n, trial, root, params, budget):
    K = int(params.get("K", 10))
    m = int(params.get("m", math.floor(0.3 * math.sqrt(K * n))))
    rng = np.random.default_rng(np.random.SeedSequence(
        entropy=(derive_seed(root, "k-birthday", n, trial, "balls"), 0)))
    balls = np.sort(rng.integers(0, n, size=m))
    if m >= 2:
        dup = balls[1:] == balls[:-1]
        collided = int((dup & np.concatenate(([True], ~dup[:-1]))).sum())
    else:
        collided = 0
    status = search.FOUND if collided >= K else search.NO
    outcome = search.SearchOutcome(status)
    return outcome, None, None, collided


_RUNNERS = {
    "birag-admissible": _run_birag,
    "double-star": _run_double_star,
    "birthday": _run_birthday,
    "cci-budget": _run_cci,
    "robust-k": _run_robust,
    "steiner": _run_steiner,
    "verify": _run_verify,
    "double-bfs": _run_double_bfs,
    "k-birthday": _run_k_birthday,
}


def _trial_worker(args) -> tuple[TrialRecord, int]:
    experiment, n, trial, root, params, budget, timing = args
    start = time.perf_counter()
    outcome, session, world, visited = _RUNNERS[experiment](n, trial, root, params, budget)
    wall = int(round((time.perf_counter() - start) * 1000)) if timing else 0
    stats = outcome.queries
    violations = _audit(outcome, session, world) if session is not None else 0
    record = TrialRecord(
        experiment=experiment, n=n, trial=trial,
        seed=derive_seed(root, experiment, n, trial),
        status=outcome.status,
        retrieval_q=stats.retrieval_queries if stats else 0,
        cci_q=stats.cci_queries if stats else 0,
        verify_q=stats.verify_queries if stats else 0,
        visited=int(visited),
        wall_ms=wall,
    )
    return record, violations


def run_experiment(config: ExperimentConfig) -> tuple[SweepResult, list[TrialRecord]]:
    """Run trials over the grid, aggregate per n, and fit the scaling exponent."""
    config.validate()
    tasks = [(config.experiment, n, trial, config.seed, config.params,
              config.budget, config.timing)
             for n in config.n_grid for trial in range(config.trials)]
    workers = config.workers
    if workers == 1:
        results = [_trial_worker(t) for t in tasks]
    else:
        with Pool(processes=workers) as pool:
            results = pool.map(_trial_worker, tasks, chunksize=8)
    records = [r for r, _ in results]
    violations = sum(v for _, v in results)
    records.sort(key=lambda r: (r.n, r.trial))

    metric = METRIC_COLUMN[config.experiment]
    per_n: list[SweepAggregate] = []
    for n in config.n_grid:
        rows = [r for r in records if r.n == n]
        values = np.array([getattr(r, metric) for r in rows], dtype=np.float64)
        successes = sum(1 for r in rows if r.status == search.FOUND)
        se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
        agg = SweepAggregate(
            n=n, trials=len(rows),
            success_rate=successes / len(rows),
            mean_q=float(values.mean()),
            median_q=float(np.median(values)),
            q90_q=float(np.quantile(values, 0.9)),
            se_mean=se,
        )
        per_n.append(agg)
        print(f"[{config.experiment}] n={n} trials={len(rows)} "
              f"mean_{metric}={agg.mean_q:.3f} se={se:.3f} success={agg.success_rate:.3f}")
    fit = None
    if len(per_n) >= 3 and all(a.mean_q > 0 for a in per_n):
        fit = analysis.fit_scaling([(a.n, a.mean_q) for a in per_n])
    result = SweepResult(
        config={"experiment": config.experiment, "n_grid": list(config.n_grid),
                "trials": config.trials, "seed": config.seed,
                "params": dict(config.params), "budget": config.budget},
        per_n=per_n, fit=fit, grounding_violations=violations,
    )
    return result, records


def write_records_csv(records: list[TrialRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in sorted(records, key=lambda r: (r.n, r.trial)):
            writer.writerow([r.experiment, r.n, r.trial, r.seed, r.status,
                             r.retrieval_q, r.cci_q, r.verify_q, r.visited, r.wall_ms])


def read_records_csv(path) -> list[TrialRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for row in reader:
            records.append(TrialRecord(
                experiment=row["experiment"], n=int(row["n"]), trial=int(row["trial"]),
                seed=int(row["seed"]), status=row["status"],
                retrieval_q=int(row["retrieval_q"]), cci_q=int(row["cci_q"]),
                verify_q=int(row["verify_q"]), visited=int(row["visited"]),
                wall_ms=int(row["wall_ms"])))
    return records


def write_sweep_json(result: SweepResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(result.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_workers() -> int:
    return max(1, int(os.environ.get("ORACLEPATH_WORKERS", "1")))
