"""Admissibility measurement, the giant-component fixed point, and scaling fits.

The admissibility figure gamma-hat asks: is there one prior component
that every vertex's truth neighborhood hits with probability at least
gamma, under uniform neighbor sampling?  It is computed exactly from the
ratio form |N(u) ∩ C| / |N(u)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, connected_components
from .worlds import WorldPair, color_edges


@dataclass
class AdmissibilityReport:
    """Best-component admissibility: the max over components of the min vertex ratio."""

    gamma_hat: float
    witness_component: int | None
    argmin_vertex: int | None
    per_component_gammas: dict[int, float]


@dataclass
class RobustAdmissibilityReport:
    overall_gamma: float
    per_color: list[AdmissibilityReport]


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float


def admissibility_gamma(pair: WorldPair) -> AdmissibilityReport:
    """Exact admissibility of a reliable world pair.

    Only components visible from every non-isolated vertex can score above
    zero, so a one-pass visibility filter prunes the per-component work;
    the result equals the exhaustive double loop over (component, vertex).
    """
    if not pair.prior_reliable:
        raise ValueError("admissibility is defined for reliable priors only")
    n = pair.n
    labeling = connected_components(pair.prior)
    comp_ids = labeling.component_ids()
    e = pair.truth.edges_array
    deg = np.zeros(n, dtype=np.int64)
    if e.shape[0]:
        deg += np.bincount(e[:, 0], minlength=n)
        deg += np.bincount(e[:, 1], minlength=n)
    active = deg > 0
    n_active = int(active.sum())
    per_comp = {c: 0.0 for c in comp_ids}
    if n_active == 0:
        # no vertex has truth neighbors: the ratio condition is vacuous
        witness = labeling.largest_component() if comp_ids else None
        if witness is not None:
            per_comp[witness] = 1.0
        return AdmissibilityReport(1.0, witness, None, per_comp)
    if e.shape[0] == 0:
        return AdmissibilityReport(0.0, None, None, per_comp)

    labels = labeling.labels
    # visibility: component c qualifies only if every active vertex has a
    # neighbor inside c; count distinct (vertex, neighbor-component) pairs
    a = np.concatenate([e[:, 0], e[:, 1]])
    b = np.concatenate([labels[e[:, 1]], labels[e[:, 0]]])
    pair_keys = np.unique(a.astype(np.int64) * n + b.astype(np.int64))
    seen_comp = (pair_keys % n).astype(np.int64)
    visible_count = np.bincount(seen_comp, minlength=n)
    candidates = [c for c in comp_ids if visible_count[c] == n_active]

    best_gamma, best_comp, best_vertex = 0.0, None, None
    for c in candidates:
        in_c = labels == c
        cnt = np.bincount(e[:, 0], weights=in_c[e[:, 1]].astype(np.float64), minlength=n)
        cnt += np.bincount(e[:, 1], weights=in_c[e[:, 0]].astype(np.float64), minlength=n)
        ratios = cnt[active] / deg[active]
        i = int(np.argmin(ratios))
        gamma_c = float(ratios[i])
        per_comp[c] = gamma_c
        if gamma_c > best_gamma or (gamma_c == best_gamma and best_comp is None):
            best_gamma = gamma_c
            best_comp = c
            best_vertex = int(np.flatnonzero(active)[i])
    if best_comp is None:
        # every component misses some vertex entirely; report the largest
        best_comp = labeling.largest_component()
        uncovered = ~(np.bincount(
            np.concatenate([e[:, 0][labels[e[:, 1]] == best_comp],
                            e[:, 1][labels[e[:, 0]] == best_comp]]),
            minlength=n) > 0)
        missing = np.flatnonzero(active & uncovered)
        best_vertex = int(missing[0]) if missing.size else None
    return AdmissibilityReport(best_gamma, best_comp, best_vertex, per_comp)


def robust_admissibility_check(pair: WorldPair, K: int, coloring_seed) -> RobustAdmissibilityReport:
    """Admissibility of every color class under a uniform K-coloring of the prior.

    Uses the same coloring scheme as the robust route builder; the overall
    figure is the minimum per-color gamma-hat.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not pair.prior_reliable:
        raise ValueError("robust admissibility is defined for reliable priors only")
    pe = pair.prior.edges_array
    colors = color_edges(pe, K, coloring_seed)
    reports = []
    for k in range(K):
        sub = WorldPair(pair.truth, Graph(pair.n, pe[colors == k]),
                        {"family": "color-slice", "k": k}, prior_reliable=True)
        reports.append(admissibility_gamma(sub))
    overall = min(r.gamma_hat for r in reports)
    return RobustAdmissibilityReport(overall, reports)


def gamma_fixed_point(c: float, tol: float = 1e-12) -> float:
    """Unique positive solution of gamma = 1 - exp(-c * gamma), or 0 at c <= 1.

    Bisection on f(g) = g + expm1(-c g); expm1 keeps the bracket sign
    honest near zero, and bisection needs no derivative behavior at the
    critical point.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    if c <= 1.0:
        return 0.0

    def f(g: float) -> float:
        return g + math.expm1(-c * g)

    lo, hi = 1e-16, 1.0
    if f(lo) >= 0.0:
        # extremely near-critical c: the positive root is below float resolution
        return 0.0
    while hi - lo > tol / 10.0:
        mid = (lo + hi) / 2.0
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def k_birthday_sim(m: int, n: int, K: int, trials: int, seed) -> float:
    """Fraction of trials in which >= K bins receive at least two of m balls.

    Per-trial streams are split from the seed so that increasing m extends
    each trial's throw sequence, making the count monotone per trial under
    common random numbers.
    """
    if m < 1 or n < 1 or trials < 1:
        raise ValueError("m, n and trials must be positive")
    if K < 1:
        raise ValueError("K must be >= 1")
    hits = 0
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), trial)))
        balls = np.sort(rng.integers(0, n, size=m))
        dup = balls[1:] == balls[:-1]
        if m >= 2:
            first_dup = dup & np.concatenate(([True], ~dup[:-1]))
            collided = int(first_dup.sum())
        else:
            collided = 0
        if collided >= K:
            hits += 1
    return hits / trials


def fit_scaling(points) -> ScalingFit:
    """Least-squares slope on log-log axes; the exponent of a power law."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise ValueError("need at least three points")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("all coordinates must be positive")
    lx = np.log(np.array([x for x, _ in pts]))
    ly = np.log(np.array([y for _, y in pts]))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return ScalingFit(float(slope), float(intercept), float(r2))


def double_star_success_curve(n: int, q: int) -> float:
    """Probability of exposing the hidden bridge within q one-sided probes.

    Scanning distinct leaves of one star with a memory oracle succeeds with
    probability q / (n/2 - 1); this is the analytic overlay for the
    double-star sweep.
    """
    if n % 2 != 0 or n < 6:
        raise ValueError("double star needs an even n >= 6")
    leaves = n // 2 - 1
    if not (0 <= q <= leaves):
        raise ValueError(f"q must lie in [0, {leaves}]")
    return q / leaves
