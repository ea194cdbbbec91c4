"""Independent oracles the tests check the engine against.

Everything here is written from the definitions alone, in the most
direct form available: double loops instead of vectorized searches,
exact offline dynamic programming instead of online recursion,
exhaustive enumeration instead of heuristics. Slow on purpose; shared
code with the engine would make the comparisons circular.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

# ---------------------------------------------------------------------------
# Change-point relevance (nearest-point distance, symmetrized score, ranking)


def brute_directed_distance(source, target) -> float:
    """Sum over source points of the gap to the nearest target point.

    Equidistant neighbors resolve to the earlier target point, which
    never changes the distance but documents the tie rule.
    """
    total = 0.0
    for x in source:
        best = None
        for y in sorted(target):
            d = abs(float(x) - float(y))
            if best is None or d < best:
                best = d
        total += best
    return total


def brute_relevance(first, second, window_len: int) -> float:
    s1, s2 = list(first), list(second)
    if not s1 or not s2:
        return 0.0
    forward = brute_directed_distance(s1, s2) / len(s1)
    backward = brute_directed_distance(s2, s1) / len(s2)
    return 1.0 - (forward + backward) / (2.0 * window_len)


def brute_rank(baseline, candidates, window_len: int, k: int):
    """Top-k (clue id, score) pairs: score descending, id ascending."""
    scored = [(cid, brute_relevance(baseline, arr, window_len)) for cid, arr in candidates]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


# ---------------------------------------------------------------------------
# Offline exact Bayesian segmentation (test-only reference model)
#
# Same generative model as the online detector: per-segment Gaussian
# with unknown mean and variance under a Normal-Inverse-Gamma prior, a
# constant hazard over segment continuation, data standardized over the
# window. The maximum a posteriori segmentation is found by dynamic
# programming over all O(n^2) segment boundaries, so there is no online
# approximation to inherit.


def _student_t_logpdf(x: float, df: float, loc: float, scale: float) -> float:
    z = (x - loc) / scale
    return (
        math.lgamma((df + 1.0) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
        - math.log(scale)
        - ((df + 1.0) / 2.0) * math.log1p(z * z / df)
    )


def _segment_loglik_table(x: np.ndarray, mu0: float, kappa0: float, alpha0: float, beta0: float):
    """loglik[i][j] = log marginal likelihood of x[i:j] as one segment.

    The marginal factorizes over one-step Student-t predictives under
    sequential conjugate updates (chain rule), so each row is built by
    one left-to-right pass.
    """
    n = len(x)
    table = np.full((n, n + 1), -np.inf)
    for i in range(n):
        mu, kappa, alpha, beta = mu0, kappa0, alpha0, beta0
        acc = 0.0
        for j in range(i, n):
            scale = math.sqrt(beta * (kappa + 1.0) / (alpha * kappa))
            acc += _student_t_logpdf(float(x[j]), 2.0 * alpha, mu, scale)
            table[i][j + 1] = acc
            kappa_n = kappa + 1.0
            mu_n = (kappa * mu + x[j]) / kappa_n
            beta += 0.5 * kappa * (x[j] - mu) ** 2 / kappa_n
            mu, kappa = mu_n, kappa_n
            alpha += 0.5
    return table


def offline_map_segmentation(
    values,
    hazard: float = 0.01,
    mu0: float = 0.0,
    kappa0: float = 1.0,
    alpha0: float = 1.0,
    beta0: float = 1.0,
) -> list[int]:
    """Sample indices where the MAP segmentation starts a new segment.

    The prior over segmentations is the run-length process the online
    detector assumes: each within-segment step continues with
    probability 1-hazard, each boundary costs hazard.
    """
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    if n < 2:
        return []
    std = float(np.std(x))
    if std == 0.0:
        return []
    x = (x - float(np.mean(x))) / std
    loglik = _segment_loglik_table(x, mu0, kappa0, alpha0, beta0)
    log_h = math.log(hazard)
    log_c = math.log1p(-hazard)
    best = np.full(n + 1, -np.inf)
    best[0] = 0.0
    back = np.zeros(n + 1, dtype=np.int64)
    for j in range(1, n + 1):
        for i in range(j):
            cand = best[i] + loglik[i][j] + (j - i - 1) * log_c + (log_h if i > 0 else 0.0)
            if cand > best[j]:
                best[j] = cand
                back[j] = i
    cuts = []
    j = n
    while j > 0:
        i = int(back[j])
        if i > 0:
            cuts.append(i)
        j = i
    return sorted(cuts)


# ---------------------------------------------------------------------------
# Event boundaries and pooled points


def event_boundaries(intervals, window_start: int, window_end: int) -> list[int]:
    """Label-change timestamps of a labelled interval sequence.

    Junctions between touching intervals count when the labels differ;
    a gap reports both of its edges; leading/trailing uncovered spans
    report the first start and last end. Only points strictly inside
    the window qualify.
    """
    ivs = sorted((int(s), int(e), lab) for s, e, lab in intervals)
    points = set()
    for (s1, e1, l1), (s2, e2, l2) in zip(ivs, ivs[1:]):
        if e1 == s2:
            if l1 != l2:
                points.add(s2)
        else:
            points.add(e1)
            points.add(s2)
    if ivs:
        if ivs[0][0] > window_start:
            points.add(ivs[0][0])
        if ivs[-1][1] < window_end:
            points.add(ivs[-1][1])
    return sorted(p for p in points if window_start < p < window_end)


def brute_pool(arrays, tolerance: int) -> list[int]:
    """Union of points, merging runs within tolerance into the earliest."""
    points = sorted({int(p) for arr in arrays for p in arr})
    merged: list[int] = []
    for p in points:
        if merged and p - merged[-1] <= tolerance:
            continue
        merged.append(p)
    return merged


# ---------------------------------------------------------------------------
# Exhaustive directional expansion
#
# Walks the knowledge graph by definition: breadth-first closure of the
# direction's relation kind over the store topology, then every
# attribute of every reached instance is scored and ranked. No budget,
# no priority order, no cache.


def exhaustive_expansion(store, graph, clue, direction, window, k=5, exclude=()):
    from caseboard.changepoint import changepoints_for_clue, sample_offsets
    from caseboard.graph import Direction
    from caseboard.relevance import relevance
    from caseboard.store import Clue, SeriesKey, fill_template

    direction = Direction(direction)
    window_len = window.sample_count(store.step)

    def offsets(key):
        from caseboard.errors import NotFoundError

        try:
            cpa = changepoints_for_clue(store, Clue(key, window))
        except NotFoundError:
            return None
        return sample_offsets(cpa, window, store.step)

    baseline = offsets(clue.key)
    candidates: list[tuple[str, SeriesKey]] = []

    if direction is Direction.IN:
        concept = graph.concept(clue.key.concept)
        skip = set(exclude) | {clue.key.attribute}
        for attr in concept.attributes:
            if attr.id in skip:
                continue
            key = SeriesKey(clue.key.concept, clue.key.instance, attr.id)
            candidates.append((key.clue_id, key))
    elif direction is Direction.LEFT:
        containment = store.containment_of(clue.key.concept, clue.key.instance)
        if containment is not None:
            _, _, parent = containment
            for sib in store.list_instances(clue.key.concept, parent=parent):
                if sib == clue.key.instance:
                    continue
                key = SeriesKey(clue.key.concept, sib, clue.key.attribute, clue.key.filter)
                candidates.append((key.clue_id, key))
    else:
        from caseboard.errors import NotFoundError
        from caseboard.graph import neighbors

        seen = {(clue.key.concept, clue.key.instance)}
        frontier = [(clue.key.concept, clue.key.instance)]
        reached: list[tuple[str, str]] = []
        while frontier:
            concept_id, instance = frontier.pop(0)
            for rel, nconcept in neighbors(graph, concept_id, direction):
                try:
                    related = store.execute(fill_template(rel.traversal_query, instance=instance))
                except NotFoundError:
                    continue
                for nxt in related:
                    if (nconcept.id, nxt) in seen:
                        continue
                    seen.add((nconcept.id, nxt))
                    reached.append((nconcept.id, nxt))
                    frontier.append((nconcept.id, nxt))
        for concept_id, instance in reached:
            for attr in graph.concept(concept_id).attributes:
                key = SeriesKey(concept_id, instance, attr.id)
                candidates.append((key.clue_id, key))

    scored = []
    for cid, key in candidates:
        pts = offsets(key)
        if pts is None:
            continue
        scored.append((cid, relevance(baseline, pts, window_len)))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


# ---------------------------------------------------------------------------
# Exhaustive refinement
#
# Enumerates every predicate (one non-empty option subset per filter),
# evaluates each with the supplied function, and keeps the best under
# the maximize/minimize objective with ties to the lexicographically
# smallest canonical state.


def all_states(selection):
    per_filter = [
        [
            tuple(sorted(chosen))
            for r in range(1, len(fdef.options) + 1)
            for chosen in itertools.combinations(fdef.options, r)
        ]
        for fdef in selection
    ]
    return list(itertools.product(*per_filter))


def exhaustive_refine(selection, evaluate, objective):
    """(best value, best state) or (None, None) when nothing is feasible."""
    sign = 1.0 if objective == "maximize" else -1.0
    best_v = -math.inf
    best_state = None
    for state in all_states(selection):
        raw = evaluate(state)
        v = sign * raw if math.isfinite(raw) else -math.inf
        if v == -math.inf:
            continue
        if v > best_v or (v == best_v and state < best_state):
            best_v, best_state = v, state
    if best_state is None:
        return None, None
    return sign * best_v, best_state


def brute_trend(values) -> float:
    """Least-squares slope over sample index divided by (std + 1e-9)."""
    y = [float(v) for v in values]
    n = len(y)
    if n < 2:
        return 0.0
    xbar = (n - 1) / 2.0
    ybar = sum(y) / n
    num = sum((i - xbar) * (v - ybar) for i, v in enumerate(y))
    den = sum((i - xbar) ** 2 for i in range(n))
    slope = num / den
    var = sum((v - ybar) ** 2 for v in y) / n
    return slope / (math.sqrt(var) + 1e-9)


# ---------------------------------------------------------------------------
# Geometry


def boxes_overlap(a, b) -> bool:
    """Strict interior intersection of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def any_overlap(boxes) -> bool:
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            if boxes_overlap(boxes[i], boxes[j]):
                return True
    return False
