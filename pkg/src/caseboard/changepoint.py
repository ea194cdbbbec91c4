"""Change-point detection over series and event sequences.

Numeric series go through Bayesian online change-point detection with a
constant hazard and a Normal-Inverse-Gamma conjugate model (unknown mean
and variance), so the one-step predictive is Student-t. The recursion
runs in log space over the run-length distribution; negligible tail mass
is truncated to keep each step cheap.

Series are standardized to zero mean and unit variance inside the
analysis window before detection, which makes reported locations
invariant to positive rescaling and to constant shifts of the signal.

Event sequences report the timestamps where the active label changes;
a gap between intervals reports both of its boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import InvalidArgumentError
from .graph import DataKind
from .store import ClueData, EventSequenceData, TimeSeriesData
from .windows import TimeWindow


@dataclass(frozen=True)
class ChangePointArray:
    """Strictly increasing timestamps (epoch seconds) inside one window."""

    points: tuple[int, ...] = ()

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points)
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise InvalidArgumentError("change points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64)

    def to_json(self) -> list[int]:
        return list(self.points)


@dataclass(frozen=True)
class DetectorConfig:
    """Detector knobs. Priors live on the standardized scale.

    ``hazard`` is the constant per-sample change probability. A change is
    reported when the posterior mass of run lengths ``0..min_gap`` crosses
    above ``threshold``; reports are then suppressed for ``min_gap``
    samples. ``trunc`` drops run lengths once their tail mass falls below
    it.
    """

    hazard: float = 1.0 / 100.0
    threshold: float = 0.5
    min_gap: int = 3
    mu0: float = 0.0
    kappa0: float = 1.0
    alpha0: float = 1.0
    beta0: float = 1.0
    trunc: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.hazard < 1.0:
            raise InvalidArgumentError("hazard must lie in (0, 1)")
        if not 0.0 < self.threshold < 1.0:
            raise InvalidArgumentError("threshold must lie in (0, 1)")
        if self.min_gap < 1:
            raise InvalidArgumentError("min_gap must be at least 1")


def _student_t_logpdf(x: float, mu, kappa, alpha, beta) -> np.ndarray:
    """Posterior predictive log density under the NIG model, vectorized
    over one array of run-length hypotheses."""
    df = 2.0 * alpha
    scale2 = beta * (kappa + 1.0) / (alpha * kappa)
    z2 = (x - mu) ** 2 / (df * scale2)
    return (
        gammaln((df + 1.0) / 2.0)
        - gammaln(df / 2.0)
        - 0.5 * np.log(df * math.pi * scale2)
        - (df + 1.0) / 2.0 * np.log1p(z2)
    )


def _log_sum_exp(arr: np.ndarray) -> float:
    m = float(arr.max())
    if m == -math.inf:
        return m
    return m + math.log(float(np.exp(arr - m).sum()))


def run_length_low_mass(values: np.ndarray, config: DetectorConfig) -> np.ndarray:
    """Posterior mass of run lengths ``0..min_gap`` after each observation.

    ``values`` must already be standardized. This is the detector's raw
    evidence trace; the report rule sits on top of it.
    """
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    out = np.ones(n)
    if n == 0:
        return out
    log_h = math.log(config.hazard)
    log_1mh = math.log1p(-config.hazard)
    # Per-run-length ladders; kappa and alpha depend only on the run
    # length, so the gamma-function terms can be computed once.
    r = np.arange(n + 1, dtype=np.float64)
    kappa_r = config.kappa0 + r
    alpha_r = config.alpha0 + 0.5 * r
    df_r = 2.0 * alpha_r
    scale_factor = (kappa_r + 1.0) / (alpha_r * kappa_r)
    lconst_r = gammaln((df_r + 1.0) / 2.0) - gammaln(df_r / 2.0) - 0.5 * np.log(df_r * math.pi)
    half_dfp1 = (df_r + 1.0) / 2.0

    log_msg = np.array([0.0])
    mu = np.array([config.mu0])
    beta = np.array([config.beta0])
    scratch_mu = np.empty(n + 1)
    scratch_beta = np.empty(n + 1)
    for t in range(n):
        m = len(log_msg)
        scale2 = beta * scale_factor[:m]
        z2 = (x[t] - mu) ** 2 / (df_r[:m] * scale2)
        logpred = lconst_r[:m] - 0.5 * np.log(scale2) - half_dfp1[:m] * np.log1p(z2)
        joint = log_msg + logpred
        new_msg = np.empty(m + 1)
        new_msg[0] = _log_sum_exp(joint) + log_h
        np.add(joint, log_1mh, out=new_msg[1:])
        log_post = new_msg - _log_sum_exp(new_msg)
        upto = min(config.min_gap, m)
        out[t] = math.exp(_log_sum_exp(log_post[: upto + 1]))
        scratch_mu[0] = config.mu0
        scratch_mu[1 : m + 1] = (kappa_r[:m] * mu + x[t]) / (kappa_r[:m] + 1.0)
        scratch_beta[0] = config.beta0
        scratch_beta[1 : m + 1] = beta + kappa_r[:m] * (x[t] - mu) ** 2 / (2.0 * (kappa_r[:m] + 1.0))
        post = np.exp(log_post)
        tail = np.cumsum(post[::-1])[::-1]
        keep = np.nonzero(tail >= config.trunc)[0]
        last = int(keep[-1]) + 1 if len(keep) else 1
        log_msg = log_post[:last]
        mu = scratch_mu[:last].copy()
        beta = scratch_beta[:last].copy()
    return out


def _report_indices(low_mass: np.ndarray, config: DetectorConfig) -> list[int]:
    """Apply the report rule to the low-run-length mass trace.

    A report fires on an upward crossing of the threshold. During the
    first ``min_gap`` samples the mass is 1 by construction (the run
    cannot be longer than the window so far), so reports only start after
    that warm-up; the window start itself is never reported. After a
    report the fresh run grows back through lengths 1..min_gap, keeping
    the mass high without a new crossing, and the explicit ``min_gap``
    suppression guards the remaining edge cases.
    """
    points = []
    last = 0
    for t in range(1, len(low_mass)):
        if t <= config.min_gap:
            continue
        crossed = low_mass[t] > config.threshold and low_mass[t - 1] <= config.threshold
        if crossed and (t - last) >= config.min_gap:
            points.append(t)
            last = t
    return points


def detect_series(
    data: TimeSeriesData, window: TimeWindow, config: DetectorConfig = DetectorConfig()
) -> ChangePointArray:
    """Distributional change points of one series inside ``window``.

    A constant series (zero variance after clipping) has no
    distributional changes and yields an empty array.
    """
    clipped = data.clip(window.require_nonempty())
    n = len(clipped)
    if n < 2:
        return ChangePointArray()
    x = clipped.values
    std = float(np.std(x))
    if std == 0.0:
        return ChangePointArray()
    standardized = (x - float(np.mean(x))) / std
    low_mass = run_length_low_mass(standardized, config)
    idx = _report_indices(low_mass, config)
    return ChangePointArray(tuple(int(clipped.timestamps[i]) for i in idx))


def detect_events(data: EventSequenceData, window: TimeWindow) -> ChangePointArray:
    """Label-change timestamps of an event sequence inside ``window``.

    Reports the junction between adjacent intervals when their labels
    differ, both boundaries of an interior gap, and the appearance or
    disappearance of the label strictly inside the window. Points at the
    window edges are never reported: a boundary clipped to the window
    start carries no information about a change.
    """
    clipped = data.clip(window.require_nonempty())
    points: list[int] = []
    ivs = clipped.intervals
    if not ivs:
        return ChangePointArray()
    first_start = ivs[0][0]
    if first_start > window.start:
        points.append(first_start)
    for (s0, e0, l0), (s1, e1, l1) in zip(ivs, ivs[1:]):
        if e0 == s1:
            if l0 != l1:
                points.append(s1)
        else:
            points.append(e0)
            points.append(s1)
    last_end = ivs[-1][1]
    if last_end < window.end:
        points.append(last_end)
    inside = sorted({p for p in points if window.start < p < window.end})
    return ChangePointArray(tuple(inside))


def pool_changepoints(
    arrays: list[ChangePointArray] | tuple[ChangePointArray, ...], tolerance: int
) -> ChangePointArray:
    """Union of arrays with near-duplicates merged.

    Greedy left-to-right merge: each point within ``tolerance`` of the
    current representative collapses into it, so the earliest point of a
    cluster survives.
    """
    if tolerance < 0:
        raise InvalidArgumentError("tolerance must be non-negative")
    merged: list[int] = []
    for p in sorted({p for arr in arrays for p in arr.points}):
        if merged and p - merged[-1] <= tolerance:
            continue
        merged.append(p)
    return ChangePointArray(tuple(merged))


def changepoints_for_data(
    data: ClueData,
    window: TimeWindow,
    step: int,
    config: DetectorConfig = DetectorConfig(),
) -> ChangePointArray:
    """Change points of a resolved clue payload, pooled across members.

    number: detect on the single series. bag: detect per sub-series and
    pool within one sampling step. string: event boundaries. set: event
    boundaries per member sequence, pooled the same way.
    """
    if data.kind is DataKind.NUMBER:
        if not data.series:
            return ChangePointArray()
        return detect_series(data.series[0], window, config)
    if data.kind is DataKind.BAG:
        parts = [detect_series(s, window, config) for s in data.series]
        return pool_changepoints(parts, tolerance=step)
    if data.kind is DataKind.STRING:
        if not data.events:
            return ChangePointArray()
        return detect_events(data.events[0], window)
    parts = [detect_events(e, window) for e in data.events]
    return pool_changepoints(parts, tolerance=step)


def changepoints_for_clue(store, clue, config: DetectorConfig = DetectorConfig()) -> ChangePointArray:
    """Resolve a clue against a store and detect its change points."""
    data = store.query_clue(clue.key, clue.window)
    return changepoints_for_data(data, clue.window, store.step, config)


def sample_offsets(cpa: ChangePointArray, window: TimeWindow, step: int) -> np.ndarray:
    """Convert timestamps to fractional sample offsets from the window start."""
    return (cpa.as_array() - float(window.start)) / float(step)
