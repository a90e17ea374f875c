"""Twist-and-shrink construction of Brownian motion from random walks.

Two flavours share one engine.  In lazy mode every level is a lazy walk with
step law (1/4, 1/2, 1/4) and one index is one time step.  In coupled mode a
level is the even-time chain ``S(2k)`` of the coupled walk; one index is two
raw time steps and odd times are never sampled.  Either way a bridge ends at
every nonzero increment, and twisting flips whole bridges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.ndimage import maximum_filter1d, minimum_filter1d

LAZY = "lazy"
COUPLED = "coupled"
MODES = (LAZY, COUPLED)

# uniform draw in 0..3 -> lazy step
_LAZY_LUT = np.array([-1, 1, 0, 0], dtype=np.int8)
ALPHA = 0.5 + math.log(2.0)


def make_rng(seed) -> np.random.Generator:
    """Counter-based generator (Philox) from an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def replica_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


def _lazy_steps(rng: np.random.Generator, n: int) -> np.ndarray:
    return _LAZY_LUT[rng.integers(0, 4, size=n, dtype=np.int8)]


def partial_sums(steps: np.ndarray) -> np.ndarray:
    out = np.zeros(len(steps) + 1, dtype=np.int64)
    np.cumsum(steps, out=out[1:])
    return out


@dataclass(frozen=True)
class LazyWalk:
    steps: np.ndarray

    @property
    def partials(self) -> np.ndarray:
        return partial_sums(self.steps)

    def __len__(self):
        return len(self.steps)


def sample_lazy_walk(length: int, seed) -> LazyWalk:
    if length < 0:
        raise ValueError("length must be non-negative")
    return LazyWalk(_lazy_steps(make_rng(seed), length))


# ---------------------------------------------------------------------------
# stopping times
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class StoppingTimes:
    """Bridge end times ``T(0) = 0 < T(1) < ...`` in raw time units."""

    times: np.ndarray
    displacements: np.ndarray
    mode: str
    dropped: int
    overshoots: int

    @property
    def durations(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def overshoot_rate(self) -> float:
        n = len(self.displacements)
        return self.overshoots / n if n else 0.0


def stopping_times(values, mode: str = LAZY) -> StoppingTimes:
    """Bridges of a walk given by its values.

    Lazy mode reads ``values`` as ``L(0), L(1), ...`` and requires every bridge
    to move by exactly one.  Coupled mode reads them as the even-time samples
    ``S(0), S(2), S(4), ...``; a bridge ends at the first even time whose value
    differs by at least one, and larger moves are counted as overshoots.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    vals = np.asarray(values, dtype=np.int64)
    inc = np.diff(vals)
    ends = np.flatnonzero(inc) + 1
    disp = inc[ends - 1]
    if mode == LAZY and np.any(np.abs(disp) != 1):
        raise ValueError("lazy walk has a step larger than one")
    unit = 1 if mode == LAZY else 2
    dropped = int(len(inc) > (ends[-1] if len(ends) else 0))
    times = np.concatenate([[0], ends]) * unit
    return StoppingTimes(times, disp, mode, dropped, int(np.count_nonzero(np.abs(disp) > 1)))


def geometric_ks(durations: np.ndarray) -> float:
    """Kolmogorov distance between the empirical law of ``durations`` and Geometric(1/2)."""
    d = np.asarray(durations)
    top = int(d.max())
    k = np.arange(1, top + 1)
    emp = np.searchsorted(np.sort(d), k, side="right") / len(d)
    return float(np.max(np.abs(emp - (1 - 0.5 ** k))))


# ---------------------------------------------------------------------------
# twisting
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TwistResult:
    steps: np.ndarray        # twisted child increments
    bridge_ends: np.ndarray  # index of T(2k) in child units, k = 0..K
    shortfall: int           # parent steps without two child bridges


def twist(parent_steps: np.ndarray, child_steps: np.ndarray) -> TwistResult:
    """Reflect child bridges so that two of them reproduce each parent step.

    A zero parent step gets a bridge pair that cancels; a parent step of +-1
    gets two bridges in its own direction.  Only the nonzero increment of a
    bridge changes sign, which is what reflecting the bridge amounts to.
    """
    parent = np.asarray(parent_steps, dtype=np.int8)
    y = np.array(child_steps, dtype=np.int8, copy=True)
    idx = np.flatnonzero(y)
    K = min(len(parent), len(idx) // 2)
    first, second = idx[0:2 * K:2], idx[1:2 * K:2]
    par = parent[:K]
    a1 = np.abs(y[first])
    a2 = np.abs(y[second])
    s1 = np.sign(y[first])
    y[first] = np.where(par == 0, y[first], par * a1)
    y[second] = np.where(par == 0, -s1 * a2, par * a2)
    ends = np.concatenate([[0], second + 1])
    return TwistResult(y, ends, len(parent) - K)


# ---------------------------------------------------------------------------
# coupled even-time sampler
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class MarkovSampler:
    """Nearest-neighbour chain for ``S(2n) -> S(2n+2)``.

    Uses fitted transitions for ``n0 < n <= n_max`` inside each fit window and
    the 1/4 baseline everywhere else.
    """

    n0: int
    fits: dict = field(default_factory=dict)

    @property
    def n_max(self) -> int:
        return max(self.fits, default=self.n0)

    def transition(self, n: int, state: int) -> tuple[float, float]:
        fit = self.fits.get(n)
        if n <= self.n0 or fit is None or abs(state) > fit.window:
            return 0.25, 0.25
        return fit.p_up[state], fit.p_down[state]

    def sample(self, rng: np.random.Generator, length: int, start: int = 0,
               state: int = 0) -> np.ndarray:
        """Even-time increments for half-times ``start .. start + length - 1``.

        ``state`` is the chain value at half-time ``start``.
        """
        head = max(0, min(length, self.n_max + 1 - start))
        steps = np.empty(length, dtype=np.int8)
        if head:
            u = rng.random(head)
            for i in range(head):
                p, q = self.transition(start + i, state)
                s = 1 if u[i] < p else (-1 if u[i] < p + q else 0)
                steps[i] = s
                state += s
        steps[head:] = _lazy_steps(rng, length - head)
        return steps


@lru_cache(maxsize=4)
def fitted_sampler(n_max: int = 64, n0: int = 8, exact_cap: int = 512) -> MarkovSampler:
    from .coupled import markov_fit_for

    fits = {n: markov_fit_for(n, exact_cap) for n in range(n0 + 1, n_max + 1)}
    return MarkovSampler(n0, fits)


def baseline_sampler(n0: int = 8) -> MarkovSampler:
    return MarkovSampler(n0, {})


def _ssrw_even_steps(rng, n):
    # two simple-walk steps per even increment: -2, 0, 0, +2
    return (2 * _lazy_steps(rng, n)).astype(np.int8)


# ---------------------------------------------------------------------------
# hierarchy
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TwistShrinkLevel:
    """Level ``m``: vertices at ``k * dt`` with values ``2**-m * walk(k)``."""

    m: int
    steps: np.ndarray
    dt: float
    bridge_ends: np.ndarray | None = None  # into this level, matched to parent indices

    @property
    def walk(self) -> np.ndarray:
        return partial_sums(self.steps)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.steps) + 1) * self.dt

    def values(self) -> np.ndarray:
        return self.walk * 2.0 ** (-self.m)

    def __call__(self, t):
        return np.interp(t, self.times, self.values())


@dataclass(frozen=True)
class RefinementReport:
    """``first_overshoot`` is the first anchor reached through a bridge of size two."""

    checked: int
    violations: int
    first_violation: int = -1
    first_overshoot: int = -1

    @property
    def explained(self) -> bool:
        """True when no violation precedes the first overshoot."""
        return self.violations == 0 or 0 <= self.first_overshoot <= self.first_violation


@dataclass(frozen=True)
class Hierarchy:
    mode: str
    horizon: int
    levels: list
    shortfall: int
    overshoots: int
    segment_lengths: tuple

    @property
    def consumed_steps(self) -> int:
        return sum(self.segment_lengths)

    def refinement(self) -> list[RefinementReport]:
        return [check_refinement(p, c) for p, c in zip(self.levels, self.levels[1:])]

    def sup_distances(self) -> np.ndarray:
        return np.array([sup_distance(p, c, self.horizon) for p, c in zip(self.levels, self.levels[1:])])

    def lags(self) -> np.ndarray:
        return np.array([time_lag(p, c, self.horizon) for p, c in zip(self.levels, self.levels[1:])])


def level_length(m: int, horizon: int, mode: str) -> int:
    """Number of increments covering ``[0, horizon]`` at level ``m``."""
    n = horizon * 4 ** m
    return n if mode == LAZY else -(-n // 2)


def segment_length(m: int, horizon: int) -> int:
    """Raw complex-measure steps reserved for level ``m`` in coupled mode."""
    return 2 ** (3 * m + 1) * horizon


def build_hierarchy(levels: int, horizon: int, seed, mode: str = LAZY,
                    sampler: MarkovSampler | None = None, n0: int = 8) -> Hierarchy:
    """Levels ``0..levels`` of the twisted and shrunken walks on ``[0, horizon]``.

    ``seed`` may be an int or a SeedSequence.  Coupled mode uses ``sampler``
    (default: the 1/4 baseline chain with threshold ``n0``) for the first
    ``segment_length(m)/2`` even steps of level ``m`` and simple-walk pairs after.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if levels < 1 or horizon < 1:
        raise ValueError("need levels >= 1 and horizon >= 1")
    rng = make_rng(seed)
    if mode == COUPLED and sampler is None:
        sampler = baseline_sampler(n0)
    unit = 1.0 if mode == LAZY else 2.0
    overshoots = 0

    def draw(m, start, n, state=0):
        nonlocal overshoots
        if mode == LAZY:
            return _lazy_steps(rng, n)
        budget = segment_length(m, horizon) // 2
        a = max(0, min(n, budget - start))
        parts = [sampler.sample(rng, a, start, state)] if a else []
        if n > a:
            tail = _ssrw_even_steps(rng, n - a)
            overshoots += int(np.count_nonzero(np.abs(tail) > 1))
            parts.append(tail)
        return np.concatenate(parts) if parts else np.zeros(0, np.int8)

    k0 = level_length(0, horizon, mode)
    out = [TwistShrinkLevel(0, draw(0, 0, k0), unit)]
    shortfall = 0
    for m in range(1, levels + 1):
        parent = out[-1].steps[:level_length(m - 1, horizon, mode)]
        need = level_length(m, horizon, mode)
        child = draw(m, 0, need)
        want = 2 * len(parent)
        while np.count_nonzero(child) < want:
            extra = 2 * max(want - np.count_nonzero(child), 64)
            child = np.concatenate([child, draw(m, len(child), extra, int(child.sum(dtype=np.int64)))])
        res = twist(parent, child)
        shortfall += res.shortfall
        keep = max(need, int(res.bridge_ends[-1]))
        out.append(TwistShrinkLevel(m, res.steps[:keep], unit * 4.0 ** (-m), res.bridge_ends))
    segs = tuple(segment_length(m, horizon) for m in range(levels + 1)) if mode == COUPLED else ()
    if mode == COUPLED:
        assert 7 * sum(segs) == 2 * (8 ** (levels + 1) - 1) * horizon
    return Hierarchy(mode, horizon, out, shortfall, overshoots, segs)


def check_refinement(parent: TwistShrinkLevel, child: TwistShrinkLevel) -> RefinementReport:
    """Exact integer check of ``child(T(2k)) = 2 * parent(k)`` at every anchor."""
    ends = child.bridge_ends
    pw, cw = parent.walk, child.walk
    K = len(ends)
    ok = cw[ends] == 2 * pw[:K]
    bad = np.flatnonzero(~ok)
    # anchor k closes the bridge pair holding child steps ends[k-1] .. ends[k]-1
    big = np.flatnonzero(np.abs(child.steps[:ends[-1]]) > 1)
    first_big = int(np.searchsorted(ends, big[0], side="right")) if len(big) else -1
    return RefinementReport(K, len(bad), int(bad[0]) if len(bad) else -1, first_big)


def sup_distance(parent: TwistShrinkLevel, child: TwistShrinkLevel, horizon: float,
                 chunk: int = 1 << 20) -> float:
    """``sup |B_{m+1} - B_m|`` over ``[0, horizon]``.

    Both broken lines are linear between child vertices, so the maximum over
    the child grid is exact.  Works in integers scaled by ``2**(m+3)``.
    """
    K = int(round(horizon / parent.dt))
    a = parent.walk[:K + 1]
    f = child.walk[:4 * K + 1]
    r = np.arange(4)
    best = 0
    for lo in range(0, K, chunk):
        hi = min(K, lo + chunk)
        aa = a[lo:hi + 1]
        ff = f[4 * lo:4 * hi].reshape(hi - lo, 4)
        d = 8 * aa[:-1, None] + 2 * r[None, :] * np.diff(aa)[:, None] - 4 * ff
        best = max(best, int(np.abs(d).max()))
    best = max(best, abs(8 * int(a[K]) - 4 * int(f[4 * K])))
    return best / 2.0 ** (parent.m + 3)


def time_lag(parent: TwistShrinkLevel, child: TwistShrinkLevel, horizon: float) -> float:
    """``sup |T(2k) dt_child - k dt_parent|`` over anchors with ``k dt_parent <= horizon``."""
    K = int(round(horizon / parent.dt))
    k = np.arange(min(K + 1, len(child.bridge_ends)))
    return float(np.max(np.abs(child.bridge_ends[k] * child.dt - k * parent.dt)))


def rate_slope(ms, distances) -> float:
    """Least-squares slope of ``log2(distance)`` against ``m``."""
    return float(np.polyfit(np.asarray(ms, float), np.log2(np.asarray(distances, float)), 1)[0])


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class IncrementStats:
    s: float
    t: float
    mean: float
    var: float
    expected_var: float
    var_z: float
    skew: float
    excess_kurtosis: float
    jarque_bera: float
    jb_pvalue: float


@dataclass(frozen=True)
class GaussianityReport:
    increments: list
    correlation: float
    correlation_z: float


def gaussianity_report(levels: list[TwistShrinkLevel], partition, mode: str = LAZY,
                       min_steps: int = 100) -> GaussianityReport:
    """Moments of ``B(t) - B(s)`` across replicas at one level.

    ``levels`` holds the same level from independent replicas.
    """
    part = np.asarray(partition, float)
    dt = levels[0].dt
    if np.any(np.diff(part) / dt < min_steps):
        raise ValueError(f"partition cells need at least {min_steps} lattice steps at this level")
    rate = 0.5 if mode == LAZY else 0.25
    samples = np.array([lv(part) for lv in levels])
    inc = np.diff(samples, axis=1)
    N = inc.shape[0]
    rows = []
    for i in range(inc.shape[1]):
        x = inc[:, i]
        v = float(x.var(ddof=1))
        m4 = float(np.mean((x - x.mean()) ** 4))
        se = math.sqrt(max(m4 - v * v, 1e-300) / N)
        expected = float(rate * (part[i + 1] - part[i]))
        jb = stats.jarque_bera(x)
        rows.append(IncrementStats(float(part[i]), float(part[i + 1]), float(x.mean()), v, expected,
                                   (v - expected) / se, float(stats.skew(x)),
                                   float(stats.kurtosis(x)), float(jb.statistic), float(jb.pvalue)))
    if inc.shape[1] >= 2:
        r = float(np.corrcoef(inc[:, 0], inc[:, 1])[0, 1])
    else:
        r = 0.0
    return GaussianityReport(rows, r, r * math.sqrt(N))


def hoeffding_radius(m: int, horizon: float, C: float = 2.0) -> int:
    """Window ``N' = 4 (alpha C m 4^m T log* T)^(1/2)`` around the anchors ``4k``."""
    logt = max(1.0, math.log(horizon))
    return int(4 * math.sqrt(ALPHA * C * m * 4.0 ** m * horizon * logt))


def hoeffding_check(child: TwistShrinkLevel, horizon: float, x: float = 6.0,
                    C: float = 2.0) -> tuple[int, int]:
    """Count anchors ``4k`` where ``max_{|j-4k| <= N'} |L(j) - L(4k)| < x sqrt(N')``.

    Returns ``(passed, total)``; the level index of ``child`` is ``m + 1``.
    """
    m = child.m - 1
    Np = hoeffding_radius(max(m, 1), horizon, C)
    w = child.walk
    size = 2 * Np + 1
    hi = maximum_filter1d(w, size, mode="nearest")
    lo = minimum_filter1d(w, size, mode="nearest")
    K = int(round(horizon / (child.dt * 4)))
    anchors = 4 * np.arange(K + 1)
    anchors = anchors[anchors < len(w)]
    dev = np.maximum(hi[anchors] - w[anchors], w[anchors] - lo[anchors])
    return int(np.count_nonzero(dev < x * math.sqrt(Np))), len(anchors)


__all__ = [
    "COUPLED", "LAZY", "GaussianityReport", "Hierarchy", "IncrementStats", "LazyWalk",
    "MarkovSampler", "RefinementReport", "StoppingTimes", "TwistResult", "TwistShrinkLevel",
    "baseline_sampler", "build_hierarchy", "check_refinement", "fitted_sampler", "gaussianity_report",
    "geometric_ks", "hoeffding_check", "hoeffding_radius", "level_length", "make_rng", "partial_sums",
    "rate_slope", "replica_seeds", "sample_lazy_walk", "segment_length", "stopping_times",
    "sup_distance", "time_lag", "twist",
]
