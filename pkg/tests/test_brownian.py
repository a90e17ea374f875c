import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from feynwalk import brownian as bw


def test_empty_walk():
    w = bw.sample_lazy_walk(0, 1)
    assert len(w) == 0 and list(w.partials) == [0]
    with pytest.raises(ValueError):
        bw.sample_lazy_walk(-1, 1)


def test_million_steps_moments():
    n = 10 ** 6
    s = bw.sample_lazy_walk(n, 11).steps.astype(float)
    # per-step variance 1/2; fourth moment of a step is 1/2 as well
    assert abs(s.mean()) < 3 * math.sqrt(0.5 / n)
    v = s.var()
    assert abs(v - 0.5) < 3 * math.sqrt((0.5 - 0.25) / n)
    freq = np.array([np.mean(s == k) for k in (-1, 0, 1)])
    assert np.allclose(freq, [0.25, 0.5, 0.25], atol=3e-3)


def test_two_step_marginal():
    law = {-1: 0.25, 0: 0.5, 1: 0.25}
    p0 = sum(law[a] * law[b] for a, b in itertools.product(law, repeat=2) if a + b == 0)
    assert p0 == 3 / 8
    N = 200_000
    steps = bw.sample_lazy_walk(2 * N, 5).steps.reshape(N, 2)
    emp = np.mean(steps.sum(axis=1) == 0)
    assert abs(emp - p0) < 3 * math.sqrt(p0 * (1 - p0) / N)


def test_determinism_and_independent_replicas():
    a = bw.sample_lazy_walk(1000, 42).steps
    assert np.array_equal(a, bw.sample_lazy_walk(1000, 42).steps)
    s1, s2 = bw.replica_seeds(42, 2)
    assert not np.array_equal(bw.sample_lazy_walk(1000, s1).steps, bw.sample_lazy_walk(1000, s2).steps)


def test_stopping_times_immediate_move():
    st_ = bw.stopping_times([0, 1])
    assert list(st_.times) == [0, 1] and st_.dropped == 0


def test_stopping_times_drops_truncated_bridge():
    st_ = bw.stopping_times([0, 0, 1, 1, 1])
    assert list(st_.times) == [0, 2] and st_.dropped == 1
    with pytest.raises(ValueError):
        bw.stopping_times([0, 2])
    with pytest.raises(ValueError):
        bw.stopping_times([0, 1], mode="other")


def test_coupled_stopping_times_count_overshoots():
    st_ = bw.stopping_times([0, 0, 2, 3, 3, 1], mode=bw.COUPLED)
    assert list(st_.times) == [0, 4, 6, 10]
    assert list(st_.displacements) == [2, 1, -2]
    assert st_.overshoots == 2 and st_.overshoot_rate == pytest.approx(2 / 3)


def test_geometric_bridge_law_lazy():
    w = bw.sample_lazy_walk(400_000, 3)
    d = bw.stopping_times(w.partials).durations[:100_000]
    assert len(d) == 100_000
    assert bw.geometric_ks(d) < 0.01
    assert abs(d.mean() - 2) < 3 * math.sqrt(2 / len(d))
    assert abs(d.var() - 2) < 0.1


def test_geometric_bridge_law_coupled_baseline():
    rng = bw.make_rng(9)
    steps = bw.baseline_sampler(0).sample(rng, 400_000)
    st_ = bw.stopping_times(bw.partial_sums(steps), mode=bw.COUPLED)
    d = st_.durations // 2
    assert st_.overshoots == 0
    assert bw.geometric_ks(d[:100_000]) < 0.01


def test_geometric_ks_exact_sample():
    d = np.array([1, 1, 2, 3])
    # empirical cdf at 1, 2, 3 is .5, .75, 1; geometric is .5, .75, .875
    assert bw.geometric_ks(d) == pytest.approx(0.125)


def test_twist_examples():
    r = bw.twist(np.array([1]), np.array([0, 1, 1]))
    assert list(r.steps) == [0, 1, 1] and list(r.bridge_ends) == [0, 3]
    r = bw.twist(np.array([0]), np.array([1, 0, 1]))
    assert list(r.steps) == [1, 0, -1]
    r = bw.twist(np.array([-1, 0]), np.array([1, 1, -1, 0]))
    assert list(r.steps) == [-1, -1, -1, 0] and r.shortfall == 1


@given(st.integers(0, 2 ** 32), st.integers(1, 40))
def test_twist_reproduces_parent(seed, n):
    rng = bw.make_rng(seed)
    parent = bw._lazy_steps(rng, n)
    child = bw._lazy_steps(rng, 8 * n + 64)
    r = bw.twist(parent, child)
    walk = bw.partial_sums(r.steps)
    K = len(r.bridge_ends)
    assert np.array_equal(walk[r.bridge_ends], 2 * bw.partial_sums(parent)[:K])
    assert np.array_equal(r.steps == 0, child == 0)


def test_twist_preserves_step_law():
    rng = bw.make_rng(17)
    parent = bw._lazy_steps(rng, 60_000)
    child = bw._lazy_steps(rng, 250_000)
    y = bw.twist(parent, child).steps[:100_000]
    obs = [np.sum(y == k) for k in (-1, 0, 1)]
    assert stats.chisquare(obs, np.array([0.25, 0.5, 0.25]) * len(y)).pvalue > 0.01


@given(st.integers(0, 2 ** 63), st.integers(1, 5), st.integers(1, 2))
@settings(max_examples=20)
def test_lazy_refinement_exact(seed, levels, horizon):
    h = bw.build_hierarchy(levels, horizon, seed)
    for rep in h.refinement():
        assert rep.violations == 0 and rep.checked > 0
    for lvl, prev in zip(h.levels[1:], h.levels):
        # refined broken line agrees at anchors
        k = np.arange(len(lvl.bridge_ends))
        assert np.array_equal(lvl(lvl.bridge_ends * lvl.dt), prev(k * prev.dt))
    assert h.shortfall == 0


def test_hierarchy_deterministic():
    a = bw.build_hierarchy(5, 1, 123)
    b = bw.build_hierarchy(5, 1, 123)
    assert all(np.array_equal(x.steps, y.steps) for x, y in zip(a.levels, b.levels))
    c = bw.build_hierarchy(4, 1, 123, mode=bw.COUPLED)
    d = bw.build_hierarchy(4, 1, 123, mode=bw.COUPLED)
    assert all(np.array_equal(x.steps, y.steps) for x, y in zip(c.levels, d.levels))


def test_coupled_segment_ledger():
    h = bw.build_hierarchy(3, 2, 1, mode=bw.COUPLED)
    assert h.segment_lengths == (4, 32, 256, 2048)
    assert h.consumed_steps == 2 * (8 ** 4 - 1) * 2 // 7
    assert [bw.level_length(m, 2, bw.COUPLED) for m in range(3)] == [1, 4, 16]


def test_coupled_refinement_violations_follow_overshoots():
    for s in bw.replica_seeds(5, 16):
        h = bw.build_hierarchy(6, 1, s, mode=bw.COUPLED, sampler=bw.fitted_sampler(16))
        assert all(rep.explained for rep in h.refinement())


def test_sampler_transitions():
    base = bw.baseline_sampler(8)
    assert base.transition(3, 0) == (0.25, 0.25) and base.n_max == 8
    fit = bw.fitted_sampler(12)
    f = fit.fits[10]
    assert fit.transition(10, 1) == (f.p_up[1], f.p_down[1])
    assert fit.transition(8, 1) == (0.25, 0.25)
    assert fit.transition(10, f.window + 1) == (0.25, 0.25)
    steps = fit.sample(bw.make_rng(0), 200)
    assert set(np.unique(steps)) <= {-1, 0, 1}


def _sup_brute(parent, child, horizon):
    t = np.linspace(0, horizon, 16 * int(round(horizon / child.dt)) + 1)
    return np.max(np.abs(parent(t) - child(t)))


def test_sup_distance_matches_dense_grid():
    h = bw.build_hierarchy(5, 1, 77)
    for p, c in zip(h.levels, h.levels[1:]):
        assert bw.sup_distance(p, c, 1) == pytest.approx(_sup_brute(p, c, 1), abs=1e-12)
    assert bw.sup_distance(h.levels[3], h.levels[4], 1, chunk=7) == bw.sup_distance(h.levels[3], h.levels[4], 1)


def test_distances_and_lags_decrease():
    sups, lags = [], []
    for s in bw.replica_seeds(3, 8):
        h = bw.build_hierarchy(9, 1, s)
        sups.append(h.sup_distances())
        lags.append(h.lags())
    sups, lags = np.mean(sups, axis=0), np.mean(lags, axis=0)
    assert sups[-1] < sups[2] / 4 and lags[-1] < lags[2] / 16
    assert bw.rate_slope(range(3, 9), sups[3:]) < -0.25


def test_rate_slope_exact():
    assert bw.rate_slope([1, 2, 3], [0.5, 0.25, 0.125]) == pytest.approx(-1)


@pytest.mark.parametrize("mode,expected", [(bw.LAZY, 0.25), (bw.COUPLED, 0.125)])
def test_increment_variance(mode, expected):
    levels = [bw.build_hierarchy(5, 1, s, mode=mode).levels[-1] for s in bw.replica_seeds(21, 1500)]
    rep = bw.gaussianity_report(levels, [0, 0.5, 1.0], mode=mode)
    inc = rep.increments[0]
    assert inc.expected_var == expected
    assert abs(inc.var_z) < 3
    assert abs(rep.correlation_z) < 3
    assert inc.jb_pvalue > 1e-4


def test_gaussianity_rejects_coarse_level():
    lv = bw.build_hierarchy(2, 1, 0).levels[-1]
    with pytest.raises(ValueError, match="lattice steps"):
        bw.gaussianity_report([lv, lv], [0, 0.5])


def test_hoeffding_envelope():
    passed = total = 0
    for s in bw.replica_seeds(8, 20):
        h = bw.build_hierarchy(6, 1, s)
        p, t = bw.hoeffding_check(h.levels[-1], 1)
        passed, total = passed + p, total + t
    assert passed >= 0.999 * total and total > 0


def test_build_hierarchy_errors():
    with pytest.raises(ValueError):
        bw.build_hierarchy(0, 1, 0)
    with pytest.raises(ValueError):
        bw.build_hierarchy(2, 1, 0, mode="x")


@pytest.mark.parametrize("parent,child,first", [
    ([0, 1], [2, 1, 1, 2], 1),
    ([0, 1], [1, -1, 2, 1], 2),
    ([1, 0], [1, 1, 0, 1, 2], 2),
    ([1, 0], [1, 1, 0, 1, 1], -1),
])
def test_overshoot_attribution(parent, child, first):
    r = bw.twist(np.array(parent), np.array(child, dtype=np.int8))
    p = bw.TwistShrinkLevel(0, np.array(parent, np.int8), 1.0)
    c = bw.TwistShrinkLevel(1, r.steps, 0.25, r.bridge_ends)
    rep = bw.check_refinement(p, c)
    assert rep.first_overshoot == first
    assert rep.explained
    assert (rep.violations == 0) == (first == -1)
