import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from feynwalk import schrodinger as sch
from feynwalk.acceptance import random_exact_instance, random_float_instance
from feynwalk.brownian import make_rng
from feynwalk.gaussian import GaussianRational as GR


def test_constant_data_is_stationary():
    # i/2 + (1 - i) + i/2 = 1
    psi = sch.evolve(sch.initial_state(3, sch.constant_data(), 40), sch.constant_data(), 10)
    inner = [psi.value(j) for j in range(-20, 21)]
    assert np.allclose(inner, 1, atol=1e-15, rtol=0)


def test_indicator_one_step_exact():
    pot = sch.indicator_data(0)
    psi = sch.evolve(sch.initial_state(0, pot, 0, exact=True), pot, 1)
    assert [psi.value(j) for j in (-1, 0, 1)] == [GR(0, 1, 1), GR(1, -1, 0), GR(0, 1, 1)]
    assert psi.value(2) == GR(0, 0, 0)


def test_indicator_two_steps_is_center_amplitude():
    pot = sch.indicator_data(0)
    psi = sch.evolve(sch.initial_state(0, pot, 0, exact=True), pot, 2)
    assert psi.value(0) == GR(-1, -4, 1)
    assert psi.support_radius == 2


@given(st.integers(0, 2 ** 32), st.integers(0, 7), st.integers(-1, 1))
@settings(max_examples=25)
def test_dp_matches_path_sum_exact(seed, k, site):
    pot = random_exact_instance(make_rng(seed), k)
    psi = sch.evolve(sch.initial_state(0, pot, 2, exact=True), pot, k)
    assert psi.value(site) == sch.path_integral_oracle(site, pot, k, 0, exact=True)


@given(st.integers(0, 2 ** 32), st.integers(0, 7), st.integers(2, 5))
@settings(max_examples=25)
def test_dp_matches_path_sum_float(seed, k, m):
    pot = random_float_instance(make_rng(seed), k, m)
    psi = sch.evolve(sch.initial_state(m, pot, 2), pot, k)
    ref = sch.path_integral_oracle(0, pot, k, m)
    assert abs(psi.value(0) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_oracle_refuses_long_paths():
    with pytest.raises(ValueError):
        sch.path_integral_oracle(0, sch.constant_data(), 13, 0)


def test_shift_equivariance_exact():
    a, b = sch.indicator_data(0), sch.indicator_data(3)
    pa = sch.evolve(sch.initial_state(0, a, 0, exact=True), a, 5)
    pb = sch.evolve(sch.initial_state(0, b, 3, exact=True), b, 5)
    assert all(pa.value(j) == pb.value(j + 3) for j in range(-6, 7))


@given(st.integers(0, 2 ** 32))
@settings(max_examples=20)
def test_linearity(seed):
    rng = make_rng(seed)
    m, k = 3, 6
    sites = np.arange(-20, 21)
    V = rng.uniform(-2, 2, len(sites))
    g1 = rng.normal(size=len(sites)) + 1j * rng.normal(size=len(sites))
    g2 = rng.normal(size=len(sites)) + 1j * rng.normal(size=len(sites))
    a, b = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())

    def run(g):
        pot = sch.from_samples(m, sites, V, g)
        return sch.evolve(sch.initial_state(m, pot, 20), pot, k).values

    lhs, rhs = run(a * g1 + b * g2), a * run(g1) + b * run(g2)
    assert np.max(np.abs(lhs - rhs)) < 1e-13 * max(1.0, np.max(np.abs(rhs)))


def test_support_grows_one_site_per_step():
    pot = sch.indicator_data(0)
    for k in range(5):
        psi = sch.evolve(sch.initial_state(0, pot, 0, exact=True), pot, k)
        assert psi.support_radius == k


def test_evolve_rejects_negative_steps():
    with pytest.raises(ValueError):
        sch.evolve(sch.initial_state(0, sch.constant_data(), 1), sch.constant_data(), -1)


def test_amplification_is_sqrt5():
    # highest lattice mode (-1)^j is multiplied by 1 - 2i per step
    m, k = 0, 6
    sites = np.arange(-30, 31)
    pot = sch.from_samples(m, sites, np.zeros(len(sites)), (-1.0) ** sites)
    psi = sch.evolve(sch.initial_state(m, pot, 30), pot, k)
    assert abs(psi.value(0) - (1 - 2j) ** k) < 1e-10
    assert sch.amplification_bits(10) == math.ceil(10 * 0.5 * math.log2(5))


@pytest.mark.parametrize("m,k", [(3, 20), (3, 64), (4, 256)])
def test_free_routes_agree(m, k):
    pot = sch.gaussian_packet(1.0)
    x1, spec = sch.free_gaussian_lattice(1.0, m, k, 3.0)
    x2, fixed = sch.fixed_point_solution(pot, m, k, 3.0)
    assert np.array_equal(x1, x2)
    assert np.max(np.abs(spec - fixed)) < 1e-12
    if k <= 20:
        _, dp, meth = sch.lattice_solution(pot, m, k, 3.0, method="float")
        assert np.max(np.abs(dp - fixed)) < 1e-10


def test_closed_form_against_implicit_scheme():
    pot = sch.gaussian_packet(1.0)
    dx = 2.0 ** -9
    x, cn = sch.crank_nicolson(pot, 0.5, dx, dx, 16.0)
    sel = np.abs(x) <= 4
    err = np.max(np.abs(cn - sch.free_gaussian_exact(0.5, x, 1.0))[sel])
    assert err < 1e-6
    with pytest.raises(ValueError):
        sch.crank_nicolson(pot, 0.3, dx, 0.25, 4.0)


def test_free_convergence_to_continuum():
    tab = sch.continuum_comparison(sch.gaussian_packet(1.0), 1.0, range(4, 10))
    assert tab.monotone and tab.errors[-1] < 1e-3
    ratios = np.array(tab.errors[:-1]) / np.array(tab.errors[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))
    assert tab.flags() == []


def test_constant_convergence_is_exact():
    tab = sch.continuum_comparison(sch.constant_data(), 0.5, range(2, 5))
    assert all(e < 1e-13 for e in tab.errors)


def test_cosine_short_time():
    cp = sch.cosine_potential(1.0)
    peaks = []
    for m in (4, 5):
        k, _ = sch.snap_time(0.25, m)
        _, v, meth = sch.lattice_solution(cp, m, k, 2.0)
        assert meth == "fixed"
        peaks.append(np.abs(v).max())
    assert peaks == pytest.approx([0.9711575, 0.9707613], abs=1e-6)


@pytest.mark.slow
def test_cosine_level5_growth_is_not_rounding():
    """The fixed-point result at t = 1 is huge and independent of the guard bits."""
    cp = sch.cosine_potential(1.0)
    _, a = sch.fixed_point_solution(cp, 5, 1024, 1.0, guard_bits=32)
    _, b = sch.fixed_point_solution(cp, 5, 1024, 1.0, guard_bits=96)
    assert np.abs(a).max() > 1e80
    assert np.max(np.abs(a - b)) <= 1e-12 * np.abs(a).max()


def test_comparison_table_flags():
    rows = [sch.ErrorRow(m, 0.0, e, "x") for m, e in zip(range(5), [1.0, 0.5, 0.6, 0.7, 0.1])]
    tab = sch.ComparisonTable("p", 1.0, "r", rows)
    assert not tab.monotone and tab.flags() == [2, 3, 4]
    skipped = sch.ComparisonTable("p", 1.0, "r", [sch.ErrorRow(0, 0.0, None, "skipped")])
    assert not skipped.monotone


def test_kernel_identities():
    rep = sch.kernel_checks(0.5, 0.5)
    assert abs(rep.integral - 1) < 1e-10
    assert abs(rep.abs_integral - sch.KERNEL_NORM) < 1e-8
    assert rep.ck_max_deviation < 1e-8
    with pytest.raises(ValueError):
        sch.kernel_checks(0.5, 0.5, width=2.0)
    with pytest.raises(ValueError):
        sch.ComplexTransitionKernel(0.0)


def test_kernel_norm_value():
    # |sqrt((2+i)/(2 pi t))| integrated against exp(-y^2/t) gives 5**(1/4)/sqrt(2)
    t = 0.7
    k = sch.ComplexTransitionKernel(t)
    assert abs(k.density(0, 0)) * math.sqrt(math.pi * t) == pytest.approx(sch.KERNEL_NORM)


def test_csv_output():
    psi = sch.evolve(sch.initial_state(1, sch.indicator_data(0, 1), 0), sch.indicator_data(0, 1), 1)
    lines = psi.to_csv().splitlines()
    assert lines[0] == "x,re,im,abs2" and len(lines) == 4
    assert lines[2].startswith("0.0,1.0,-1.0,")
