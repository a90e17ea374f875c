import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from feynwalk import asymptotics as asy
from feynwalk.amplitudes import EXACT, amplitude_table


@pytest.fixture(scope="module")
def params():
    return asy.AsymptoticParams(asy.extrapolate_c2(500).c2)


def test_c2_at_1000_matches_published_value():
    est = asy.estimate_c2(1000)
    assert abs(est.real - asy.C2_PAPER_N1000.real) < 1e-5
    assert abs(est.imag - asy.C2_PAPER_N1000.imag) < 1e-5


def test_c2_sequence_consistent_with_single_estimate():
    seq = asy.estimate_c2_sequence(300)
    for n in (1, 17, 300):
        assert abs(seq[n - 1] - asy.estimate_c2(n)) < 1e-14


def test_c2_from_mpmath_recursion():
    """Center amplitude through a direct high-precision convolution."""
    n = 60
    with mp.workdps(40):
        p, q = mp.mpc(0, 0.5), mp.mpc(1, -1)
        row = {0: mp.mpc(1)}
        for _ in range(2 * n):
            new = {}
            for j, v in row.items():
                for d, w in ((-1, p), (0, q), (1, p)):
                    new[j + d] = new.get(j + d, 0) + v * w
            row = new
        ref = row[0] * mp.sqrt(n) / mp.mpc(-3, -4) ** n
    assert abs(asy.estimate_c2(n) - complex(ref)) < 1e-12


def test_c2_drift_rate():
    ex = asy.extrapolate_c2(500)
    assert abs(ex.kappa - (-1 + 1j) / 16) < 1e-5
    assert abs(ex.c2 - asy.C2_CONJECTURE) < 5e-3


@given(st.integers(20, 400))
@settings(max_examples=15)
def test_c2_estimates_do_not_approach_conjecture_faster_than_they_move(n):
    a, b = asy.estimate_c2(n), asy.estimate_c2(2 * n)
    assert abs(b - a) < abs(a - asy.C2_CONJECTURE)


def _h_inh_oracle(m, sign=-1):
    """The limit series summed by mpmath, independent of the vectorised code."""
    m = mp.mpf(m)

    def term(k):
        g = (mp.mpc(-19, 317) / (400 * k ** 3) - mp.mpc(73, -14) / 25 * m ** 2 / k ** 3
             + mp.mpc(1, 8) / 3 * m ** 8 / k ** 7)
        ex = sign * mp.mpc(2, 2) * (m ** 2 - mp.mpf(1) / 16) / ((k + 1) * (k + 2))
        return g / (1 + mp.exp(ex) / mp.mpc(3, 4)) * mp.exp(mp.mpc(1, -1) / (16 * (k + 2)))

    with mp.workdps(30):
        return complex(mp.nsum(term, [1, mp.inf]))


@pytest.mark.parametrize("m", [0, 1, 2])
def test_h_inh_limit_against_mpmath(m):
    assert abs(asy.h_inh_limit(m) - _h_inh_oracle(m)) < 1e-9


def test_h_inh_limit_frozen_and_sign_variant():
    val = asy.h_inh_limit(0)
    assert abs(val - (-0.15504612 + 0.84203595j)) < 1e-8
    flipped = asy.h_inh_limit(0, exponent_sign=1.0)
    assert abs(flipped - asy.H_INH_INF0_PAPER) < 1e-6
    assert abs(flipped - _h_inh_oracle(0, sign=1)) < 1e-9


def test_partial_sums_converge_to_limit():
    s = asy.h_inh_series(0, 200)
    d = s.distance()
    assert d[199] < d[99] < d[9]
    assert d[199] < 5e-4
    assert abs(s.partial_sums[-1] - asy.h_inh_partial(200, 0)) == 0


def test_tail_terms_needed_monotone():
    assert asy.tail_terms_needed(0, 1e-6) <= asy.tail_terms_needed(0, 1e-10)
    assert asy.tail_terms_needed(1) <= asy.tail_terms_needed(3)


def test_boundary_conditions(params):
    a2 = amplitude_table(2, EXACT).mantissas()
    assert abs(asy.main_term(2, 0, params) + asy.error_term(2, 0, params) - a2[2]) < 1e-14
    for m in (1, 2, 3):
        mu = amplitude_table(2 * m, EXACT).mantissas()[4 * m]
        got = asy.main_term(2 * m, 2 * m, params) + asy.error_term(2 * m, 2 * m, params)
        assert abs(got - mu) < 1e-14


def test_c1_makes_main_term_exact_at_first_length(params):
    for j in (1, 3, 5):
        mu = amplitude_table(j, EXACT).mantissas()[2 * j]
        assert abs(asy.main_term(j, j, params) - mu) < 1e-14


@pytest.mark.parametrize("ell", [255, 256, 257])
def test_main_term_accuracy(ell, params):
    mant = amplitude_table(ell, EXACT).mantissas()
    for j in (0, 1, 2, 4):
        rel = abs(mant[j + ell] - asy.main_term(ell, j, params)) / abs(mant[j + ell])
        assert rel < 1e-3


def test_error_term_residual_frozen(params):
    """Adding the assembled correction does not shrink the residual at l = 256."""
    e = amplitude_table(256, EXACT).mantissas()[256]
    mt = asy.main_term(256, 0, params)
    without = abs(e - mt)
    with_corr = abs(e - mt - asy.error_term(256, 0, params))
    assert without == pytest.approx(2.579e-5, rel=1e-2)
    assert with_corr == pytest.approx(5.746e-5, rel=1e-2)


def test_correction_decays(params):
    vals = [abs(asy.h_total(ell // 2, 0, params)) * ell ** (2 / 3) for ell in (64, 256, 1024)]
    assert vals[0] > vals[1] > vals[2]


def test_error_term_rejects_odd():
    p = asy.AsymptoticParams(asy.C2_CONJECTURE)
    with pytest.raises(ValueError):
        asy.error_term(5, 0, p)
    with pytest.raises(ValueError):
        asy.error_term(6, 1, p)
    with pytest.raises(ValueError):
        asy.main_term(3, 4, p)
    with pytest.raises(ValueError):
        asy.estimate_c2(0)


def test_unit_power_branch():
    assert abs(asy.unit_power(1) - (-3 - 4j) / 5) < 1e-15
    assert abs(asy.unit_power(0.5) ** 2 - (-3 - 4j) / 5) < 1e-15
    assert asy.unit_power(0.5).imag < 0 and asy.unit_power(0.5).real > 0


def test_residual_fitted_constant(params):
    rows = asy.residual_table([64, 128, 256], params)
    assert asy.fitted_constant(rows) < 5
    assert all(np.isfinite(r.relative_error) for r in rows)
    w = math.floor(256 ** (2 / 3) / 3)
    assert sum(r.ell == 256 for r in rows) == 2 * w + 1
