"""Amplitudes ``mu(S_l = j)`` of the complex measure walk.

The walk moves ``+1`` or ``-1`` with amplitude ``i/2`` and stays put with
amplitude ``1 - i``.  Four independent routes are implemented:

* ``amplitude_direct``: the binomial double sum over the number of lazy steps;
* ``amplitude_hypergeometric``: terminating 2F1 closed forms, split by parity;
* ``amplitude_table_by_recursion``: second order recursions in the length;
* ``amplitude_row_by_m_recursion``: a reverse recursion in the endpoint.

Each has an exact backend (dyadic Gaussian rationals) and a floating
backend that stores ``mu * 5**(-l/2)`` so that large lengths do not overflow.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import mpmath
import numpy as np

from .gaussian import I_HALF, ONE, ONE_MINUS_I, ZERO, GaussianRational

EXACT = "exact"
SCALED = "scaled"
BACKENDS = (EXACT, SCALED)
DEFAULT_EXACT_CAP = 512

SQRT5 = math.sqrt(5.0)
LOG5 = math.log(5.0)
LOG2 = math.log(2.0)


class DomainError(ValueError):
    """Endpoint or length outside the walk's reach."""


class BackendError(ValueError):
    """Requested backend cannot serve the request."""


@dataclass(frozen=True)
class StepLaw:
    """Amplitudes of a single step: ``p`` for each of ``+-1``, ``q`` for 0."""

    p: GaussianRational = I_HALF
    q: GaussianRational = ONE_MINUS_I

    def __post_init__(self):
        if self.p * 2 + self.q != ONE:
            raise ValueError("step amplitudes must satisfy 2p + q = 1")

    def total_variation(self) -> float:
        return 2 * abs(complex(self.p)) + abs(complex(self.q))


CANONICAL_STEP = StepLaw()


@dataclass(frozen=True)
class ScaledAmplitude:
    """Floating amplitude ``mantissa * 5**(length/2)``."""

    mantissa: complex
    length: int

    @property
    def log_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + 0.5 * self.length * LOG5

    def __complex__(self):
        return self.mantissa * 5.0 ** (0.5 * self.length)


def _check_backend(backend):
    if backend not in BACKENDS:
        raise BackendError(f"unknown backend {backend!r}; use 'exact' or 'scaled'")


def _check_args(ell, j, backend, exact_cap):
    _check_backend(backend)
    if ell < 0:
        raise DomainError(f"length must be non-negative, got {ell}")
    if abs(j) > ell:
        raise DomainError(f"|j| = {abs(j)} exceeds length {ell}")
    if backend == EXACT and ell > exact_cap:
        raise BackendError(
            f"length {ell} exceeds the exact cap {exact_cap}; use backend='scaled'"
        )


def exact_to_mantissa(a: GaussianRational, ell: int) -> complex:
    """Correctly rounded ``a * 5**(-ell/2)``; underflows quietly to 0."""
    den = (1 << a.k) * 5 ** (ell // 2)
    re, im = a.re / den, a.im / den
    if ell % 2:
        re, im = re / SQRT5, im / SQRT5
    return complex(re, im)


# ---------------------------------------------------------------------------
# complex rationals used inside the exact recursions
# ---------------------------------------------------------------------------
def _cmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _cadd(x, y):
    return (x[0] + y[0], x[1] + y[1])


def _csub(x, y):
    return (x[0] - y[0], x[1] - y[1])


def _cscale(x, s):
    return (x[0] * s, x[1] * s)


def _cdiv(x, y):
    d = y[0] * y[0] + y[1] * y[1]
    return ((x[0] * y[0] + x[1] * y[1]) / d, (x[1] * y[0] - x[0] * y[1]) / d)


def _cfrac(a: GaussianRational):
    return (a.real, a.imag)


def _to_gauss(x, ell) -> GaussianRational:
    return GaussianRational.from_fractions(x[0], x[1], ell)


# ---------------------------------------------------------------------------
# direct sum
# ---------------------------------------------------------------------------
def amplitude_direct(ell: int, j: int, backend: str = EXACT,
                     exact_cap: int = DEFAULT_EXACT_CAP):
    """Sum over the number ``r`` of lazy steps.

    Exact result is a ``GaussianRational`` over ``2**ell``; the scaled result
    a ``ScaledAmplitude``.
    """
    _check_args(ell, j, backend, exact_cap)
    if backend == EXACT:
        return _direct_exact(ell, j)
    return ScaledAmplitude(_direct_scaled(ell, j), ell)


def _direct_exact(ell, j):
    # mu * 2**ell = sum_r C(l,r) C(l-r,h) i**(l-r) (1-i)**r 2**r
    re_tot = im_tot = 0
    r0 = (ell - j) % 2
    # (2 - 2i)**r, advanced two steps at a time: (2 - 2i)**2 = -8i
    w_re, w_im = (1, 0) if r0 == 0 else (2, -2)
    for r in range(r0, ell - abs(j) + 1, 2):
        h = (ell - r + j) // 2
        c = math.comb(ell, r) * math.comb(ell - r, h)
        # multiply by i**(ell - r)
        t_re, t_im = w_re * c, w_im * c
        s = (ell - r) % 4
        if s == 1:
            t_re, t_im = -t_im, t_re
        elif s == 2:
            t_re, t_im = -t_re, -t_im
        elif s == 3:
            t_re, t_im = t_im, -t_re
        re_tot += t_re
        im_tot += t_im
        w_re, w_im = 8 * w_im, -8 * w_re
    return GaussianRational(re_tot, im_tot, ell)


def _guard_digits(ell: int) -> int:
    # alternating terms can exceed their sum by about ((1+sqrt2)/sqrt5)**ell
    return 20 + int(ell * math.log10((1 + math.sqrt(2)) / SQRT5)) + 1


def _direct_scaled(ell, j):
    with mpmath.workdps(_guard_digits(ell)):
        scale = mpmath.power(5, -mpmath.mpf(ell) / 2)
        w = mpmath.mpc(0, 0.5) ** ell * scale
        step = (1 - mpmath.mpc(0, 1)) / mpmath.mpc(0, 0.5)
        r0 = (ell - j) % 2
        w *= step ** r0
        step2 = step * step
        total = mpmath.mpc(0)
        for r in range(r0, ell - abs(j) + 1, 2):
            h = (ell - r + j) // 2
            total += math.comb(ell, r) * math.comb(ell - r, h) * w
            w *= step2
        return complex(total)


# ---------------------------------------------------------------------------
# hypergeometric closed forms
# ---------------------------------------------------------------------------
def _hyp_case(ell, j):
    """Prefactor pieces and 2F1 parameters for the four parity cases.

    Returns ``(sign_phase, poly, binom, a, b, c)`` with the amplitude equal to
    ``sign_phase * poly * binom * 2**(-ell) * 2F1(a, b; c; 2i)``.
    """
    if ell % 2 == 0:
        n = ell // 2
        sign = (-1) ** n
        if j % 2 == 0:
            m = j // 2
            return ((sign, 0), 1, math.comb(2 * n, n + m), -n - m, -n + m, Fraction(1, 2))
        m = (j - 1) // 2
        # (-2 - 2i)(n - m)
        return ((-2 * sign, -2 * sign), n - m, math.comb(2 * n, n + m),
                -n - m, -n + m + 1, Fraction(3, 2))
    n = (ell - 1) // 2
    sign = (-1) ** n
    if j % 2 == 0:
        m = j // 2
        # i * (-2 - 2i) = 2 - 2i; second upper parameter is -n + m here, which
        # is what agrees with the direct sum
        return ((2 * sign, -2 * sign), n - m + 1, math.comb(2 * n + 1, n + m),
                -n - m, -n + m, Fraction(3, 2))
    m = (j - 1) // 2
    return ((0, sign), 1, math.comb(2 * n + 1, n + m + 1),
            -n - m - 1, -n + m, Fraction(1, 2))


def _terms_count(a, b):
    # the series stops after the first non-positive integer upper parameter
    return min(-x for x in (a, b) if x <= 0)


def hyp2f1_terminating(a: int, b: int, c, z) -> tuple:
    """Exact terminating 2F1 by Horner accumulation.

    ``z`` is a pair of fractions (re, im); the result is a pair too.
    """
    n_terms = _terms_count(a, b)
    acc = (Fraction(1), Fraction(0))
    for r in range(n_terms, 0, -1):
        coef = Fraction((a + r - 1) * (b + r - 1)) / ((c + r - 1) * r)
        acc = _cadd((Fraction(1), Fraction(0)), _cscale(_cmul(z, acc), coef))
    return acc


def amplitude_hypergeometric(ell: int, j: int, backend: str = EXACT,
                             exact_cap: int = DEFAULT_EXACT_CAP):
    """Amplitude from the 2F1 closed form matching the parities of ``ell`` and ``j``."""
    _check_args(ell, j, backend, exact_cap)
    phase, poly, binom, a, b, c = _hyp_case(ell, j)
    if backend == EXACT:
        f = hyp2f1_terminating(a, b, c, (Fraction(0), Fraction(2)))
        pre = (Fraction(phase[0] * poly * binom), Fraction(phase[1] * poly * binom))
        val = _cscale(_cmul(pre, f), Fraction(1, 1 << ell))
        return _to_gauss(val, ell)
    # floating: forward summation with the scaled prefactor folded into term 0,
    # carried at a working precision that absorbs the cancellation
    if binom == 0:
        return ScaledAmplitude(0j, ell)
    with mpmath.workdps(_guard_digits(ell)):
        term = (mpmath.mpc(*phase) * poly * binom
                / (mpmath.mpf(2) ** ell * mpmath.power(5, mpmath.mpf(ell) / 2)))
        total = term
        cm = mpmath.mpf(c.numerator) / c.denominator
        z = mpmath.mpc(0, 2)
        for r in range(_terms_count(a, b)):
            term *= (a + r) * (b + r) * z / ((cm + r) * (r + 1))
            total += term
        return ScaledAmplitude(complex(total), ell)


# ---------------------------------------------------------------------------
# recursion in the length
# ---------------------------------------------------------------------------
def initial_values(j: int) -> list[GaussianRational]:
    """Exact ``mu(S_{j+s} = j)`` for ``s = 0, 1, 2, 3`` (``j >= 0``)."""
    base = GaussianRational(1, 0, 0)
    for _ in range(j):
        base = base * I_HALF
    jf = Fraction(j)
    vals = [
        (Fraction(1), Fraction(0)),
        _cscale((Fraction(1), Fraction(-1)), jf + 1),
        _cscale((Fraction(-1, 4), -(jf + 1)), jf + 2),
        _cscale(_cmul((Fraction(1), Fraction(-1)), (Fraction(-1, 4), -(jf + 1) / 3)),
                (jf + 2) * (jf + 3)),
    ]
    out = []
    for s, v in enumerate(vals):
        out.append(_to_gauss(_cmul(v, _cfrac(base)), j + s))
    return out


def length_recursion_coefficients(target: int, j: int):
    """Exact coefficients ``(alpha, beta)`` with
    ``mu(S_target = j) = alpha * mu(S_{target-4} = j) - beta * mu(S_{target-2} = j)``.

    Both are complex rationals (pairs of ``Fraction``); requires ``target >= |j| + 4``.
    """
    h = Fraction(j, 2)
    if target % 2 == 0:
        n = Fraction(target - 4, 2)
        s1, s2, s3 = Fraction(1, 2), Fraction(3, 2), Fraction(7, 4)
        t1, t2, t3 = Fraction(3, 2), Fraction(5, 4), Fraction(3, 4)
        lin, const = Fraction(5, 2), Fraction(51, 40)
    else:
        n = Fraction(target - 5, 2)
        s1, s2, s3 = Fraction(3, 2), Fraction(5, 2), Fraction(9, 4)
        t1, t2, t3 = Fraction(5, 2), Fraction(7, 4), Fraction(5, 4)
        lin, const = Fraction(7, 2), Fraction(111, 40)
    den = (n - h + 2) * (n + h + 2) * (n - h + t1) * (n + h + t1) * (n + t3)
    a = (n + 1) * (n + 2) * (n + s1) * (n + s2) * (n + s3) / den
    jj = Fraction(j * j)
    quad = (n * n + Fraction(3, 20) * jj + lin * n + const,
            Fraction(4, 20) * jj - Fraction(1, 20))
    b = _cscale(quad, (n + 2) * (n + t1) * (n + t2) / den)
    alpha = _cscale((Fraction(3), Fraction(4)), a)
    beta = _cmul((Fraction(2), Fraction(4)), b)
    return alpha, beta


def amplitude_table_by_recursion(ell_max: int, j: int, backend: str = EXACT,
                                 exact_cap: int = DEFAULT_EXACT_CAP) -> list:
    """``[mu(S_l = j) for l in range(|j|, ell_max + 1)]`` via the length recursions.

    Even and odd lengths run as two interleaved second order recursions seeded by
    ``initial_values``.  Negative ``j`` is served by symmetry.
    """
    j = abs(j)
    _check_args(ell_max, j, backend, exact_cap)
    seeds = initial_values(j)[: ell_max - j + 1]
    if backend == EXACT:
        out = [_cfrac(s) for s in seeds]
        for target in range(j + 4, ell_max + 1):
            alpha, beta = length_recursion_coefficients(target, j)
            k = target - j
            out.append(_csub(_cmul(alpha, out[k - 4]), _cmul(beta, out[k - 2])))
        return [_to_gauss(v, j + k) for k, v in enumerate(out)]
    out = [exact_to_mantissa(s, j + k) for k, s in enumerate(seeds)]
    for target in range(j + 4, ell_max + 1):
        alpha, beta = length_recursion_coefficients(target, j)
        al = complex(float(alpha[0]), float(alpha[1])) / 25.0
        be = complex(float(beta[0]), float(beta[1])) / 5.0
        k = target - j
        out.append(al * out[k - 4] - be * out[k - 2])
    return [ScaledAmplitude(v, j + k) for k, v in enumerate(out)]


# ---------------------------------------------------------------------------
# reverse recursion in the endpoint
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RatioSingularity:
    """A zero denominator met by the ratio recursion at index ``m``."""

    n: int
    m: int


@dataclass(frozen=True)
class MRow:
    """``a_{n,m} = mu(S_2n = 2m)`` and ratios ``rho_{n,m} = a_{n,m+1}/a_{n,m}``.

    Both sequences are indexed by ``m`` (position ``m`` holds index ``m``).
    Entries of ``ratios`` are ``None`` where a ``RatioSingularity`` occurred.
    """

    n: int
    values: list
    ratios: list
    backend: str
    singularities: list = field(default_factory=list)


def _m_coefficients(n: int, m: int):
    """``(mu_nm, e_nm, den_nm)`` as exact rationals; ``mu_nm`` is complex."""
    nf, mf = Fraction(n), Fraction(m)
    h = mf + Fraction(1, 2)
    mu_re = (2 + 1 / h) * ((1 - h / nf) * (1 + (mf + Fraction(3, 2)) / nf) - 1 / (2 * nf))
    mu_im = 8 * (mf + 1) * (mf + Fraction(3, 2)) / (nf * nf)
    e = (1 + (mf + Fraction(3, 2)) / nf) * (1 + (mf + 2) / nf)
    den = (1 + 1 / h) * (1 - mf / nf) * (1 - h / nf)
    return (mu_re, mu_im), e, den


def amplitude_row_by_m_recursion(n: int, backend: str = EXACT,
                                 exact_cap: int = DEFAULT_EXACT_CAP) -> MRow:
    """Fill ``a_{n,m}`` for ``m = n, ..., 0`` from ``a_{n,n} = (-1)**n 4**(-n)``.

    Ratios come from the first order form with ``rho_{n,n} = 0``.  A zero
    denominator there is recorded, not raised.
    """
    if n < 1:
        raise DomainError("half-length n must be >= 1")
    _check_args(2 * n, 0, backend, exact_cap)
    coeffs = [_m_coefficients(n, m) for m in range(n)]
    ratios: list = [None] * (n + 1)
    sing = []
    if backend == EXACT:
        vals = [None] * (n + 2)
        vals[n + 1] = (Fraction(0), Fraction(0))
        vals[n] = (Fraction((-1) ** n, 1 << (2 * n)), Fraction(0))
        for m in range(n - 1, -1, -1):
            mu, e, den = coeffs[m]
            num = _csub(_cmul(mu, vals[m + 1]), _cscale(vals[m + 2], e))
            vals[m] = _cscale(num, 1 / den)
        values = [_to_gauss(v, 2 * n) for v in vals[: n + 1]]
        ratios[n] = (Fraction(0), Fraction(0))
        for m in range(n - 1, -1, -1):
            mu, e, den = coeffs[m]
            nxt = ratios[m + 1]
            if nxt is None:
                ratios[m] = (Fraction(0), Fraction(0))
                continue
            d = _csub(mu, _cscale(nxt, e))
            if d == (0, 0):
                sing.append(RatioSingularity(n, m))
                continue
            ratios[m] = _cdiv((den, Fraction(0)), d)
        return MRow(n, values, ratios, EXACT, sing)

    # floating: renormalise the pair of running values, track the log scale
    fc = [(complex(float(mu[0]), float(mu[1])), float(e), float(den)) for mu, e, den in coeffs]
    x1, x2 = complex((-1) ** n), 0j
    log_scale = -2 * n * LOG2 - n * LOG5
    mant = [0j] * (n + 1)
    mant[n] = x1 * math.exp(log_scale)
    for m in range(n - 1, -1, -1):
        mu, e, den = fc[m]
        x0 = (mu * x1 - e * x2) / den
        big = abs(x0)
        if big > 1e100 or (0 < big < 1e-100):
            x0, x1 = x0 / big, x1 / big
            log_scale += math.log(big)
        mant[m] = x0 * math.exp(log_scale)
        x1, x2 = x0, x1
    values = [ScaledAmplitude(v, 2 * n) for v in mant]
    ratios[n] = 0j
    for m in range(n - 1, -1, -1):
        mu, e, den = fc[m]
        nxt = ratios[m + 1]
        if nxt is None or math.isinf(abs(nxt)):
            ratios[m] = 0j
            continue
        d = mu - e * nxt
        if d == 0:
            sing.append(RatioSingularity(n, m))
            continue
        ratios[m] = den / d
    return MRow(n, values, ratios, SCALED, sing)


def ratio_row_scaled(n: int) -> np.ndarray:
    """Floating ``rho_{n,m}`` for ``m = 0..n`` from the ratio recursion alone.

    Needs no absolute scale, so it works for any ``n``.
    """
    out = np.zeros(n + 1, dtype=complex)
    for m in range(n - 1, -1, -1):
        (mu_re, mu_im), e, den = _m_coefficients_float(n, m)
        out[m] = den / (complex(mu_re, mu_im) - e * out[m + 1])
    return out


def _m_coefficients_float(n, m):
    h = m + 0.5
    mu_re = (2 + 1 / h) * ((1 - h / n) * (1 + (m + 1.5) / n) - 1 / (2 * n))
    mu_im = 8 * (m + 1) * (m + 1.5) / (n * n)
    e = (1 + (m + 1.5) / n) * (1 + (m + 2) / n)
    den = (1 + 1 / h) * (1 - m / n) * (1 - h / n)
    return (mu_re, mu_im), e, den


# ---------------------------------------------------------------------------
# whole tables by forward convolution
# ---------------------------------------------------------------------------
def iter_exact_rows(ell_max: int) -> Iterator[tuple[int, list, list]]:
    """Yield ``(ell, re, im)`` with ``mu(S_ell = j) = (re[j+ell] + i im[j+ell]) / 2**ell``.

    One step multiplies by ``2`` and convolves with ``(i, 2 - 2i, i)``.
    """
    re, im = [1], [0]
    yield 0, re, im
    for ell in range(1, ell_max + 1):
        pr = [0, 0] + re + [0, 0]
        pi = [0, 0] + im + [0, 0]
        new_re = [0] * (2 * ell + 1)
        new_im = [0] * (2 * ell + 1)
        for x in range(2 * ell + 1):
            a, b, c = x, x + 1, x + 2
            new_re[x] = 2 * (pr[b] + pi[b]) - pi[a] - pi[c]
            new_im[x] = 2 * (pi[b] - pr[b]) + pr[a] + pr[c]
        re, im = new_re, new_im
        yield ell, re, im


_STEP_KERNEL = np.array([0.5j, 1 - 1j, 0.5j]) / SQRT5


def iter_scaled_rows(ell_max: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(ell, mantissas)`` for ``j = -ell..ell`` in the scaled frame."""
    row = np.ones(1, dtype=complex)
    yield 0, row
    for ell in range(1, ell_max + 1):
        row = np.convolve(row, _STEP_KERNEL)
        yield ell, row


@dataclass(frozen=True)
class AmplitudeTable:
    """All ``mu(S_l = j)``, ``|j| <= l``, for one length.

    ``values[j + length]`` is a ``GaussianRational`` (exact backend) or the
    complex mantissa (scaled backend).
    """

    length: int
    values: tuple
    backend: str

    def __post_init__(self):
        _check_backend(self.backend)
        if len(self.values) != 2 * self.length + 1:
            raise ValueError("table must hold 2*length + 1 values")

    def __getitem__(self, j: int):
        if abs(j) > self.length:
            return ZERO if self.backend == EXACT else 0j
        return self.values[j + self.length]

    @property
    def js(self) -> np.ndarray:
        return np.arange(-self.length, self.length + 1)

    def mantissas(self) -> np.ndarray:
        """Values in the scaled frame, whatever the backend."""
        if self.backend == SCALED:
            return np.asarray(self.values, dtype=complex)
        return np.array([exact_to_mantissa(v, self.length) for v in self.values])

    def abs2_exact(self) -> list[int]:
        """``|mu|**2 * 4**length`` as integers (exact backend only)."""
        if self.backend != EXACT:
            raise BackendError("exact squared moduli need the exact backend")
        out = []
        for v in self.values:
            w = v.rescaled(self.length)
            out.append(w.re * w.re + w.im * w.im)
        return out

    def to_scaled(self) -> "AmplitudeTable":
        return AmplitudeTable(self.length, tuple(self.mantissas()), SCALED)

    def total_variation_scaled(self) -> float:
        """``sum_j |mu| * 5**(-length/2)``."""
        return float(np.abs(self.mantissas()).sum())

    # serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        vals = []
        for j, v in zip(range(-self.length, self.length + 1), self.values):
            if self.backend == EXACT:
                vals.append({"j": j, "re": str(v.re), "im": str(v.im), "denom_exp": v.k})
            else:
                v = complex(v)
                vals.append({"j": j, "re": v.real, "im": v.imag, "denom_exp": None})
        return {"ell": self.length, "backend": self.backend, "values": vals}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "AmplitudeTable":
        ell, backend = int(d["ell"]), d["backend"]
        entries = sorted(d["values"], key=lambda e: int(e["j"]))
        if backend == EXACT:
            vals = tuple(GaussianRational(int(e["re"]), int(e["im"]), int(e["denom_exp"]))
                         for e in entries)
        else:
            vals = tuple(complex(float(e["re"]), float(e["im"])) for e in entries)
        return cls(ell, vals, backend)

    @classmethod
    def from_json(cls, text: str) -> "AmplitudeTable":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Columns ``j, re, im, abs, arg``.

        Exact tables export the true value; scaled tables export the mantissa.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "re", "im", "abs", "arg"])
        for j, v in zip(range(-self.length, self.length + 1), self.values):
            z = complex(v)
            w.writerow([j, repr(z.real), repr(z.imag), repr(abs(z)), repr(math.atan2(z.imag, z.real))])
        return buf.getvalue()


def amplitude_table(ell: int, backend: str = EXACT,
                    exact_cap: int = DEFAULT_EXACT_CAP) -> AmplitudeTable:
    """Full table at length ``ell`` by forward convolution."""
    _check_args(ell, 0, backend, exact_cap)
    if backend == EXACT:
        for _, re, im in iter_exact_rows(ell):
            pass
        return AmplitudeTable(ell, tuple(GaussianRational(a, b, ell) for a, b in zip(re, im)), EXACT)
    for _, row in iter_scaled_rows(ell):
        pass
    return AmplitudeTable(ell, tuple(complex(v) for v in row), SCALED)


def table_from_method(ell: int, method: str) -> AmplitudeTable:
    """Exact table built entry by entry from ``direct``, ``hypergeometric`` or ``recursion``."""
    if method == "direct":
        vals = [amplitude_direct(ell, j) for j in range(-ell, ell + 1)]
    elif method == "hypergeometric":
        vals = [amplitude_hypergeometric(ell, j) for j in range(-ell, ell + 1)]
    elif method == "recursion":
        cols = {j: amplitude_table_by_recursion(ell, j)[-1] for j in range(ell + 1)}
        vals = [cols[abs(j)] for j in range(-ell, ell + 1)]
    else:
        raise ValueError(f"unknown method {method!r}")
    return AmplitudeTable(ell, tuple(vals), EXACT)


def sum_check(table: AmplitudeTable):
    """``sum_j mu(S_l = j) - 1``.

    Exact tables give a ``GaussianRational`` (zero for valid tables).  Scaled
    tables give the residual in the scaled frame, ``(sum mu - 1) * 5**(-l/2)``,
    which should be compared against ``table.total_variation_scaled()``.
    """
    if table.backend == EXACT:
        total = ZERO
        for v in table.values:
            total = total + v
        return total - ONE
    s = complex(np.sum(np.asarray(table.values, dtype=complex)))
    return s - 5.0 ** (-0.5 * table.length)


def enumerate_paths(ell: int, step: StepLaw = CANONICAL_STEP) -> dict[int, GaussianRational]:
    """Brute force over all ``3**ell`` step sequences."""
    amp = {-1: step.p, 0: step.q, 1: step.p}
    out: dict[int, GaussianRational] = {}
    for path in itertools.product((-1, 0, 1), repeat=ell):
        w = ONE
        for s in path:
            w = w * amp[s]
        end = sum(path)
        out[end] = out.get(end, ZERO) + w
    return out


def four_method_report(ell: int) -> dict:
    """Compare all routes at length ``ell`` entry by entry (exact backend)."""
    ref = table_from_method(ell, "direct")
    report = {"ell": ell, "entries": 2 * ell + 1, "mismatches": {}}
    for method in ("hypergeometric", "recursion"):
        other = table_from_method(ell, method)
        bad = [j for j in range(-ell, ell + 1) if other[j] != ref[j]]
        report["mismatches"][method] = bad
    conv = amplitude_table(ell)
    report["mismatches"]["convolution"] = [j for j in range(-ell, ell + 1) if conv[j] != ref[j]]
    if ell % 2 == 0 and ell > 0:
        row = amplitude_row_by_m_recursion(ell // 2)
        bad = [2 * m for m in range(ell // 2 + 1)
               if row.values[m] != ref[2 * m]]
        report["mismatches"]["m_recursion"] = bad
    report["agree"] = all(not v for v in report["mismatches"].values())
    return report


__all__ = [
    "AmplitudeTable", "BackendError", "CANONICAL_STEP", "DEFAULT_EXACT_CAP",
    "DomainError", "EXACT", "MRow", "RatioSingularity", "SCALED", "ScaledAmplitude",
    "StepLaw", "amplitude_direct", "amplitude_hypergeometric",
    "amplitude_row_by_m_recursion", "amplitude_table", "amplitude_table_by_recursion",
    "enumerate_paths", "exact_to_mantissa", "four_method_report", "hyp2f1_terminating",
    "initial_values", "iter_exact_rows", "iter_scaled_rows", "length_recursion_coefficients",
    "ratio_row_scaled", "sum_check", "table_from_method",
]
