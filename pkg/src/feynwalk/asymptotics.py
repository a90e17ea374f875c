"""Large-length behaviour of the amplitudes in the ``5**(l/2)``-scaled frame.

For ``|j| <= l**(2/3)/3`` the amplitude is close to

    sqrt(2/l) * (c1_j e^{i j^2/(2l)} + c2 e^{i pi j - (2+i) j^2/(2l)} (-3-4i)^{l/2}),

and the second term dominates.  Half-integer powers of ``-3-4i`` use the
principal branch, ``arg = atan2(-4, -3)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .amplitudes import SCALED, amplitude_table_by_recursion, initial_values, exact_to_mantissa

THETA = math.atan2(-4.0, -3.0)
Z0 = (1 + 8j) / 6
Z1 = (1 + 1j) / 8
C2_CONJECTURE = cmath.sqrt((2 + 1j) * math.pi / 40)
C2_PAPER_N1000 = 0.410514 + 0.0969363j
H_INH_INF0_PAPER = -0.156498 + 0.849953j
LOG5 = math.log(5.0)


def unit_power(ell_half: float) -> complex:
    """``(-3-4i)**ell_half / 5**ell_half`` on the principal branch."""
    return cmath.exp(1j * THETA * ell_half)


# ---------------------------------------------------------------------------
# c2
# ---------------------------------------------------------------------------
def _even_center_mantissas(n_max: int) -> np.ndarray:
    seq = amplitude_table_by_recursion(2 * n_max, 0, SCALED)
    return np.array([seq[2 * n].mantissa for n in range(n_max + 1)])


def estimate_c2(n: int) -> complex:
    """``a_{n,0} sqrt(n) / (-3-4i)**n`` from the scaled length recursion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    b = _even_center_mantissas(n)[n]
    return complex(b * math.sqrt(n) * unit_power(-n))


def estimate_c2_sequence(n_max: int) -> np.ndarray:
    """Estimates for every ``n = 1..n_max`` in one recursion pass."""
    b = _even_center_mantissas(n_max)[1:]
    ns = np.arange(1, n_max + 1)
    return b * np.sqrt(ns) * np.exp(-1j * THETA * ns)


@dataclass(frozen=True)
class C2Extrapolation:
    """Fit ``est(n) = c2 (1 + kappa/n + lam/n**2)`` on ``n, 2n, 4n``."""

    c2: complex
    kappa: complex
    lam: complex
    ns: tuple


def extrapolate_c2(n: int) -> C2Extrapolation:
    seq = estimate_c2_sequence(4 * n)
    ns = (n, 2 * n, 4 * n)
    A = np.array([[1, 1 / k, 1 / k ** 2] for k in ns], dtype=complex)
    y = np.array([seq[k - 1] for k in ns])
    c, k1, k2 = np.linalg.solve(A, y)
    return C2Extrapolation(complex(c), complex(k1 / c), complex(k2 / c), ns)


# ---------------------------------------------------------------------------
# inhomogeneous correction series
# ---------------------------------------------------------------------------
def g_coefficient(k, m):
    k = np.asarray(k, dtype=float)
    return ((-19 + 317j) / (400 * k ** 3) - (73 - 14j) / 25 * m ** 2 / k ** 3
            + (1 + 8j) / 3 * m ** 8 / k ** 7)


def _first_weight(k, m, exponent_sign=-1.0):
    k = np.asarray(k, dtype=float)
    ex = exponent_sign * (2 + 2j) * (m ** 2 - 1 / 16) / ((k + 1) * (k + 2))
    return 1 / (1 + np.exp(ex) / (3 + 4j))


def _second_weight(k, m):
    k = np.asarray(k, dtype=float)
    return 1 / (1 + (3 + 4j) * np.exp((2 + 2j) * (m ** 2 - 1 / 16) / ((k + 1) * (k + 2))))


def tail_terms_needed(m: float, tol: float = 1e-10) -> int:
    """Smallest ``K`` whose analytic tail bound for the limit series is below ``tol``.

    Uses ``|weight| <= 1.3``, ``sum_{k>K} k**-3 <= 1/(2K**2)`` and
    ``sum_{k>K} k**-7 <= 1/(6K**6)``.
    """
    a = abs(-19 + 317j) / 400 + abs(73 - 14j) / 25 * m ** 2
    b = abs(1 + 8j) / 3 * m ** 8
    w = 1.3 * math.exp(1 / 48)

    def bound(K):
        return w * (a / (2 * K ** 2) + b / (6 * K ** 6))

    K = 1
    while bound(K) >= tol:
        K *= 2
    lo, hi = K // 2, K
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) >= tol:
            lo = mid
        else:
            hi = mid
    return hi


def h_inh_limit(m: float, tol: float = 1e-10, exponent_sign: float = -1.0) -> complex:
    """Limit of the first correction sum as ``n -> infinity``.

    ``exponent_sign`` selects the sign inside the exponential of the
    denominator; the default is the form derived for the recursion.
    """
    K = tail_terms_needed(m, tol)
    k = np.arange(1, K + 1, dtype=float)
    terms = g_coefficient(k, m) * _first_weight(k, m, exponent_sign) * np.exp((1 - 1j) / (16 * (k + 2)))
    # add small terms first
    terms = terms[::-1]
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def h_inh_partial(n: int, m: float) -> complex:
    """Finite-``n`` correction: both sums truncated at ``k = n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=float)
    g = g_coefficient(k, m)
    lag = 1 / (k + 2) - 1 / n
    s1 = g * _first_weight(k, m) * np.exp((1 - 1j) / 16 * lag)
    # (-3-4i)**(k-n+2) = 5**(k-n+2) e^{i theta (k-n+2)}
    e = k - n + 2
    osc = np.exp(e * LOG5 + 1j * THETA * e)
    s2 = g * np.exp((-(2 + 2j) * m ** 2 + (3 + 1j) / 16) * lag) * osc * _second_weight(k, m)
    tot = (s1 + s2)[::-1]
    return complex(math.fsum(tot.real), math.fsum(tot.imag))


@dataclass(frozen=True)
class InhomogeneousSeries:
    m: float
    partial_sums: np.ndarray  # index n - 1 holds the truncation at n
    limit: complex

    def distance(self) -> np.ndarray:
        return np.abs(self.partial_sums - self.limit)


def h_inh_series(m: float, n_max: int, tol: float = 1e-10) -> InhomogeneousSeries:
    sums = np.array([h_inh_partial(n, m) for n in range(1, n_max + 1)])
    return InhomogeneousSeries(m, sums, h_inh_limit(m, tol))


# ---------------------------------------------------------------------------
# parameters and the main/error terms
# ---------------------------------------------------------------------------
@dataclass
class AsymptoticParams:
    """Constants of the asymptotic expansion.

    ``c1``, ``d1`` and ``d2`` are filled lazily from the boundary conditions.
    """

    c2: complex
    z0: complex = Z0
    z1: complex = Z1
    c1: dict = field(default_factory=dict)
    d1: dict = field(default_factory=dict)
    d2: dict = field(default_factory=dict)

    @classmethod
    def from_estimate(cls, n: int = 1000) -> "AsymptoticParams":
        return cls(estimate_c2(n))

    @classmethod
    def extrapolated(cls, n: int = 1000) -> "AsymptoticParams":
        return cls(extrapolate_c2(n).c2)

    def c1_of(self, j: int) -> complex:
        """``c1_j`` chosen so the main term is exact at the first length reaching ``j``.

        That length is ``|j|``, or 2 for ``j = 0``.  The returned value is in
        the unscaled frame.
        """
        j = abs(j)
        if j not in self.c1:
            ell0 = j if j else 2
            mu0 = complex(initial_values(j)[ell0 - j])
            quad = j * j / (2 * ell0)
            # c2 e^{i pi j - (2+i) j^2/(2 l0)} (-3-4i)^{l0/2}, combined in log form
            dom = self.c2 * cmath.exp(1j * math.pi * j - (2 + 1j) * quad
                                      + 0.5 * ell0 * LOG5 + 0.5j * THETA * ell0)
            self.c1[j] = (mu0 * math.sqrt(ell0 / 2) - dom) * cmath.exp(-1j * quad)
        return self.c1[j]

    def d1_of(self, m: int) -> complex:
        if m not in self.d1:
            self.d1[m] = -h_inh_limit(m)
        return self.d1[m]

    def d2_of(self, m: int) -> complex:
        if m not in self.d2:
            d1 = self.d1_of(m)
            if m == 0:
                val = ((self.z1 + d1 * cmath.exp((-1 + 1j) / 16) + h_inh_partial(1, 0))
                       * (3 + 4j) * cmath.exp((3 + 1j) / 16))
            else:
                inner = (self.z0 * m + self.z1 / m + d1 * cmath.exp((-1 + 1j) / (16 * m))
                         + h_inh_partial(m, m))
                val = -inner * cmath.exp(m * LOG5 + 1j * THETA * m - (2 + 2j) * m + (3 + 1j) / (16 * m))
            self.d2[m] = val
        return self.d2[m]


def main_term(ell: int, j: int, params: AsymptoticParams) -> complex:
    """Main term divided by ``5**(l/2)``."""
    if ell < 1 or abs(j) > ell:
        raise ValueError("need l >= 1 and |j| <= l")
    quad = j * j / (2 * ell)
    dom = params.c2 * cmath.exp(1j * math.pi * j - (2 + 1j) * quad) * unit_power(ell / 2)
    sub = params.c1_of(j) * cmath.exp(1j * quad - 0.5 * ell * LOG5)
    return math.sqrt(2 / ell) * (sub + dom)


def main_modulus(ell: int, j: int, c2: complex) -> float:
    """``sqrt(2/l) |c2| e^{-j^2/l}``, the dominant size in the scaled frame."""
    return math.sqrt(2 / ell) * abs(c2) * math.exp(-j * j / ell)


def h_total(n: int, m: int, params: AsymptoticParams) -> complex:
    """Assembled correction ``h''_{n,m}`` (homogeneous plus particular part)."""
    d1, d2 = params.d1_of(m), params.d2_of(m)
    hom2 = d2 * cmath.exp((2 + 2j) * m * m / n - (3 + 1j) / (16 * n) - n * LOG5 - 1j * THETA * n)
    return d1 * cmath.exp((-1 + 1j) / (16 * n)) + hom2 + h_inh_partial(n, m)


def error_term(ell: int, j: int, params: AsymptoticParams) -> complex:
    """Correction to ``main_term`` in the scaled frame (even ``l`` and ``j`` only)."""
    if ell % 2 or j % 2:
        raise ValueError("the correction is assembled for even length and endpoint")
    n, m = ell // 2, abs(j) // 2
    bracket = params.z0 * m ** 4 / n ** 3 + params.z1 / n + h_total(n, m, params)
    pref = params.c2 / math.sqrt(n) * cmath.exp(-(2 + 1j) * m * m / n) * unit_power(n)
    return pref * bracket


@dataclass(frozen=True)
class ResidualRow:
    ell: int
    j: int
    relative_error: float
    modulus_ratio: float


def residual_table(ells, params: AsymptoticParams, exact_cap: int = 512) -> list[ResidualRow]:
    """Main-term residuals against the scaled convolution over the central window."""
    from .amplitudes import amplitude_table, EXACT

    rows = []
    for ell in ells:
        table = amplitude_table(ell, EXACT if ell <= exact_cap else SCALED, exact_cap)
        mant = table.mantissas()
        w = int(math.floor(ell ** (2 / 3) / 3))
        for j in range(-w, w + 1):
            exact = mant[j + ell]
            approx = main_term(ell, j, params)
            rows.append(ResidualRow(ell, j, float(abs(exact - approx) / abs(exact)),
                                    float(abs(exact) / main_modulus(ell, j, params.c2))))
    return rows


def fitted_constant(rows: list[ResidualRow]) -> float:
    """Smallest ``C`` with ``|ratio - 1| <= C l**(-1/3)`` on all rows."""
    return max(abs(r.modulus_ratio - 1) * r.ell ** (1 / 3) for r in rows)


__all__ = [
    "AsymptoticParams", "C2Extrapolation", "C2_CONJECTURE", "C2_PAPER_N1000",
    "H_INH_INF0_PAPER", "InhomogeneousSeries", "ResidualRow", "THETA", "Z0", "Z1",
    "error_term", "estimate_c2", "estimate_c2_sequence", "extrapolate_c2", "fitted_constant",
    "g_coefficient", "h_inh_limit", "h_inh_partial", "h_inh_series", "h_total", "main_modulus",
    "main_term", "residual_table", "tail_terms_needed", "unit_power", "exact_to_mantissa",
]
