"""Exact dyadic Gaussian rationals ``(re + i*im) / 2**k``.

Every amplitude of the walk with step weights ``i/2`` and ``1 - i`` lives in
``Z[i] / 2**l``, so these two big integers and one exponent are enough to
represent them without rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, eq=False)
class GaussianRational:
    """Value ``(re + i*im) / 2**k`` with Python integers.

    The representation is not reduced: ``k`` is normally the walk length that
    produced the number.  Equality cross-multiplies, so ``(2, 0, 1) == (1, 0, 0)``.
    """

    re: int
    im: int
    k: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("denominator exponent must be non-negative")

    @classmethod
    def from_fractions(cls, re, im, k=None) -> "GaussianRational":
        """Build from rational parts whose denominators are powers of two.

        If ``k`` is given the result is expressed over ``2**k``.
        """
        re, im = Fraction(re), Fraction(im)
        need = max(_dyadic_exp(re.denominator), _dyadic_exp(im.denominator))
        if k is None:
            k = need
        elif k < need:
            raise ValueError(f"value needs denominator 2**{need}, got k={k}")
        scale = 1 << k
        return cls(int(re * scale), int(im * scale), k)

    def rescaled(self, k: int) -> "GaussianRational":
        """Same value over ``2**k``; ``k`` may be smaller only if it divides out."""
        if k >= self.k:
            s = k - self.k
            return GaussianRational(self.re << s, self.im << s, k)
        s = self.k - k
        mask = (1 << s) - 1
        if self.re & mask or self.im & mask:
            raise ValueError(f"cannot express over 2**{k} exactly")
        return GaussianRational(self.re >> s, self.im >> s, k)

    def reduced(self) -> "GaussianRational":
        re, im, k = self.re, self.im, self.k
        if re == 0 and im == 0:
            return GaussianRational(0, 0, 0)
        while k > 0 and not (re & 1) and not (im & 1):
            re >>= 1
            im >>= 1
            k -= 1
        return GaussianRational(re, im, k)

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, int):
            return GaussianRational(other, 0, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        k = max(self.k, other.k)
        a, b = self.rescaled(k), other.rescaled(k)
        return GaussianRational(a.re + b.re, a.im + b.im, k)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im, self.k)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.re, self.im, other.re, other.im
        return GaussianRational(a * c - b * d, a * d + b * c, self.k + other.k)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        k = max(self.k, other.k)
        a, b = self.rescaled(k), other.rescaled(k)
        return a.re == b.re and a.im == b.im

    def __hash__(self):
        r = self.reduced()
        return hash((r.re, r.im, r.k))

    def __bool__(self):
        return bool(self.re or self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im, self.k)

    def norm2(self) -> Fraction:
        """Squared modulus as an exact fraction."""
        return Fraction(self.re * self.re + self.im * self.im, 1 << (2 * self.k))

    # conversions ----------------------------------------------------------
    @property
    def real(self) -> Fraction:
        return Fraction(self.re, 1 << self.k)

    @property
    def imag(self) -> Fraction:
        return Fraction(self.im, 1 << self.k)

    def __complex__(self):
        d = 1 << self.k
        return complex(self.re / d, self.im / d)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im}, k={self.k})"

    def __str__(self):
        return f"({self.real}) + ({self.imag})i"


def _dyadic_exp(den: int) -> int:
    k = den.bit_length() - 1
    if den != 1 << k:
        raise ValueError(f"denominator {den} is not a power of two")
    return k


ZERO = GaussianRational(0, 0, 0)
ONE = GaussianRational(1, 0, 0)
I_HALF = GaussianRational(0, 1, 1)
ONE_MINUS_I = GaussianRational(1, -1, 0)
