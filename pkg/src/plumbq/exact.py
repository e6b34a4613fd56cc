"""Exact scalar arithmetic: rationals, Bernoulli polynomials, big-float complex."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf, mpc

Rational = Fraction


def frac(x) -> Fraction:
    """Parse a rational from int, Fraction, or a 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def lcm(*ns: int) -> int:
    out = 1
    for n in ns:
        out = out * abs(n) // math.gcd(out, abs(n)) if n else out
    return out


def binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def gen_binomial(x, k: int) -> Fraction:
    """Binomial coefficient with arbitrary rational top, integer k >= 0."""
    if k < 0:
        return Fraction(0)
    x = frac(x)
    num = Fraction(1)
    for i in range(k):
        num *= x - i
    return num / math.factorial(k)


_BERNOULLI: list[Fraction] = [Fraction(1)]


def bernoulli_number(i: int) -> Fraction:
    """B_i with the convention B_1 = -1/2."""
    while len(_BERNOULLI) <= i:
        m = len(_BERNOULLI)
        # sum_{j<m} C(m+1, j) B_j + C(m+1, m) B_m = 0
        s = sum(binomial(m + 1, j) * _BERNOULLI[j] for j in range(m))
        _BERNOULLI.append(Fraction(-s, m + 1))
    return _BERNOULLI[i]


def bernoulli_polynomial(i: int, x) -> Fraction:
    """B_i(x) = sum_j C(i,j) B_j x^(i-j); B_1(0) = -1/2."""
    if i < 0:
        raise ValueError("index must be non-negative")
    x = frac(x)
    acc = Fraction(0)
    xp = Fraction(1)
    for j in range(i, -1, -1):
        acc += binomial(i, j) * bernoulli_number(j) * xp
        xp *= x
    return acc


@dataclass(frozen=True)
class BigComplex:
    """Arbitrary-precision complex scalar tagged with its working precision."""

    re: object
    im: object
    bits: int

    @classmethod
    def from_mpc(cls, z, bits: int) -> "BigComplex":
        z = mpc(z)
        return cls(z.real, z.imag, bits)

    def to_mpc(self):
        return mpc(self.re, self.im)

    def __add__(self, other: "BigComplex") -> "BigComplex":
        bits = min(self.bits, other.bits)
        with mp.workprec(bits):
            return BigComplex.from_mpc(self.to_mpc() + other.to_mpc(), bits)

    def __sub__(self, other: "BigComplex") -> "BigComplex":
        bits = min(self.bits, other.bits)
        with mp.workprec(bits):
            return BigComplex.from_mpc(self.to_mpc() - other.to_mpc(), bits)

    def abs(self):
        with mp.workprec(self.bits):
            return abs(self.to_mpc())

    def to_json(self, dps: int | None = None) -> dict:
        d = dps if dps is not None else max(2, int(self.bits / 3.33))
        return {
            "re": mp.nstr(mpf(self.re), d, strip_zeros=False),
            "im": mp.nstr(mpf(self.im), d, strip_zeros=False),
            "precision_bits": self.bits,
        }


def e_of(x, bits: int):
    """e(x) = exp(2 pi i x) as an mpc at the given precision, x rational or float."""
    with mp.workprec(bits + 10):
        if isinstance(x, Fraction):
            t = 2 * mpf(x.numerator) / mpf(x.denominator)
        else:
            t = 2 * mpf(x)
        return mp.expjpi(t)


def floor_sqrt_frac(x: Fraction) -> int:
    """floor(sqrt(p/q)) for x = p/q >= 0."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    p, q = x.numerator, x.denominator
    return math.isqrt(p * q) // q


def quad_int_range(a: int, b: int, c: int):
    """Integer solutions of a*x^2 + b*x + c <= 0 with a > 0.

    Returns an inclusive (lo, hi) pair or None when empty. The isqrt-based
    endpoints are corrected by a final exact check, so the range is exact.
    """
    if a <= 0:
        raise ValueError("leading coefficient must be positive")
    disc = b * b - 4 * a * c
    if disc < 0:
        return None
    r = math.isqrt(disc)
    lo = -(-(-b - r) // (2 * a))  # ceil((-b - r) / (2a))
    hi = (-b + r) // (2 * a)
    # exact correction: sqrt(disc) in [r, r+1)
    while a * lo * lo + b * lo + c > 0:
        lo += 1
    while a * (lo - 1) ** 2 + b * (lo - 1) + c <= 0:
        lo -= 1
    while a * hi * hi + b * hi + c > 0:
        hi -= 1
    while a * (hi + 1) ** 2 + b * (hi + 1) + c <= 0:
        hi += 1
    if lo > hi:
        return None
    return lo, hi
