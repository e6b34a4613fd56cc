"""Exact arithmetic in cyclotomic fields.

Elements of Q(zeta_N) are held sparsely in the group algebra Q[x]/(x^N - 1)
(dict exponent -> Fraction), which keeps products of a few roots of unity
cheap. Zero tests and the canonical power basis of length phi(N) go through
reduction modulo the N-th cyclotomic polynomial, done in integer arithmetic
after clearing denominators (the cyclotomic polynomial is monic).
"""
from __future__ import annotations

import math
from fractions import Fraction

from mpmath import mp, mpc, mpf

from .exact import lcm


def euler_phi(n: int) -> int:
    out = n
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            out -= out // p
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out -= out // m
    return out


def _divisors(n: int) -> list[int]:
    ds = []
    for d in range(1, int(math.isqrt(n)) + 1):
        if n % d == 0:
            ds.append(d)
            if d != n // d:
                ds.append(n // d)
    return sorted(ds)


def _poly_divmod_int(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Division of integer polynomials; den need not be monic but must divide
    exactly when used for cyclotomic construction."""
    num = list(num)
    dd = len(den) - 1
    dlead = den[-1]
    q = [0] * max(1, len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c == 0:
            continue
        assert c % dlead == 0, "non-exact polynomial division"
        f = c // dlead
        q[i - dd] = f
        for j, dj in enumerate(den):
            num[i - dd + j] -= f * dj
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return q, num


_CYCLO_POLY: dict[int, list[int]] = {1: [-1, 1]}


def cyclotomic_polynomial(n: int) -> list[int]:
    """Coefficient list (ascending) of the n-th cyclotomic polynomial."""
    if n in _CYCLO_POLY:
        return _CYCLO_POLY[n]
    num = [0] * (n + 1)
    num[0], num[n] = -1, 1  # x^n - 1
    for d in _divisors(n):
        if d < n:
            num, rem = _poly_divmod_int(num, cyclotomic_polynomial(d))
            assert all(c == 0 for c in rem)
    _CYCLO_POLY[n] = num
    return num


def _reduce_int_poly_mod_cyclo(coeffs: list[int], n: int) -> list[int]:
    """Remainder of an integer polynomial modulo Phi_n (monic, so exact)."""
    phi_poly = cyclotomic_polynomial(n)
    deg = len(phi_poly) - 1
    r = list(coeffs)
    for i in range(len(r) - 1, deg - 1, -1):
        c = r[i]
        if c:
            for j in range(deg + 1):
                r[i - deg + j] -= c * phi_poly[j]
    del r[deg:]
    while len(r) < deg:
        r.append(0)
    return r


class CyclotomicNumber:
    """Exact element of Q(zeta_N), N = self.order."""

    __slots__ = ("order", "_c")

    def __init__(self, order: int, coeffs: dict[int, Fraction] | None = None):
        if order < 1:
            raise ValueError("order must be positive")
        self.order = order
        c: dict[int, Fraction] = {}
        if coeffs:
            for j, v in coeffs.items():
                if v:
                    j %= order
                    w = c.get(j)
                    if w is None:
                        c[j] = v
                    else:
                        w += v
                        if w:
                            c[j] = w
                        else:
                            del c[j]
        self._c = c

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, order: int) -> "CyclotomicNumber":
        return cls(order)

    @classmethod
    def one(cls, order: int) -> "CyclotomicNumber":
        return cls(order, {0: Fraction(1)})

    @classmethod
    def root(cls, order: int, j: int) -> "CyclotomicNumber":
        return cls(order, {j % order: Fraction(1)})

    @classmethod
    def from_rational(cls, order: int, x) -> "CyclotomicNumber":
        return cls(order, {0: Fraction(x)})

    @classmethod
    def from_e(cls, x: Fraction, order: int) -> "CyclotomicNumber":
        """e(x) for rational x; x's denominator must divide order."""
        x = Fraction(x)
        if order % x.denominator:
            raise ValueError(f"denominator {x.denominator} does not divide order {order}")
        return cls.root(order, x.numerator * (order // x.denominator))

    # -- structure ---------------------------------------------------------

    def promote(self, order: int) -> "CyclotomicNumber":
        if order == self.order:
            return self
        if order % self.order:
            raise ValueError("can only promote to a multiple order")
        f = order // self.order
        return CyclotomicNumber(order, {j * f: v for j, v in self._c.items()})

    @staticmethod
    def _common(a: "CyclotomicNumber", b: "CyclotomicNumber"):
        if a.order == b.order:
            return a, b
        n = lcm(a.order, b.order)
        return a.promote(n), b.promote(n)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def nnz(self) -> int:
        return len(self._c)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CyclotomicNumber.from_rational(self.order, other)
        a, b = self._common(self, other)
        c = dict(a._c)
        for j, v in b._c.items():
            w = c.get(j)
            if w is None:
                c[j] = v
            else:
                w += v
                if w:
                    c[j] = w
                else:
                    del c[j]
        out = CyclotomicNumber.__new__(CyclotomicNumber)
        out.order, out._c = a.order, c
        return out

    __radd__ = __add__

    def __neg__(self):
        out = CyclotomicNumber.__new__(CyclotomicNumber)
        out.order = self.order
        out._c = {j: -v for j, v in self._c.items()}
        return out

    def __sub__(self, other):
        return self + (-other if isinstance(other, CyclotomicNumber) else CyclotomicNumber.from_rational(self.order, -Fraction(other)))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        a, b = self._common(self, other)
        n = a.order
        c: dict[int, Fraction] = {}
        for i, ci in a._c.items():
            for j, cj in b._c.items():
                k = i + j
                if k >= n:
                    k -= n
                w = c.get(k)
                if w is None:
                    c[k] = ci * cj
                else:
                    w += ci * cj
                    if w:
                        c[k] = w
                    else:
                        del c[k]
        out = CyclotomicNumber.__new__(CyclotomicNumber)
        out.order, out._c = n, c
        return out

    __rmul__ = __mul__

    def scale(self, x) -> "CyclotomicNumber":
        x = Fraction(x)
        out = CyclotomicNumber.__new__(CyclotomicNumber)
        out.order = self.order
        out._c = {} if not x else {j: v * x for j, v in self._c.items()}
        return out

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers not supported; use unit-root inverses")
        out = CyclotomicNumber.one(self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "CyclotomicNumber":
        return CyclotomicNumber(self.order, {-j: v for j, v in self._c.items()})

    # -- canonical form ------------------------------------------------------

    def is_zero(self) -> bool:
        if not self._c:
            return True
        den = lcm(*(v.denominator for v in self._c.values()))
        ints = [0] * self.order
        for j, v in self._c.items():
            ints[j] += v.numerator * (den // v.denominator)
        return all(c == 0 for c in _reduce_int_poly_mod_cyclo(ints, self.order))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CyclotomicNumber.from_rational(self.order, other)
        if not isinstance(other, CyclotomicNumber):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("unhashable; compare via power_basis()")

    def power_basis(self) -> list[Fraction]:
        """Canonical coordinates of length phi(order) in the basis 1, z, ..., z^(phi-1)."""
        phi_poly = cyclotomic_polynomial(self.order)
        deg = len(phi_poly) - 1
        r: list[Fraction] = [Fraction(0)] * max(self.order, deg)
        for j, v in self._c.items():
            r[j] += v
        for i in range(len(r) - 1, deg - 1, -1):
            c = r[i]
            if c:
                for j in range(deg + 1):
                    r[i - deg + j] -= c * phi_poly[j]
        return r[:deg]

    # -- numerics -------------------------------------------------------------

    def embed(self, bits: int):
        """Evaluate at the primitive root exp(2 pi i / order)."""
        with mp.workprec(bits + 12):
            n = self.order
            acc = mpc(0)
            for j in sorted(self._c):
                v = self._c[j]
                w = mp.expjpi(mpf(2 * j) / n)
                acc += w * mpf(v.numerator) / mpf(v.denominator)
            return +acc

    def abs_bound(self) -> Fraction:
        """Cheap upper bound on |value| (triangle inequality)."""
        return sum((abs(v) for v in self._c.values()), Fraction(0))

    def __repr__(self):
        terms = ", ".join(f"{j}: {v}" for j, v in sorted(self._c.items()))
        return f"Cyclo(order={self.order}, {{{terms}}})"


def inv_unit_root_minus_one(order: int, a: int) -> CyclotomicNumber:
    """1 / (zeta_order^a - 1) for zeta^a != 1.

    Uses 1/(w - 1) = (1/m) * sum_{i=1}^{m-1} i w^i for w a primitive m-th root.
    """
    a %= order
    if a == 0:
        raise ZeroDivisionError("zeta^a = 1")
    m = order // math.gcd(order, a)
    coeffs = {(a * i) % order: Fraction(i, m) for i in range(1, m)}
    return CyclotomicNumber(order, coeffs)


def inv_root_diff(order: int, a: int, b: int) -> CyclotomicNumber:
    """1 / (zeta^a - zeta^b) with zeta = zeta_order, a != b mod order."""
    # zeta^a - zeta^b = zeta^b (zeta^(a-b) - 1)
    return CyclotomicNumber.root(order, -b) * inv_unit_root_minus_one(order, a - b)
