"""Truncated exact series: Puiseux q-series and multivariate Laurent series.

A MultiLaurent tracks, besides its coefficients, the window on which it is
exact: per-variable lower bounds and a total-degree cap. Products propagate
the cap as min(cap_a + ord_b, cap_b + ord_a), where ord is the minimal total
degree actually present, so a chain of multiplications never silently claims
coefficients it cannot know.
"""
from __future__ import annotations

import math
from fractions import Fraction

from mpmath import mp, mpc, mpf

from .cyclotomic import CyclotomicNumber
from .exact import BigComplex, frac_str, lcm

INF = 10**9


# -- coefficient ring dispatch (Fraction | CyclotomicNumber) -------------------

def _cadd(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    if isinstance(a, Fraction):
        a = CyclotomicNumber.from_rational(b.order, a)
    elif isinstance(b, Fraction):
        b = CyclotomicNumber.from_rational(a.order, b)
    return a + b


def _cmul(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, Fraction):
        return b.scale(a) if isinstance(b, CyclotomicNumber) else a * b
    if isinstance(b, Fraction):
        return a.scale(b)
    return a * b


def _cnz(v) -> bool:
    """Structurally nonzero (cheap; may keep a hidden cyclotomic zero)."""
    if isinstance(v, Fraction):
        return v != 0
    return v.nnz() > 0


def _ctruezero(v) -> bool:
    if isinstance(v, Fraction):
        return v == 0
    return v.is_zero()


def _cneg(v):
    return -v


def coeff_embed(v, bits: int):
    if isinstance(v, Fraction):
        with mp.workprec(bits + 10):
            return mpc(mpf(v.numerator) / mpf(v.denominator))
    return v.embed(bits)


# -- generic univariate series helpers (dict degree -> coeff) ------------------

def univar_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for n, v in b.items():
        w = _cadd(out[n], v) if n in out else v
        if _cnz(w):
            out[n] = w
        elif n in out:
            del out[n]
    return out


def univar_scale(a: dict, c) -> dict:
    if not _cnz(c):
        return {}
    return {n: _cmul(v, c) for n, v in a.items()}


def univar_mul(a: dict, b: dict, cap: int) -> dict:
    out: dict = {}
    for i, ci in a.items():
        for j, cj in b.items():
            n = i + j
            if n > cap:
                continue
            v = _cmul(ci, cj)
            w = _cadd(out[n], v) if n in out else v
            if _cnz(w):
                out[n] = w
            elif n in out:
                del out[n]
    return out


def univar_pow(a: dict, p: int, cap: int) -> dict:
    out = {0: Fraction(1)}
    for _ in range(p):
        out = univar_mul(out, a, cap)
    return out


def univar_invert(a: dict, c0_inv, cap: int) -> dict:
    """Inverse of a power series with invertible constant term; c0_inv supplied
    explicitly so no field inversion is needed here."""
    assert min(a) == 0
    b = {0: c0_inv}
    for n in range(1, cap + 1):
        s = None
        for j in range(1, n + 1):
            if j in a and (n - j) in b:
                t = _cmul(a[j], b[n - j])
                s = t if s is None else _cadd(s, t)
        if s is not None:
            v = _cneg(_cmul(c0_inv, s))
            if _cnz(v):
                b[n] = v
    return b


def exp_series(c: Fraction, cap: int) -> dict[int, Fraction]:
    """Coefficients of exp(c t) through degree cap."""
    out: dict[int, Fraction] = {}
    term = Fraction(1)
    for n in range(cap + 1):
        if term:
            out[n] = term
        term = term * c / (n + 1)
    return out


# -- Puiseux q-series ----------------------------------------------------------

class PuiseuxSeries:
    """Finite q-series with exponents n/denom and exact rational coefficients."""

    __slots__ = ("denom", "terms", "max_exponent")

    def __init__(self, denom: int, terms: dict[int, Fraction], max_exponent):
        if denom < 1:
            raise ValueError("denominator must be positive")
        self.denom = denom
        self.max_exponent = Fraction(max_exponent)
        self.terms = {n: Fraction(v) for n, v in terms.items() if v}
        for n in self.terms:
            if Fraction(n, denom) > self.max_exponent:
                raise ValueError("stored exponent above max_exponent")

    @classmethod
    def zero(cls, max_exponent, denom: int = 1) -> "PuiseuxSeries":
        return cls(denom, {}, max_exponent)

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, exponent) -> Fraction:
        x = Fraction(exponent)
        n = x * self.denom
        if n.denominator != 1:
            return Fraction(0)
        return self.terms.get(int(n), Fraction(0))

    def __add__(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        d = lcm(self.denom, other.denom)
        fa, fb = d // self.denom, d // other.denom
        terms: dict[int, Fraction] = {}
        for n, v in self.terms.items():
            terms[n * fa] = terms.get(n * fa, Fraction(0)) + v
        for n, v in other.terms.items():
            terms[n * fb] = terms.get(n * fb, Fraction(0)) + v
        return PuiseuxSeries(d, terms, min(self.max_exponent, other.max_exponent))

    def scale(self, c) -> "PuiseuxSeries":
        c = Fraction(c)
        return PuiseuxSeries(self.denom, {n: v * c for n, v in self.terms.items()}, self.max_exponent)

    def exponents(self):
        return sorted(Fraction(n, self.denom) for n in self.terms)

    def evaluate(self, k: int, t, bits: int) -> BigComplex:
        """Value at q = zeta_k e^{-t} with the branch q^x = e(x/k) e^{-x t}.

        No tail correction is applied; bounding the discarded tail is the
        caller's responsibility.
        """
        if bits < 4:
            raise ValueError("precision too low to represent any term")
        if k < 1:
            raise ValueError("k must be positive")
        D = self.denom
        guard = 10 + max(0, int(math.log2(len(self.terms) + 1)))
        with mp.workprec(bits + guard):
            tt = mpf(t.numerator) / mpf(t.denominator) if isinstance(t, Fraction) else mpf(t)
            dk = D * k
            phases = {}
            base = mp.exp(-tt / D)
            acc = mpc(0)
            prev_n = None
            cur = None
            for n in sorted(self.terms):
                if prev_n is None:
                    cur = base ** n
                else:
                    cur = cur * base ** (n - prev_n)
                prev_n = n
                r = n % dk
                ph = phases.get(r)
                if ph is None:
                    ph = mp.expjpi(mpf(2 * r) / dk)
                    phases[r] = ph
                v = self.terms[n]
                acc += ph * cur * mpf(v.numerator) / mpf(v.denominator)
            return BigComplex.from_mpc(acc, bits)

    def exponent_map(self) -> dict[str, str]:
        """JSON-friendly map exponent -> coefficient, exact rationals as strings."""
        return {
            frac_str(Fraction(n, self.denom)): frac_str(v)
            for n, v in sorted(self.terms.items())
        }

    def to_json(self) -> dict:
        return {
            "denom": self.denom,
            "max_exponent": frac_str(self.max_exponent),
            "series": self.exponent_map(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "PuiseuxSeries":
        denom = int(d["denom"])
        terms = {}
        for xs, cs in d["series"].items():
            n = Fraction(xs) * denom
            assert n.denominator == 1
            terms[int(n)] = Fraction(cs)
        return cls(denom, terms, Fraction(d["max_exponent"]))


def puiseux_eval(s: PuiseuxSeries, k: int, t, precision: int) -> BigComplex:
    return s.evaluate(k, t, precision)


# -- multivariate Laurent series -------------------------------------------------

class MultiLaurent:
    """Truncated multivariate Laurent series with exact coefficients.

    Exactness contract: every monomial m with m_v >= lower_v for all v and
    sum(m) <= cap has its true coefficient equal to coeffs.get(m, 0).
    """

    __slots__ = ("vars", "coeffs", "lower", "cap")

    def __init__(self, vars: tuple, coeffs: dict, lower: tuple, cap: int):
        self.vars = tuple(vars)
        self.lower = tuple(lower)
        self.cap = cap
        self.coeffs = {}
        for m, v in coeffs.items():
            if not _cnz(v):
                continue
            if sum(m) > cap:
                continue
            assert all(mi >= li for mi, li in zip(m, self.lower)), (m, self.lower)
            self.coeffs[tuple(m)] = v

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, vars: tuple, cap: int = INF) -> "MultiLaurent":
        return cls(vars, {}, tuple(0 for _ in vars), cap)

    @classmethod
    def const(cls, vars: tuple, value, cap: int = INF) -> "MultiLaurent":
        z = tuple(0 for _ in vars)
        return cls(vars, {z: value} if _cnz(value) else {}, z, cap)

    @classmethod
    def from_univar(cls, var, series: dict, cap: int) -> "MultiLaurent":
        lo = min(series) if series else 0
        return cls((var,), {(n,): v for n, v in series.items()}, (min(lo, 0),), cap)

    # -- inspection -----------------------------------------------------------

    def min_total(self) -> int:
        return min((sum(m) for m in self.coeffs), default=INF)

    def coefficient(self, m: tuple):
        m = tuple(m)
        if sum(m) > self.cap:
            raise KeyError(f"monomial {m} outside the exact window (cap {self.cap})")
        return self.coeffs.get(m, Fraction(0))

    def items_upto(self, total: int):
        for m, v in sorted(self.coeffs.items()):
            if sum(m) <= total:
                yield m, v

    def compact(self) -> "MultiLaurent":
        """Drop coefficients that are hidden exact zeros."""
        self.coeffs = {m: v for m, v in self.coeffs.items() if not _ctruezero(v)}
        return self

    # -- alignment --------------------------------------------------------------

    def _aligned_to(self, vars: tuple) -> "MultiLaurent":
        if vars == self.vars:
            return self
        assert set(self.vars) <= set(vars)
        pos = {v: i for i, v in enumerate(self.vars)}
        idx = [pos.get(v) for v in vars]
        coeffs = {}
        for m, c in self.coeffs.items():
            coeffs[tuple(m[i] if i is not None else 0 for i in idx)] = c
        lower = tuple(self.lower[i] if i is not None else 0 for i in idx)
        return MultiLaurent(vars, coeffs, lower, self.cap)

    @staticmethod
    def _union_vars(a: "MultiLaurent", b: "MultiLaurent") -> tuple:
        return tuple(sorted(set(a.vars) | set(b.vars)))

    # -- arithmetic ---------------------------------------------------------------

    def __add__(self, other: "MultiLaurent") -> "MultiLaurent":
        vars = self._union_vars(self, other)
        a, b = self._aligned_to(vars), other._aligned_to(vars)
        cap = min(a.cap, b.cap)
        coeffs = {m: v for m, v in a.coeffs.items() if sum(m) <= cap}
        for m, v in b.coeffs.items():
            if sum(m) > cap:
                continue
            w = _cadd(coeffs[m], v) if m in coeffs else v
            if _cnz(w):
                coeffs[m] = w
            elif m in coeffs:
                del coeffs[m]
        lower = tuple(min(x, y) for x, y in zip(a.lower, b.lower))
        return MultiLaurent(vars, coeffs, lower, cap)

    def __mul__(self, other: "MultiLaurent") -> "MultiLaurent":
        vars = self._union_vars(self, other)
        a, b = self._aligned_to(vars), other._aligned_to(vars)
        oa, ob = a.min_total(), b.min_total()
        if oa == INF or ob == INF:
            lower = tuple(x + y for x, y in zip(a.lower, b.lower))
            return MultiLaurent(vars, {}, lower, INF)
        cap = min(a.cap + ob, b.cap + oa, INF)
        coeffs: dict = {}
        bi = sorted(b.coeffs.items(), key=lambda kv: sum(kv[0]))
        for ma, ca in a.coeffs.items():
            sa = sum(ma)
            for mb, cb in bi:
                if sa + sum(mb) > cap:
                    break
                m = tuple(x + y for x, y in zip(ma, mb))
                v = _cmul(ca, cb)
                w = _cadd(coeffs[m], v) if m in coeffs else v
                if _cnz(w):
                    coeffs[m] = w
                elif m in coeffs:
                    del coeffs[m]
        lower = tuple(x + y for x, y in zip(a.lower, b.lower))
        return MultiLaurent(vars, coeffs, lower, cap)

    def scale(self, c) -> "MultiLaurent":
        if not _cnz(c):
            return MultiLaurent(self.vars, {}, self.lower, self.cap)
        return MultiLaurent(self.vars, {m: _cmul(v, c) for m, v in self.coeffs.items()},
                            self.lower, self.cap)

    def __neg__(self) -> "MultiLaurent":
        return MultiLaurent(self.vars, {m: _cneg(v) for m, v in self.coeffs.items()},
                            self.lower, self.cap)

    def __sub__(self, other: "MultiLaurent") -> "MultiLaurent":
        return self + (-other)

    def diff(self, var) -> "MultiLaurent":
        """Partial derivative; the exact window cap drops by one."""
        i = self.vars.index(var)
        coeffs = {}
        for m, v in self.coeffs.items():
            if m[i] == 0:
                continue
            m2 = list(m)
            m2[i] -= 1
            coeffs[tuple(m2)] = _cmul(v, Fraction(m[i]))
        lower = tuple(l - (1 if j == i else 0) for j, l in enumerate(self.lower))
        return MultiLaurent(self.vars, coeffs, lower, self.cap - 1)

    def __repr__(self):
        return f"MultiLaurent(vars={self.vars}, terms={len(self.coeffs)}, cap={self.cap})"


def multilaurent_mul(a: MultiLaurent, b: MultiLaurent) -> MultiLaurent:
    return a * b
