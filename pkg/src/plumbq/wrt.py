"""Witten-Reshetikhin-Turaev invariants via the finite Gauss-sum formula.

Two evaluation routes share one exact cyclotomic core: a direct sum over all
root-of-unity assignments (oracle scale) and a message-passing contraction
over the tree costing O(|V| (2k)^2). Both stay exact until a single final
embedding, so the dual-algorithm agreement check is a true identity test.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp, mpf

from .cyclotomic import CyclotomicNumber, inv_root_diff
from .exact import BigComplex, frac_str, lcm
from .graphs import PlumbingGraph, validate
from .lattice import coset_reps, det_w, leading_principal_minors, linking_matrix, mat, mat_mul, mat_vec, w_inverse


def session_order(k: int) -> int:
    return lcm(8, 4 * k)


def valid_mu(k: int) -> tuple[int, ...]:
    """(Z \\ kZ)/2kZ as residues in [0, 2k)."""
    return tuple(m for m in range(2 * k) if m % k)


def f_value(d: int, k: int, mu: int, order: int) -> CyclotomicNumber:
    """F_v(zeta_{2k}^mu) = (zeta_{2k}^mu - zeta_{2k}^{-mu})^(2-d), exact.

    For d >= 3 the value is a pole unless mu is prime to k's multiples; the
    restricted summation domain guarantees mu not in kZ, asserted here.
    """
    step = order // (2 * k)
    p = 2 - d
    if p >= 0:
        base = CyclotomicNumber.root(order, mu * step) - CyclotomicNumber.root(order, -mu * step)
        return base ** p
    assert mu % k, "pole: F_v at mu in kZ with deg v >= 3"
    inv = inv_root_diff(order, mu * step, -mu * step)
    return inv ** (d - 2)


def _vertex_tables(g: PlumbingGraph, k: int, order: int):
    """T_v[mu] = e(w_v mu^2 / 4k) F_v(zeta_{2k}^mu) for mu in the valid set."""
    mus = valid_mu(k)
    tables = {}
    for v in g.vertices:
        d = g.degree(v)
        w = int(g.weights[v])
        row = {}
        for mu in mus:
            ph = CyclotomicNumber.from_e(Fraction(w * mu * mu, 4 * k), order)
            row[mu] = ph * f_value(d, k, mu, order)
        tables[v] = row
    return tables


def _edge_phase_table(k: int, order: int):
    step = order // (2 * k)
    return {r: CyclotomicNumber.root(order, r * step) for r in range(2 * k)}


def gauss_sum_naive(g: PlumbingGraph, k: int) -> CyclotomicNumber:
    """Direct sum over ((Z \\ kZ)/2kZ)^V; (2k-2)^|V| terms."""
    order = session_order(k)
    mus = valid_mu(k)
    tables = _vertex_tables(g, k, order)
    edge_ph = _edge_phase_table(k, order)
    vs = g.vertices
    total = CyclotomicNumber.zero(order)
    for assign in itertools.product(mus, repeat=len(vs)):
        mu = dict(zip(vs, assign))
        term = CyclotomicNumber.one(order)
        for v in vs:
            term = term * tables[v][mu[v]]
        for a, b in g.edges:
            term = term * edge_ph[(mu[a] * mu[b]) % (2 * k)]
        total = total + term
    return total


def _postorder(g: PlumbingGraph, root):
    order = []
    stack = [(root, None)]
    seen = set()
    while stack:
        v, parent = stack.pop()
        seen.add(v)
        order.append((v, parent))
        for u in g.neighbors(v):
            if u not in seen:
                stack.append((u, v))
    return list(reversed(order))


def gauss_sum_tree(g: PlumbingGraph, k: int, root=None) -> CyclotomicNumber:
    """Message-passing contraction of the same sum over the tree.

    Each vertex-to-parent message is indexed by the parent's residue; the
    factorization e(mu W mu / 4k) = prod_v e(w_v mu_v^2/4k) prod_edges
    e(mu_u mu_v / 2k) makes the regrouping exact.
    """
    order = session_order(k)
    mus = valid_mu(k)
    tables = _vertex_tables(g, k, order)
    edge_ph = _edge_phase_table(k, order)
    if root is None:
        root = max(g.vertices, key=lambda v: (g.degree(v), -v))
    messages: dict = {}
    for v, parent in _postorder(g, root):
        children = [u for u in g.neighbors(v) if u != parent]
        base = {}
        for mu in mus:
            term = tables[v][mu]
            for c in children:
                term = term * messages[c][mu]
            base[mu] = term
        if parent is None:
            total = CyclotomicNumber.zero(order)
            for mu in mus:
                total = total + base[mu]
            return total
        msg = {}
        for mup in mus:
            acc = CyclotomicNumber.zero(order)
            for mu in mus:
                acc = acc + base[mu] * edge_ph[(mu * mup) % (2 * k)]
            msg[mup] = acc
        messages[v] = msg
    raise AssertionError("unreachable")


@dataclass
class WrtValue:
    k: int
    value: BigComplex
    certificate: float
    algo: str
    det: Fraction
    homology_sphere: bool

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "value": self.value.to_json(),
            "certificate": self.certificate,
            "algo": self.algo,
            "det": frac_str(self.det),
            "homology_sphere": self.homology_sphere,
        }


def _finish(g: PlumbingGraph, k: int, gauss: CyclotomicNumber, bits: int,
            algo: str) -> WrtValue:
    order = session_order(k)
    n = len(g.vertices)
    wsum = sum(int(g.weights[v]) + 3 for v in g.vertices)
    pref = (CyclotomicNumber.root(order, order // 8) ** n) \
        * CyclotomicNumber.from_e(Fraction(-wsum, 4 * k), order)
    # divide by (zeta_2k - zeta_2k^{-1}) exactly in the field
    step = order // (2 * k)
    exact_part = pref * gauss * inv_root_diff(order, step, -step)
    with mp.workprec(bits + 20):
        z = exact_part.embed(bits + 20)
        denom = 2 * mp.sqrt(2 * k) ** n
        val = z / denom
        cert = float((abs(val) + 1) * mpf(2) ** (-bits))
        det = det_w(linking_matrix(g))
        return WrtValue(k, BigComplex.from_mpc(val, bits), cert, algo, det,
                        abs(det) == 1)


def wrt_naive(g: PlumbingGraph, k: int, precision: int = 128) -> WrtValue:
    if k < 2:
        raise ValueError("k must be >= 2")
    rep = validate(g)
    if not rep.valid:
        raise ValueError(f"invalid graph: {'; '.join(rep.failures)}")
    return _finish(g, k, gauss_sum_naive(g, k), precision, "naive")


def wrt_contracted(g: PlumbingGraph, k: int, precision: int = 128, root=None) -> WrtValue:
    if k < 2:
        raise ValueError("k must be >= 2")
    rep = validate(g)
    if not rep.valid:
        raise ValueError(f"invalid graph: {'; '.join(rep.failures)}")
    return _finish(g, k, gauss_sum_tree(g, k, root=root), precision, "tree")


# -- Gauss sum reciprocity -------------------------------------------------------


class HypothesisError(ValueError):
    """A reciprocity precondition failed; .condition names it."""

    def __init__(self, condition: str, detail: str = ""):
        super().__init__(f"hypothesis violated: {condition}" + (f" ({detail})" if detail else ""))
        self.condition = condition


def signature_exact(m, seed: int = 7) -> int:
    """Signature of a nondegenerate symmetric rational matrix via the
    leading-minor sign sequence, retried under random unimodular congruence
    when a leading minor vanishes."""
    n = len(m)
    rng = random.Random(seed)
    cur = mat(m)
    for _ in range(200):
        minors = leading_principal_minors(cur)
        if all(x != 0 for x in minors):
            sig = 0
            prev = Fraction(1)
            for x in minors:
                sig += 1 if (x / prev) > 0 else -1
                prev = x
            return sig
        G = [[Fraction(1 if i == j else rng.randint(-2, 2)) for j in range(n)] for i in range(n)]
        Gm = mat(G)
        cur = mat_mul(mat_mul(Gm, mat(m)), tuple(zip(*Gm)))
    raise RuntimeError("could not reach a pivot-complete congruence")


def reciprocity_both_sides(form, k: int, u, h, precision: int = 128):
    """Both sides of the Gauss-sum reciprocity identity for the lattice Z^n
    with bilinear form <x,y> = x^T S y.

    Returns (lhs, rhs, report). Every hypothesis is checked exactly and a
    failure raises HypothesisError naming the condition.
    """
    S = mat(form)
    n = len(S)
    if any(S[i][j] != S[j][i] for i in range(n) for j in range(n)):
        raise HypothesisError("form symmetric")
    if any(x.denominator != 1 for row in S for x in row):
        raise HypothesisError("form Z-valued")
    detS = det_w(S)
    if detS == 0:
        raise HypothesisError("form non-degenerate")
    disc = abs(int(detS))
    if k <= 0 or k % disc:
        raise HypothesisError("k in |L'/L| Z", f"k={k}, |L'/L|={disc}")
    u = tuple(Fraction(x) for x in u)
    if any((k * x).denominator != 1 for x in u):
        raise HypothesisError("u in (1/k) L")
    H = mat(h)
    detH = det_w(H)
    if detH == 0:
        raise HypothesisError("h invertible")
    SH = mat_mul(S, H)
    if any(SH[i][j] != SH[j][i] for i in range(n) for j in range(n)):
        raise HypothesisError("h self-adjoint")
    Sinv = w_inverse(S)
    SHSinv = mat_mul(SH, Sinv)
    if any(x.denominator != 1 for row in SHSinv for x in row):
        raise HypothesisError("h(L') contained in L'")
    M = mat_mul(H, Sinv)  # matrix of <y_i, h(y_j)> on the dual basis
    for i in range(n):
        if (Fraction(k, 2) * M[i][i]).denominator != 1:
            raise HypothesisError("(k/2)<y,h(y)> integral", f"diagonal entry {i}")
        for j in range(n):
            if (k * M[i][j]).denominator != 1:
                raise HypothesisError("(k/2)<y,h(y)> integral", f"entry {i},{j}")

    def exact_exp_sum(pairs):
        """Sum of e(x) over rational x, exactly, then embedded."""
        order = 1
        for x in pairs:
            order = lcm(order, x.denominator)
        acc = CyclotomicNumber.zero(order)
        for x in pairs:
            acc = acc + CyclotomicNumber.from_e(x % 1, order)
        return acc

    lhs_exps = []
    for xs in itertools.product(range(k), repeat=n):
        x = tuple(Fraction(v) for v in xs)
        q = sum(x[i] * SH[i][j] * x[j] for i in range(n) for j in range(n))
        lin = sum(x[i] * sum(S[i][j] * u[j] for j in range(n)) for i in range(n))
        lhs_exps.append(Fraction(q, 2 * k) + lin)
    lhs_cy = exact_exp_sum(lhs_exps)

    sigma = signature_exact(SH)
    Hinv = w_inverse(H)
    SHinv = mat_mul(S, Hinv)
    sub = [[int(x) for x in row] for row in SHSinv]
    reps = coset_reps(sub)
    rhs_exps = []
    for a in reps.representatives:
        y = mat_vec(Sinv, a)
        yu = tuple(yi + ui for yi, ui in zip(y, u))
        q = sum(yu[i] * SHinv[i][j] * yu[j] for i in range(n) for j in range(n))
        rhs_exps.append(Fraction(-k, 2) * q)
    rhs_cy = exact_exp_sum(rhs_exps)

    with mp.workprec(precision + 20):
        lhs = lhs_cy.embed(precision + 20)
        phase = CyclotomicNumber.from_e(Fraction(sigma, 8) % 1, 8).embed(precision + 20)
        det_h_abs = abs(mpf(detH.numerator)) / mpf(detH.denominator)
        scale = mp.sqrt(k) ** n / mp.sqrt(mpf(disc) * det_h_abs)
        rhs = phase * scale * rhs_cy.embed(precision + 20)
        report = {
            "signature": sigma,
            "classes_dual": len(reps),
            "k": k,
            "disc": disc,
        }
        return (BigComplex.from_mpc(lhs, precision),
                BigComplex.from_mpc(rhs, precision), report)
