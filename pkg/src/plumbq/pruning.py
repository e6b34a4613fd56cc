"""Tree pruning and the meromorphic-function Laurent data.

Pruning removes all degree-1 vertices and corrects surviving weights by
w_v - sum 1/w_i; iterating reaches a graph with one or two vertices. Along
the chain, integer multipliers M_v and scaled weights w~_v = M_v w_v stay
integral, and the vertex functions F_v / G_v satisfy a recursion that leaves
the total root-of-unity sum phi invariant level by level. The Laurent
coefficients of phi (exact cyclotomic numbers) have no negative total degree,
the only total-degree-zero monomial is the constant, and the constant term is
the WRT Gauss sum without prefactors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .cyclotomic import CyclotomicNumber, inv_root_diff
from .exact import lcm
from .graphs import PlumbingGraph, validate
from .lattice import det_w, linking_matrix
from .series import MultiLaurent, univar_invert, univar_pow
from .wrt import gauss_sum_tree


@dataclass
class PrunedLevel:
    n: int
    graph: PlumbingGraph
    multiplier: dict            # v -> M_v (integer, sign carried)
    w_tilde: dict               # v -> M_v * w_v (integer)
    subtree: dict               # v -> frozenset of original vertex ids
    pruned_leaves: dict         # v -> tuple of leaves of this level's graph at v
    terminal: bool = False


def prune_once(g: PlumbingGraph):
    """One pruning step: (new_graph, leaves_by_survivor, terminal_flag)."""
    if len(g.vertices) <= 2:
        return g, {}, True
    survivors = [v for v in g.vertices if g.degree(v) >= 2]
    assert survivors, "tree with >= 3 vertices has a vertex of degree >= 2"
    leaves = {v: tuple(u for u in g.neighbors(v) if g.degree(u) == 1) for v in survivors}
    weights = {
        v: g.weights[v] - sum((Fraction(1) / g.weights[i] for i in leaves[v]), Fraction(0))
        for v in survivors
    }
    edges = [e for e in g.edges if e[0] in weights and e[1] in weights]
    out = PlumbingGraph(survivors, edges, weights)
    return out, leaves, False


def prune_sequence(g: PlumbingGraph) -> list[PrunedLevel]:
    """Full pruning chain with multipliers, scaled weights, and exact
    determinant bookkeeping verified at every step."""
    rep = validate(g)
    if not rep.valid:
        raise ValueError(f"invalid graph: {'; '.join(rep.failures)}")
    for v in g.vertices:
        assert g.weights[v].denominator == 1, "pruning chains start from integer weights"

    levels = []
    cur = g
    mult = {v: 1 for v in g.vertices}
    wt = {v: int(g.weights[v]) for v in g.vertices}
    sub = {v: frozenset([v]) for v in g.vertices}
    while True:
        nxt, leaves, terminal = prune_once(cur)
        levels.append(PrunedLevel(len(levels), cur, dict(mult), dict(wt), dict(sub),
                                  leaves, terminal))
        if terminal:
            break
        det_cur = det_w(linking_matrix(cur))
        det_nxt = det_w(linking_matrix(nxt))
        shed = Fraction(1)
        for v in leaves:
            for i in leaves[v]:
                shed *= cur.weights[i]
        assert det_nxt * shed == det_cur, "determinant identity failed across pruning"
        mult2, wt2, sub2 = {}, {}, {}
        for v in nxt.vertices:
            m = mult[v]
            s = set(sub[v])
            for i in leaves[v]:
                m *= wt[i]
                s |= sub[i]
            mult2[v] = m
            wtv = m * nxt.weights[v]
            assert wtv.denominator == 1, "scaled weight must stay integral"
            wt2[v] = int(wtv)
            sub2[v] = frozenset(s)
        for v in nxt.vertices:
            assert nxt.weights[v] < 0, "pruned weights must stay negative"
        assert validate(nxt).negative_definite
        mult, wt, sub, cur = mult2, wt2, sub2, nxt
    assert 1 <= len(levels[-1].graph.vertices) <= 2
    return levels


# -- vertex Laurent expansions ---------------------------------------------------


def f_vertex_series(d: int, k: int, mu: int, cap: int, order: int) -> dict[int, CyclotomicNumber]:
    """Laurent coefficients of (zeta_{2k}^mu e^t - zeta_{2k}^{-mu} e^{-t})^(2-d)
    through total degree cap. Pole order is d-2 at mu in kZ."""
    step = order // (2 * k)
    p = 2 - d
    if mu % k == 0:
        # +-(e^t - e^{-t}): rational coefficients times a sign
        sgn = 1 if (mu // k) % 2 == 0 else -1
        if p >= 0:
            g: dict[int, Fraction] = {}
            fact = 1
            for n_ in range(cap + 1):
                if n_ % 2:
                    g[n_] = Fraction(2 * sgn, fact)
                fact *= n_ + 1
            pw = univar_pow(g, p, cap)
            return {n_: CyclotomicNumber.from_rational(order, c) for n_, c in pw.items()}
        shift = d - 2
        capx = cap + shift
        # g = sgn * 2t * h with h = sinh(t)/t; invert h, shift the pole in
        h: dict[int, Fraction] = {
            n_: Fraction(2 * sgn, math.factorial(n_ + 1)) for n_ in range(0, capx + 1, 2)
        }
        hinv = univar_invert(h, Fraction(1, 2 * sgn), capx)
        pw = univar_pow(hinv, shift, capx)
        return {n_ - shift: CyclotomicNumber.from_rational(order, c)
                for n_, c in pw.items() if n_ - shift <= cap}
    za = CyclotomicNumber.root(order, mu * step)
    zb = CyclotomicNumber.root(order, -mu * step)
    g = {}
    for n_ in range(cap + 1):
        c = za - zb if n_ % 2 == 0 else za + zb
        g[n_] = c.scale(Fraction(1, math.factorial(n_)))
    if p >= 0:
        return univar_pow(g, p, cap)
    c0_inv = inv_root_diff(order, mu * step, -mu * step)
    ginv = univar_invert(g, c0_inv, cap)
    return univar_pow(ginv, d - 2, cap)


# -- the phi machinery --------------------------------------------------------------


@dataclass
class PhiLaurent:
    """Truncated Laurent data of the root-of-unity sum phi for (graph, k)."""

    series: MultiLaurent
    graph: PlumbingGraph
    k: int
    order: int
    algo: str
    level: int = 0

    def coefficient(self, m) -> CyclotomicNumber:
        v = self.series.coefficient(tuple(m))
        if isinstance(v, Fraction):
            return CyclotomicNumber.from_rational(self.order, v)
        return v

    def constant_term(self) -> CyclotomicNumber:
        return self.coefficient(tuple(0 for _ in self.series.vars))


class PhiContext:
    """Memoized F/G recursion along a pruning chain for one (graph, k, cap)."""

    def __init__(self, g: PlumbingGraph, k: int, cap: int):
        self.g = g
        self.k = k
        self.cap = cap
        self.levels = prune_sequence(g)
        degs = [g.degree(v) for v in g.vertices]
        self.pole_budget = sum(max(0, d - 2) for d in degs)
        self.base_cap = cap + self.pole_budget
        order = lcm(8, 4 * k)
        for lev in self.levels:
            for v in lev.graph.vertices:
                order = lcm(order, 4 * k * abs(lev.multiplier[v]),
                            4 * k * abs(lev.w_tilde[v]))
        self.order = order
        self._f_memo: dict = {}
        self._g_memo: dict = {}

    def _e(self, x: Fraction) -> CyclotomicNumber:
        return CyclotomicNumber.from_e(Fraction(x) % 1, self.order)

    def f_level(self, n: int, v, mu: int) -> MultiLaurent:
        lev = self.levels[n]
        period = 2 * self.k * abs(lev.multiplier[v])
        key = (n, v, mu % period)
        hit = self._f_memo.get(key)
        if hit is not None:
            return hit
        if n == 0:
            d = self.g.degree(v)
            ser = f_vertex_series(d, self.k, mu % (2 * self.k), self.base_cap, self.order)
            out = MultiLaurent.from_univar(v, ser, self.base_cap)
        else:
            prev = self.levels[n - 1]
            out = self.f_level(n - 1, v, mu)
            for i in prev.pruned_leaves[v]:
                out = out * self.g_level(n - 1, i, mu)
        self._f_memo[key] = out
        return out

    def g_level(self, n: int, v, mu: int) -> MultiLaurent:
        lev = self.levels[n]
        k = self.k
        period = 2 * k * abs(lev.w_tilde[v])
        key = (n, v, mu % period)
        hit = self._g_memo.get(key)
        if hit is not None:
            return hit
        m_v = lev.multiplier[v]
        w_v = lev.graph.weights[v]
        pref = self._e(Fraction(mu * mu, 4 * k) / w_v)
        acc = None
        for mv in range(2 * k * abs(m_v)):
            ph = self._e(Fraction(w_v * mv * mv, 4 * k) + Fraction(2 * mu * mv, 4 * k))
            term = self.f_level(n, v, mv).scale(ph)
            acc = term if acc is None else acc + term
        out = acc.scale(pref)
        self._g_memo[key] = out
        return out

    def phi_level(self, n: int, root=None) -> MultiLaurent:
        """phi computed from level n of the chain: the normalized sum over
        mu in prod_v Z/2kM_v of e(mu W mu / 4k) prod_v F_v, contracted over
        the level-n tree with messages grouped by residues mod 2k."""
        lev = self.levels[n]
        gr = lev.graph
        k = self.k
        two_k = 2 * k
        if root is None:
            root = max(gr.vertices, key=lambda v: (gr.degree(v), -v))

        def grouped(v, incoming):
            """A_v[s] = sum over mu_v congruent to s mod 2k of
            e(w_v mu_v^2/4k) F_v^{(n)}(mu_v) * prod incoming[mu_v mod 2k]."""
            w_v = gr.weights[v]
            dom = two_k * abs(lev.multiplier[v])
            groups: list = [None] * two_k
            for mu in range(dom):
                ph = self._e(Fraction(w_v * mu * mu, 4 * k))
                term = self.f_level(n, v, mu).scale(ph)
                s = mu % two_k
                groups[s] = term if groups[s] is None else groups[s] + term
            vars_all = tuple(sorted(lev.subtree[v]))
            out = []
            for s in range(two_k):
                cell = groups[s] if groups[s] is not None else MultiLaurent.zero(vars_all)
                for msg in incoming:
                    cell = cell * msg[s]
                out.append(cell)
            return out

        from .wrt import _postorder
        messages: dict = {}
        for v, parent in _postorder(gr, root):
            children = [u for u in gr.neighbors(v) if u != parent]
            cells = grouped(v, [messages[c] for c in children])
            if parent is None:
                total = None
                for s in range(two_k):
                    total = cells[s] if total is None else total + cells[s]
                det_m = 1
                for u in gr.vertices:
                    det_m *= abs(lev.multiplier[u])
                return total.scale(Fraction(1, det_m))
            msg = []
            for r in range(two_k):
                acc = None
                for s in range(two_k):
                    t = cells[s].scale(self._e(Fraction(s * r, two_k)))
                    acc = t if acc is None else acc + t
                msg.append(acc)
            messages[v] = msg
        raise AssertionError("unreachable")

    def phi_naive(self) -> MultiLaurent:
        """Direct (2k)^|V| product sum at level 0; oracle scale."""
        k = self.k
        g = self.g
        W = linking_matrix(g)
        idx = {v: i for i, v in enumerate(g.vertices)}
        total = None
        for assign in itertools.product(range(2 * k), repeat=len(g.vertices)):
            q = Fraction(0)
            for v in g.vertices:
                q += g.weights[v] * assign[idx[v]] ** 2
            for a, b in g.edges:
                q += 2 * assign[idx[a]] * assign[idx[b]]
            term = None
            for v in g.vertices:
                f = self.f_level(0, v, assign[idx[v]])
                term = f if term is None else term * f
            term = term.scale(self._e(q / (4 * k)))
            total = term if total is None else total + term
        return total


def phi_gamma_k(g: PlumbingGraph, k: int, truncation: int, algo: str = "tree",
                level: int | None = None, context: PhiContext | None = None) -> PhiLaurent:
    """Truncated Laurent expansion of the meromorphic root-of-unity sum.

    algo: 'naive' directly sums (2k)^|V| series products; 'tree' contracts the
    same sum over the level-0 tree; 'pruned' evaluates the pruned-graph
    expression at the terminal level (or the given level) of the chain.
    """
    ctx = context if context is not None else PhiContext(g, k, truncation)
    if ctx.cap < truncation:
        raise ValueError("context cap below requested truncation")
    if algo == "naive":
        series, lvl = ctx.phi_naive(), 0
    elif algo == "tree":
        series, lvl = ctx.phi_level(0), 0
    elif algo == "pruned":
        lvl = len(ctx.levels) - 1 if level is None else level
        series = ctx.phi_level(lvl)
    else:
        raise ValueError(f"unknown algo {algo!r}")
    if series.cap < truncation:
        raise ValueError(f"cap too small: window reaches {series.cap} < {truncation}")
    return PhiLaurent(series, g, k, ctx.order, algo, lvl)


def f_pruned(g: PlumbingGraph, k: int, n: int, v, mu: int, truncation: int,
             context: PhiContext | None = None) -> MultiLaurent:
    """The level-n vertex function as a truncated multivariate Laurent series."""
    ctx = context if context is not None else PhiContext(g, k, truncation)
    lev = ctx.levels[n]
    if v not in lev.graph.weights:
        raise ValueError(f"vertex {v} not present at level {n}")
    pole = max(0, lev.graph.degree(v) - 2) if mu % k == 0 else 0
    if truncation < -pole:
        raise ValueError("truncation cap below pole order")
    return ctx.f_level(n, v, mu)


def check_phi_properties(phi: PhiLaurent, g: PlumbingGraph, k: int) -> dict:
    """Checks on the Laurent window: (i) no nonzero coefficient with negative
    total degree, (ii) total degree zero only at the constant monomial,
    (iii) the constant equals the restricted Gauss sum, exactly."""
    ser = phi.series
    if ser.cap < 0:
        return {"status": "inconclusive", "reason": "window cap below 0"}
    neg_violations = []
    zero_violations = []
    for m, v in ser.items_upto(0):
        tot = sum(m)
        if isinstance(v, Fraction):
            nz = v != 0
        else:
            nz = not v.is_zero()
        if not nz:
            continue
        if tot < 0:
            neg_violations.append(m)
        elif tot == 0 and any(m):
            zero_violations.append(m)
    b0 = phi.constant_term()
    gauss = gauss_sum_tree(g, k)
    order = lcm(b0.order, gauss.order)
    b0_matches = (b0.promote(order) - gauss.promote(order)).is_zero()
    ok = not neg_violations and not zero_violations and b0_matches
    return {
        "status": "pass" if ok else "fail",
        "no_negative_total_degree": not neg_violations,
        "negative_offenders": [list(m) for m in neg_violations],
        "zero_degree_only_constant": not zero_violations,
        "zero_degree_offenders": [list(m) for m in zero_violations],
        "constant_matches_gauss_sum": b0_matches,
        "window_cap": ser.cap,
        "lower_bounds": list(ser.lower),
        "algo": phi.algo,
        "level": phi.level,
    }
