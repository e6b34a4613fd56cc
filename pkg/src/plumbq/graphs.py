"""Plumbing graphs: weighted trees, validation, and Neumann moves."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import frac, frac_str


class MoveError(ValueError):
    pass


class PlumbingGraph:
    """Immutable weighted tree. Weights are exact rationals (integers at input
    level; pruning produces genuinely rational ones)."""

    __slots__ = ("vertices", "edges", "weights", "_adj")

    def __init__(self, vertices, edges, weights):
        self.vertices = tuple(vertices)
        self.edges = tuple(tuple(sorted(e)) for e in edges)
        self.weights = {v: frac(w) for v, w in dict(weights).items()}
        if set(self.weights) != set(self.vertices):
            raise ValueError("weights must cover exactly the vertex set")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            if a == b or a not in adj or b not in adj:
                raise ValueError(f"bad edge {(a, b)}")
            adj[a].append(b)
            adj[b].append(a)
        self._adj = {v: tuple(sorted(ns)) for v, ns in adj.items()}

    # -- basic structure ---------------------------------------------------

    def neighbors(self, v) -> tuple:
        return self._adj[v]

    def degree(self, v) -> int:
        return len(self._adj[v])

    def degree_vector(self) -> tuple[int, ...]:
        return tuple(self.degree(v) for v in self.vertices)

    def weight(self, v) -> Fraction:
        return self.weights[v]

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for u in self._adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)

    def is_tree(self) -> bool:
        return self.is_connected() and len(self.edges) == len(self.vertices) - 1

    def fresh_id(self) -> int:
        return max(self.vertices) + 1 if self.vertices else 0

    def __eq__(self, other):
        if not isinstance(other, PlumbingGraph):
            return NotImplemented
        return (sorted(self.vertices) == sorted(other.vertices)
                and sorted(self.edges) == sorted(other.edges)
                and self.weights == other.weights)

    def __repr__(self):
        ws = ", ".join(f"{v}:{frac_str(self.weights[v])}" for v in self.vertices)
        return f"PlumbingGraph({ws}; edges={list(self.edges)})"

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": v, "weight": frac_str(self.weights[v])} for v in self.vertices],
            "edges": [list(e) for e in self.edges],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, d: dict) -> "PlumbingGraph":
        vs = [int(x["id"]) for x in d["vertices"]]
        ws = {int(x["id"]): frac(str(x["weight"])) for x in d["vertices"]}
        es = [tuple(e) for e in d["edges"]]
        return cls(vs, es, ws)

    @classmethod
    def loads(cls, s: str) -> "PlumbingGraph":
        return cls.from_json(json.loads(s))

    @classmethod
    def star(cls, center_weight, leaf_weights) -> "PlumbingGraph":
        n = len(leaf_weights)
        vs = list(range(n + 1))
        ws = {0: frac(center_weight)}
        ws.update({i + 1: frac(w) for i, w in enumerate(leaf_weights)})
        return cls(vs, [(0, i + 1) for i in range(n)], ws)

    @classmethod
    def path(cls, weights) -> "PlumbingGraph":
        vs = list(range(len(weights)))
        return cls(vs, [(i, i + 1) for i in range(len(weights) - 1)],
                   {i: frac(w) for i, w in enumerate(weights)})


def degree_vector(g: PlumbingGraph) -> tuple[int, ...]:
    return g.degree_vector()


@dataclass
class ValidationReport:
    connected: bool
    tree: bool
    weights_negative: bool
    negative_definite: bool
    det: Fraction | None
    failures: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "connected": self.connected,
            "tree": self.tree,
            "weights_negative": self.weights_negative,
            "negative_definite": self.negative_definite,
            "det": frac_str(self.det) if self.det is not None else None,
            "failures": list(self.failures),
            "valid": self.valid,
        }


def validate(g: PlumbingGraph) -> ValidationReport:
    """Tree-ness, connectivity, negative weights, and the exact leading-minor
    test for negative definiteness of the linking matrix."""
    from .lattice import leading_principal_minors, linking_matrix

    failures = []
    connected = g.is_connected()
    tree = connected and len(g.edges) == len(g.vertices) - 1
    if not connected:
        failures.append("not connected")
    if connected and not tree:
        failures.append("not a tree")
    weights_negative = all(w < 0 for w in g.weights.values())
    if not weights_negative:
        failures.append("non-negative vertex weight")
    det = None
    negative_definite = False
    if tree:
        minors = leading_principal_minors(linking_matrix(g))
        det = minors[-1]
        negative_definite = all(
            (m > 0 if (j + 1) % 2 == 0 else m < 0) for j, m in enumerate(minors)
        )
        if not negative_definite:
            failures.append("linking matrix not negative definite")
    return ValidationReport(connected, tree, weights_negative, negative_definite, det, failures)


@dataclass(frozen=True)
class NeumannMove:
    """One of the three local moves, with a direction flag.

    kind 'blow_down_edge': remove a bivalent +-1 vertex, joining its two
    neighbors and shifting their weights by -sign; reversed, insert one on an
    edge. kind 'blow_down_leaf': remove a +-1 leaf, shifting its neighbor by
    -sign; reversed, attach one. kind 'zero_merge': collapse a bivalent
    0-weighted vertex, merging its neighbors into one vertex with the summed
    weight; reversed, split a vertex through a fresh 0-vertex.
    """

    kind: str
    location: tuple
    sign: int = -1
    reverse: bool = False
    data: tuple = ()

    def to_json(self) -> dict:
        return {"kind": self.kind, "location": list(self.location),
                "sign": self.sign, "reverse": self.reverse, "data": list(self.data)}


def _check_result(g: PlumbingGraph, require_definite: bool) -> None:
    if require_definite:
        rep = validate(g)
        if not rep.valid:
            raise MoveError(f"move rejected, result invalid: {'; '.join(rep.failures)}")


def apply_neumann(g: PlumbingGraph, m: NeumannMove, require_definite: bool = True):
    """Apply a Neumann move; returns (new_graph, inverse_move).

    The inverse move restores the input graph exactly (surviving vertices keep
    their ids; re-created vertices reuse the remembered id).
    """
    if m.kind == "blow_down_edge" and not m.reverse:
        (v,) = m.location
        if v not in g.weights or g.degree(v) != 2 or abs(g.weights[v]) != 1:
            raise MoveError(f"vertex {v} is not a bivalent unit-weight vertex")
        eps = int(g.weights[v])
        a, b = g.neighbors(v)
        vs = [x for x in g.vertices if x != v]
        ws = {x: g.weights[x] for x in vs}
        ws[a] -= eps
        ws[b] -= eps
        es = [e for e in g.edges if v not in e] + [(a, b)]
        out = PlumbingGraph(vs, es, ws)
        _check_result(out, require_definite)
        inv = NeumannMove("blow_down_edge", (a, b), eps, reverse=True, data=(v,))
        return out, inv

    if m.kind == "blow_down_edge" and m.reverse:
        a, b = m.location
        if tuple(sorted((a, b))) not in g.edges:
            raise MoveError(f"no edge {(a, b)}")
        eps = m.sign
        if eps not in (1, -1):
            raise MoveError("sign must be +-1")
        v = m.data[0] if m.data else g.fresh_id()
        vs = list(g.vertices) + [v]
        ws = {x: g.weights[x] for x in g.vertices}
        ws[a] += eps
        ws[b] += eps
        ws[v] = Fraction(eps)
        es = [e for e in g.edges if e != tuple(sorted((a, b)))] + [(a, v), (v, b)]
        out = PlumbingGraph(vs, es, ws)
        _check_result(out, require_definite)
        return out, NeumannMove("blow_down_edge", (v,))

    if m.kind == "blow_down_leaf" and not m.reverse:
        (v,) = m.location
        if v not in g.weights or g.degree(v) != 1 or abs(g.weights[v]) != 1:
            raise MoveError(f"vertex {v} is not a unit-weight leaf")
        eps = int(g.weights[v])
        (a,) = g.neighbors(v)
        vs = [x for x in g.vertices if x != v]
        ws = {x: g.weights[x] for x in vs}
        ws[a] -= eps
        es = [e for e in g.edges if v not in e]
        out = PlumbingGraph(vs, es, ws)
        _check_result(out, require_definite)
        return out, NeumannMove("blow_down_leaf", (a,), eps, reverse=True, data=(v,))

    if m.kind == "blow_down_leaf" and m.reverse:
        (a,) = m.location
        if a not in g.weights:
            raise MoveError(f"no vertex {a}")
        eps = m.sign
        if eps not in (1, -1):
            raise MoveError("sign must be +-1")
        v = m.data[0] if m.data else g.fresh_id()
        vs = list(g.vertices) + [v]
        ws = {x: g.weights[x] for x in g.vertices}
        ws[a] += eps
        ws[v] = Fraction(eps)
        es = list(g.edges) + [(a, v)]
        out = PlumbingGraph(vs, es, ws)
        _check_result(out, require_definite)
        return out, NeumannMove("blow_down_leaf", (v,))

    if m.kind == "zero_merge" and not m.reverse:
        (v,) = m.location
        if v not in g.weights or g.degree(v) != 2 or g.weights[v] != 0:
            raise MoveError(f"vertex {v} is not a bivalent 0-weight vertex")
        a, b = g.neighbors(v)
        # a survives with weight w_a + w_b; b's other edges transfer to a
        b_edges = tuple(sorted(u for u in g.neighbors(b) if u != v))
        vs = [x for x in g.vertices if x not in (v, b)]
        ws = {x: g.weights[x] for x in vs}
        wa, wb = g.weights[a], g.weights[b]
        ws[a] = wa + wb
        es = [e for e in g.edges if v not in e and b not in e]
        es += [(a, u) for u in b_edges]
        out = PlumbingGraph(vs, es, ws)
        _check_result(out, require_definite)
        inv = NeumannMove("zero_merge", (a,), reverse=True,
                          data=(v, b, wa, wb, b_edges))
        return out, inv

    if m.kind == "zero_merge" and m.reverse:
        (a,) = m.location
        if a not in g.weights:
            raise MoveError(f"no vertex {a}")
        if len(m.data) == 5:
            v, b, wa, wb, b_edges = m.data
        else:
            wa, wb, b_edges = m.data
            wa, wb = frac(wa), frac(wb)
            v = g.fresh_id()
            b = v + 1
            b_edges = tuple(b_edges)
        if g.weights[a] != frac(wa) + frac(wb):
            raise MoveError("split weights must sum to the vertex weight")
        if not set(b_edges) <= set(g.neighbors(a)):
            raise MoveError("edges to transfer are not incident to the vertex")
        vs = [x for x in g.vertices] + [v, b]
        ws = {x: g.weights[x] for x in g.vertices}
        ws[a] = frac(wa)
        ws[v] = Fraction(0)
        ws[b] = frac(wb)
        es = [e for e in g.edges if not (a in e and (e[0] in b_edges or e[1] in b_edges))]
        es += [(b, u) for u in b_edges] + [(a, v), (v, b)]
        out = PlumbingGraph(vs, es, ws)
        _check_result(out, require_definite)
        return out, NeumannMove("zero_merge", (v,))

    raise MoveError(f"unknown move kind {m.kind!r}")
