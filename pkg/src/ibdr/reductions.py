"""Instance generators for the hardness reductions, brute-force reference
solvers, and a seeded random graph source."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .graph import (EPSILON, DirectedGraph, InterleavedGraph, Label, Traversal, closing,
                    label_metrics, opening)

# symbols of alphabet 1 used by the counting gadgets
G0, G1, D0, D1 = 1, 2, 3, 4
PLUS = opening(2, 1)
MINUS = closing(2, 1)


class Builder:
    """Accumulates named nodes and labelled half-edges."""

    def __init__(self, k1: int, k2: int):
        self.k1, self.k2 = k1, k2
        self.ids: Dict[str, int] = {}
        self.edges: List[Tuple[int, int, Label]] = []

    def node(self, name: str) -> int:
        if name not in self.ids:
            self.ids[name] = len(self.ids)
        return self.ids[name]

    def edge(self, a: str, b: str, lab: Label = EPSILON):
        self.edges.append((self.node(a), self.node(b), lab))

    def build(self) -> InterleavedGraph:
        return InterleavedGraph(len(self.ids), self.k1, self.k2, self.edges)


@dataclass
class Fragment:
    graph: InterleavedGraph
    entry: int
    exit: int
    names: Dict[str, int]


@dataclass
class ReductionArtifacts:
    names: Dict[str, int]
    edge_symbol: Dict[int, int] = field(default_factory=dict)
    nu: Optional[int] = None
    guess_mid: Dict[int, int] = field(default_factory=dict)
    verify_mid: Dict[int, int] = field(default_factory=dict)
    source: Optional[DirectedGraph] = None

    def metadata(self) -> Dict[str, str]:
        out = {f"node.{k}": str(v) for k, v in sorted(self.names.items(), key=lambda kv: kv[1])}
        if self.nu is not None:
            out["nu_symbol"] = str(self.nu)
        for e, s in sorted(self.edge_symbol.items()):
            out[f"edge.{e}.symbol"] = str(s)
            out[f"edge.{e}.guess_mid"] = str(self.guess_mid[e])
            out[f"edge.{e}.verify_mid"] = str(self.verify_mid[e])
        return out


# --------------------------------------------------------------- gadgets

def _power_gadget(b: Builder, pre: str, level: int, sign: str, g0=G0, g1=G1):
    """Add gadget G_level^sign under name prefix ``pre``; returns (p, q)."""
    if sign not in "+-" or len(sign) != 1:
        raise ValueError("sign must be '+' or '-'")
    if level < 0:
        raise ValueError("level must be non-negative")
    step = PLUS if sign == "+" else MINUS
    p, q = pre + "p", pre + "q"
    if level == 0:
        b.edge(p, pre + "r", opening(1, g0))
        b.edge(pre + "r", pre + "r'", step)
        b.edge(pre + "r'", q, closing(1, g0))
        return p, q
    a = lambda i: f"{pre}a{i}"
    bb = lambda i: f"{pre}b{i}"
    c = lambda i: f"{pre}c{i}"
    b.node(p)
    for i in range(1, level + 1):
        b.edge(c(i), bb(i), closing(1, g0))
        b.edge(bb(i), a(i), opening(1, g1))
    for i in range(1, level):
        b.edge(a(i + 1), a(i), opening(1, g0))
        b.edge(c(i), c(i + 1), closing(1, g1))
    b.edge(p, a(level), opening(1, g0))
    b.edge(a(1), c(1), step)
    # exit pops γ1; popping γ0 here would admit the short walk p, a1, c1, q
    b.edge(c(level), q, closing(1, g1))
    return p, q


def gen_power_gadget(level: int, sign: str = "+") -> Fragment:
    """Standalone power gadget (alphabet 1 = {γ0, γ1}, alphabet 2 unary)."""
    b = Builder(2, 1)
    p, q = _power_gadget(b, "", level, sign)
    return Fragment(b.build(), b.ids[p], b.ids[q], dict(b.ids))


def _counter_gadget(b: Builder, pre: str, x: int, sign: str):
    if x < 1:
        raise ValueError("counter gadget needs x >= 1")
    prev_q = None
    entry = None
    for level in range(x.bit_length()):
        if not (x >> level) & 1:
            continue
        p, q = _power_gadget(b, f"{pre}L{level}.", level, sign)
        if prev_q is None:
            entry = p
        else:
            b.edge(prev_q, p)
        prev_q = q
    return entry, prev_q


def gen_counter_gadget(x: int, sign: str = "+") -> Fragment:
    b = Builder(2, 1)
    p, q = _counter_gadget(b, "", x, sign)
    return Fragment(b.build(), b.ids[p], b.ids[q], dict(b.ids))


# ------------------------------------------------------------ subset sum

@dataclass(frozen=True)
class SubsetSumInstance:
    X: Tuple[int, ...]
    S: int

    def __post_init__(self):
        object.__setattr__(self, "X", tuple(self.X))
        if self.S < 1 or any(x < 1 for x in self.X):
            raise ValueError("values and target must be positive")
        if any(x > self.S for x in self.X):
            raise ValueError("every x_i must satisfy x_i <= S")


def brute_subset_sum(inst: SubsetSumInstance) -> bool:
    for r in range(len(inst.X) + 1):
        for combo in itertools.combinations(inst.X, r):
            if sum(combo) == inst.S:
                return True
    return False


def gen_subset_sum(inst: SubsetSumInstance):
    """Returns (graph, u1, v, artifacts).  Alphabet 1 is {γ0, γ1, δ0, δ1}."""
    n = len(inst.X)
    if n == 0:
        raise ValueError("need at least one value")
    b = Builder(4, 1)
    first = [_counter_gadget(b, f"H{i}.1.", x, "+") for i, x in enumerate(inst.X, 1)]
    second = [_counter_gadget(b, f"H{i}.2.", x, "+") for i, x in enumerate(inst.X, 1)]
    neg = _counter_gadget(b, "H-2S.", 2 * inst.S, "-")
    u = lambda i: f"u{i}"
    vv = lambda i: f"v{i}"
    for i in range(1, n + 1):
        nxt = u(i + 1) if i < n else "d"
        b.edge(u(i), first[i - 1][0], opening(1, D1))
        b.edge(u(i), nxt, opening(1, D0))
        b.edge(first[i - 1][1], nxt)
    b.edge("d", vv(n), closing(1, D0))
    b.edge("d", second[n - 1][0], closing(1, D1))
    for i in range(1, n + 1):
        b.edge(second[i - 1][1], vv(i))
    for i in range(1, n):
        b.edge(vv(i + 1), vv(i), closing(1, D0))
        b.edge(vv(i + 1), second[i - 1][0], closing(1, D1))
    b.edge(vv(1), neg[0])
    b.edge(neg[1], "v")
    g = b.build()
    return g, b.ids["u1"], b.ids["v"], ReductionArtifacts(dict(b.ids))


# -------------------------------------------------------- orthogonal vectors

@dataclass(frozen=True)
class OVInstance:
    X: Tuple[Tuple[int, ...], ...]
    Y: Tuple[Tuple[int, ...], ...]
    D: int

    def __post_init__(self):
        X = tuple(tuple(v) for v in self.X)
        Y = tuple(tuple(v) for v in self.Y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if len(X) != len(Y):
            raise ValueError("X and Y must have the same size")
        for vec in X + Y:
            if len(vec) != self.D:
                raise ValueError(f"vector {vec} does not have dimension {self.D}")
            if any(c not in (0, 1) for c in vec):
                raise ValueError(f"vector {vec} is not binary")


def brute_ov(inst: OVInstance) -> bool:
    return any(all(a * b == 0 for a, b in zip(x, y)) for x in inst.X for y in inst.Y)


def ov_node_count(inst: OVInstance) -> int:
    """Nodes emitted by gen_ov: u, w, v, two chains of D+1 nodes per vector
    pair, and a (3l+2)-node gadget per zero coordinate l of each y."""
    gadgets = sum(3 * l + 2 for y in inst.Y for l in range(1, inst.D + 1) if y[l - 1] == 0)
    return 3 + 2 * len(inst.X) * (inst.D + 1) + gadgets


def gen_ov(inst: OVInstance):
    """Returns (graph, u, v, artifacts).  Alphabet 1 is {γ0, γ1}."""
    D = inst.D
    b = Builder(2, 1)
    for nm in ("u", "w", "v"):
        b.node(nm)
    for i, x in enumerate(inst.X, 1):
        x_ = lambda l: f"x{i}^{l}"
        b.edge("u", x_(1))
        for l in range(1, D + 1):
            b.edge(x_(l), x_(l + 1), opening(1, G1 if x[l - 1] else G0))
        b.edge(x_(D + 1), "w")
    for j, y in enumerate(inst.Y, 1):
        y_ = lambda l: f"y{j}^{l}"
        b.edge("w", y_(D + 1))
        for l in range(D, 0, -1):
            b.edge(y_(l + 1), y_(l), closing(1, G0))
            if y[l - 1] == 0:
                p, q = _power_gadget(b, f"Y{j}.{l}.", l, "+")
                b.edge(y_(l + 1), p, closing(1, G1))
                b.edge(q, y_(l))
        b.edge(y_(1), "v")
    b.edge("v", "v", MINUS)
    g = b.build()
    return g, b.ids["u"], b.ids["v"], ReductionArtifacts(dict(b.ids))


# ---------------------------------------------------- directed to bidirected

def _lift_label(lab: Label, k1: int) -> Label:
    """Input label as a symbol of alphabet 2'."""
    s = lab.symbol if lab.alphabet == 1 else k1 + lab.symbol
    return Label(2, s, lab.is_open)


def _guess_back(lab: Label, k1: int) -> Label:
    return _lift_label(lab, k1).complement() if lab.alphabet == 2 else EPSILON


def _verify_fwd(lab: Label, k1: int) -> Label:
    return _lift_label(lab, k1) if lab.alphabet == 1 else EPSILON


def gen_bidirect(dg: DirectedGraph, u: int, v: int):
    """Bidirected instance G' with s ~ t in G' iff v is reachable from u in dg.

    Alphabet 1' has one symbol per input edge.  Alphabet 2' holds the input
    alphabet 1 (symbols 1..k1), the input alphabet 2 (k1+1..k1+k2) and a
    fresh symbol ν.  Returns (graph, s, t, artifacts).
    """
    seen = set()
    for a, c, _ in dg.edges:
        if (a, c) in seen:
            raise ValueError(f"multigraph input: two edges {a}->{c}")
        seen.add((a, c))
    if not (0 <= u < dg.n and 0 <= v < dg.n):
        raise ValueError("query nodes out of range")
    nu = dg.k1 + dg.k2 + 1
    b = Builder(len(dg.edges), nu)
    for x in range(dg.n):
        b.node(f"n{x}")
    b.node("s")
    b.node("t")
    art = ReductionArtifacts({}, nu=nu, source=dg)
    for e, (x, y, lab) in enumerate(dg.edges):
        sym = e + 1
        art.edge_symbol[e] = sym
        gm, vm = f"g{e}", f"w{e}"
        b.edge("s", gm, opening(1, sym))
        b.edge(gm, "s", _guess_back(lab, dg.k1))
        b.edge(f"n{x}", vm, closing(1, sym))
        b.edge(vm, f"n{y}", _verify_fwd(lab, dg.k1))
        art.guess_mid[e] = b.ids[gm]
        art.verify_mid[e] = b.ids[vm]
    b.edge("s", f"n{u}", opening(2, nu))
    b.edge(f"n{v}", "t", closing(2, nu))
    art.names = dict(b.ids)
    return b.build(), b.ids["s"], b.ids["t"], art


def lift_witness(path: Sequence[int], g: InterleavedGraph, art: ReductionArtifacts) -> Traversal:
    """Translate a non-empty directed witness (edge indices of the source
    graph) into a walk s -> t of g: guess loops for e_m .. e_1 (so e_1 ends
    on top), then ν, then the verify paths of e_1 .. e_m, then ν̄."""
    dg = art.source
    if not path:
        raise ValueError("empty witness has no edges to lift")
    m = label_metrics([dg.edges[i][2] for i in path])
    if not m.valid or m.cnt != (0, 0):
        raise ValueError("path is not a valid witness")
    for a, b in zip(path, path[1:]):
        if dg.edges[a][1] != dg.edges[b][0]:
            raise ValueError("path does not chain")
    ids = art.names
    node = lambda x: ids[f"n{x}"]
    s, t = ids["s"], ids["t"]
    steps = []

    def go(a, c, lab):
        steps.append(g.edge_index(a, c, lab))

    for i in reversed(path):
        lab = dg.edges[i][2]
        go(s, art.guess_mid[i], opening(1, art.edge_symbol[i]))
        go(art.guess_mid[i], s, _guess_back(lab, dg.k1))
    go(s, node(dg.edges[path[0]][0]), opening(2, art.nu))
    for i in path:
        x, y, lab = dg.edges[i]
        go(node(x), art.verify_mid[i], closing(1, art.edge_symbol[i]))
        go(art.verify_mid[i], node(y), _verify_fwd(lab, dg.k1))
    go(node(dg.edges[path[-1]][1]), t, closing(2, art.nu))
    return Traversal(s, tuple(steps))


# ------------------------------------------------------------------ random

def gen_random_bidirected(n: int, m: int, k1: int = 1, k2: int = 1, seed: int = 0) -> InterleavedGraph:
    """m half-edges with uniform endpoints and labels uniform over ε and
    the opens of both alphabets."""
    if m < 0 or n < 0:
        raise ValueError("sizes must be non-negative")
    if n == 0 and m > 0:
        raise ValueError("cannot place edges on an empty graph")
    rng = random.Random(seed)
    labels = [EPSILON] + [opening(1, s) for s in range(1, k1 + 1)] + \
             [opening(2, s) for s in range(1, k2 + 1)]
    edges = [(rng.randrange(n), rng.randrange(n), rng.choice(labels)) for _ in range(m)]
    return InterleavedGraph(n, k1, k2, edges)
