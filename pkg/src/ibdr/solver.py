"""Interleaved solvers by counter flattening, plus preprocessing passes.

The unary second alphabet is a counter.  Copying every node once per
counter value 0..c turns counter moves into level changes, and the
remaining first alphabet is solved by the bidirected Dyck engine.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .engine import solve_arrays, solve_bidirected_dyck
from .errors import ResourceLimitError
from .graph import EPSILON, InterleavedGraph, Label, Partition

_ID_LIMIT = 1 << 62


def default_counter_bound(n: int) -> int:
    """18 n^2 + 6 n."""
    return 18 * n * n + 6 * n


def alternate_counter_bound(n: int) -> int:
    """2*gamma + 8n with gamma = 2n(n-1); the tighter of the two constants."""
    return 2 * (2 * n * (n - 1)) + 8 * n


# ---------------------------------------------------------------- flattening

@dataclass
class FlattenedGraph:
    base: InterleavedGraph
    c: int

    @property
    def width(self):
        return self.c + 1

    @property
    def n(self):
        return self.base.n * self.width

    def node_id(self, v: int, j: int) -> int:
        return v * self.width + j

    def arrays(self):
        """(eps_u, eps_v, close_x, close_s, close_y) numpy arrays; symbols
        are 0-based in alphabet 1."""
        w = self.width
        lv = np.arange(w, dtype=np.int64)
        eu, ev, cx, cs, cy = [], [], [], [], []
        for u, v, lab in self.base.half_edges:
            if lab.alphabet == 2:
                if self.c == 0:
                    continue
                if lab.is_open:
                    eu.append(u * w + lv[:-1])
                    ev.append(v * w + lv[:-1] + 1)
                else:
                    eu.append(u * w + lv[1:])
                    ev.append(v * w + lv[1:] - 1)
            elif lab.alphabet == 0:
                eu.append(u * w + lv)
                ev.append(v * w + lv)
            else:
                x, y = (v, u) if lab.is_open else (u, v)
                cx.append(x * w + lv)
                cy.append(y * w + lv)
                cs.append(np.full(w, lab.symbol - 1, dtype=np.int64))
        cat = lambda parts: np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        return cat(eu), cat(ev), cat(cx), cat(cs), cat(cy)

    def half_edges(self):
        """Canonical half-edges of the flattened graph (for inspection)."""
        w = self.width
        for u, v, lab in self.base.half_edges:
            for j in range(w):
                if lab.alphabet == 2:
                    if lab.is_open and j < self.c:
                        yield (u * w + j, v * w + j + 1, EPSILON)
                    elif not lab.is_open and j > 0:
                        yield (u * w + j, v * w + j - 1, EPSILON)
                else:
                    yield (u * w + j, v * w + j, lab)

    def to_graph(self) -> InterleavedGraph:
        return InterleavedGraph(self.n, self.base.k1, 0, self.half_edges())


def flatten_counter(g: InterleavedGraph, c: int) -> FlattenedGraph:
    if g.k2 != 1:
        raise ValueError(f"flattening needs a unary second alphabet (k2={g.k2})")
    if c < 0:
        raise ValueError("counter bound must be non-negative")
    if g.n * (c + 1) >= _ID_LIMIT:
        raise ResourceLimitError(f"flattened id space n*(c+1) = {g.n * (c + 1)} overflows 64 bits")
    return FlattenedGraph(g, c)


def _level0_partition(fg: FlattenedGraph) -> Partition:
    eu, ev, cx, cs, cy = fg.arrays()
    roots = solve_arrays(fg.n, fg.base.k1, eu, ev, cx, cs, cy)
    if fg.base.n == 0:
        return Partition(0)
    return Partition.from_labels(roots[:: fg.width].tolist())


def _require(g, k1=None, k2=None):
    if k2 is not None and g.k2 != k2:
        raise ValueError(f"expected k2={k2}, graph has k2={g.k2}")
    if k1 is not None and g.k1 != k1:
        raise ValueError(f"expected k1={k1}, graph has k1={g.k1}")


def solve_d1d1(g: InterleavedGraph, bound: Optional[int] = None) -> Partition:
    """D1 ⊙ D1 classes: flatten alphabet 2 up to the bound (default
    18n²+6n), solve alphabet 1, and read off level 0."""
    _require(g, 1, 1)
    c = default_counter_bound(g.n) if bound is None else bound
    return _level0_partition(flatten_counter(g, c))


def solve_dkd1_bounded(g: InterleavedGraph, bound: Optional[int] = None) -> Partition:
    """Dk ⊙ D1 classes over witnesses whose counter never exceeds the bound
    (default n).  Complete only up to that bound."""
    _require(g, k2=1)
    c = g.n if bound is None else bound
    return _level0_partition(flatten_counter(g, c))


# ------------------------------------------------------------- graph surgery

def _restrict(g: InterleavedGraph, keep: Sequence[int]):
    """Induced subgraph on ``keep`` (in that order); returns (graph, map)."""
    pos = {v: i for i, v in enumerate(keep)}
    edges = [(pos[u], pos[v], lab) for u, v, lab in g.half_edges if u in pos and v in pos]
    return InterleavedGraph(len(keep), g.k1, g.k2, edges), pos


def _neighbors(g: InterleavedGraph):
    nb = [set() for _ in range(g.n)]
    for u, v, _ in g.half_edges:
        nb[u].add(v)
        nb[v].add(u)
    return nb


@dataclass
class PreprocessReport:
    merged: int = 0
    removed: List[int] = field(default_factory=list)
    residual_n: int = 0
    residual_m: int = 0
    timings: Dict[str, float] = field(default_factory=dict)
    groups: List[List[int]] = field(default_factory=list)


# ------------------------------------------------------ union under-approx

def preprocess_under_approx(g: InterleavedGraph, mode: str = "union"):
    """Contract classes of a cheap under-approximation.

    mode "union" treats both alphabets as one Dyck alphabet.  mode
    "counter-free" drops alphabet-2 edges and uses alphabet 1 alone; its
    witnesses never touch the counter, so contraction stays exact for
    counter-bounded solving.  Returns (partition, contracted graph, node map)
    where node map[old] = new id; representatives keep their relative order.
    """
    if mode == "union":
        part = solve_bidirected_dyck(g, "union")
    elif mode == "counter-free":
        h = InterleavedGraph(g.n, g.k1, g.k2, [e for e in g.half_edges if e[2].alphabet != 2])
        part = solve_bidirected_dyck(h, "1")
    else:
        raise ValueError(f"unknown under-approximation mode {mode!r}")
    labels = part.labels()
    reps = sorted(set(labels))
    new_id = {r: i for i, r in enumerate(reps)}
    node_map = [new_id[labels[v]] for v in range(g.n)]
    edges = []
    for u, v, lab in g.half_edges:
        a, b = node_map[u], node_map[v]
        if a == b and lab.is_epsilon:
            continue
        edges.append((a, b, lab))
    return part, InterleavedGraph(len(reps), g.k1, g.k2, edges), node_map


# ---------------------------------------------- doubly-self-looped nodes

def _double_looped(g: InterleavedGraph):
    loops = [[False, False] for _ in range(g.n)]
    for u, v, lab in g.half_edges:
        if u == v and lab.alphabet in (1, 2):
            loops[u][lab.alphabet - 1] = True
    return [v for v in range(g.n) if loops[v][0] and loops[v][1]]


def _components(n, edges, skip):
    nb = [[] for _ in range(n)]
    for u, v, _ in edges:
        if u != skip and v != skip:
            nb[u].append(v)
            nb[v].append(u)
    comp = [-1] * n
    out = []
    for s in range(n):
        if s == skip or comp[s] != -1:
            continue
        comp[s] = len(out)
        cur = [s]
        q = deque([s])
        while q:
            x = q.popleft()
            for y in nb[x]:
                if comp[y] == -1:
                    comp[y] = comp[s]
                    cur.append(y)
                    q.append(y)
        out.append(sorted(cur))
    return out


def remove_doubly_self_looped(g: InterleavedGraph, solver=None):
    """Settle the class of every node carrying a self-loop on both alphabets.

    With both loops, such a node x can raise or drain either counter at
    will, so any witness that passes x puts its endpoints in x's class.
    The class of x is found by solving each component of g - x together
    with x.  The whole class is then cut out of the graph: a witness
    between two other nodes cannot cross it.  Returns (residual graph,
    report) where report.groups lists the settled classes and the residual
    keeps the original ids with the settled nodes isolated.
    """
    _require(g, 1, 1)
    solver = solver or solve_d1d1
    t0 = time.perf_counter()
    rep = PreprocessReport()
    settled = set()
    cur = g
    while True:
        cands = [x for x in _double_looped(cur) if x not in settled]
        if not cands:
            break
        x = cands[0]
        cls = {x}
        for comp in _components(cur.n, cur.half_edges, x):
            if any(x in (u, v) for u, v, _ in cur.half_edges if (u in comp or v in comp)):
                keep = comp + [x]
                sub, pos = _restrict(cur, keep)
                part = solver(sub)
                xi = pos[x]
                cls.update(keep[i] for i in range(len(keep)) if part.same(i, xi))
        rep.groups.append(sorted(cls))
        rep.merged += len(cls) - 1
        settled |= cls
        cur = InterleavedGraph(cur.n, cur.k1, cur.k2,
                               [e for e in cur.half_edges if e[0] not in cls and e[1] not in cls])
    rep.removed = sorted(settled)
    rep.residual_n = g.n - len(settled)
    rep.residual_m = cur.m
    rep.timings["selfloop"] = time.perf_counter() - t0
    return cur, rep


# ------------------------------------------------------------ leaf trimming

def _trim_certificate(g: InterleavedGraph, z: int, x: int, lab: Label, radius: int) -> bool:
    """True when no empty-stack start outside z can reach configuration
    (x, [lab.symbol] on lab's alphabet, other stack empty).

    Backward search from that configuration: undoing a push pops, undoing
    a pop pushes.  Reaching an empty configuration at a node other than z
    refutes the certificate; a frontier still alive after ``radius`` steps
    means we are unsure, which also refutes it.
    """
    start = (x, ((lab.symbol,), ()) if lab.alphabet == 1 else ((), (lab.symbol,)))
    incoming = [[] for _ in range(g.n)]
    for u, v, l, _, _ in g.logical_edges():
        incoming[v].append((u, l))
    seen = {start}
    frontier = [start]
    for _ in range(radius + 1):
        nxt = []
        for node, stacks in frontier:
            if stacks == ((), ()) and node != z:
                return False
            for u, l in incoming[node]:
                if l.alphabet == 0:
                    prev = stacks
                else:
                    i = l.alphabet - 1
                    st = stacks[i]
                    if l.is_open:
                        if not st or st[-1] != l.symbol:
                            continue
                        st = st[:-1]
                    else:
                        st = st + (l.symbol,)
                    prev = (st, stacks[1]) if i == 0 else (stacks[0], st)
                conf = (u, prev)
                if conf not in seen:
                    seen.add(conf)
                    nxt.append(conf)
        if not nxt:
            return True
        frontier = nxt
    return False


def trim_motifs(g: InterleavedGraph, radius: int = 3):
    """Iteratively remove leaves that no other node can reach.

    A leaf z has one stored half-edge, to a neighbour x != z.  If the
    logical edge x -> z pushes, every arrival at z leaves a symbol on a
    stack, so z is unreachable.  If it pops symbol s, z is unreachable when
    the backward certificate shows x never shows s alone on an otherwise
    empty pair of stacks.  Epsilon leaves are kept.  Walks through z are
    x, z, x with no net effect, so other classes are unaffected.
    Returns (graph with removed nodes isolated, report).
    """
    t0 = time.perf_counter()
    rep = PreprocessReport()
    cur = g
    removed = set()
    changed = True
    while changed:
        changed = False
        inc = [[] for _ in range(cur.n)]
        for i, (u, v, _) in enumerate(cur.half_edges):
            inc[u].append(i)
            if v != u:
                inc[v].append(i)
        for z in range(cur.n):
            if z in removed or len(inc[z]) != 1:
                continue
            u, v, lab = cur.half_edges[inc[z][0]]
            if u == v or lab.is_epsilon:
                continue
            x = u if v == z else v
            into = lab if v == z else lab.complement()
            if into.is_open or _trim_certificate(cur, z, x, into, radius):
                removed.add(z)
                cur = InterleavedGraph(cur.n, cur.k1, cur.k2,
                                       [e for e in cur.half_edges if z not in (e[0], e[1])])
                changed = True
                break
    rep.removed = sorted(removed)
    rep.residual_n = g.n - len(removed)
    rep.residual_m = cur.m
    rep.timings["trim"] = time.perf_counter() - t0
    return cur, rep


# ---------------------------------------------------------------- pipeline

@dataclass
class PipelineOptions:
    mode: str = "d1d1"
    underapprox: bool = True
    selfloop: bool = True
    trim: bool = True
    bound: Optional[int] = None
    trim_radius: int = 3


@dataclass
class PipelineResult:
    partition: Partition
    mode: str
    bound: int
    exact: bool
    under_approx: Optional[Partition] = None
    reports: Dict[str, PreprocessReport] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)


def _compact(g: InterleavedGraph, drop):
    keep = [v for v in range(g.n) if v not in drop]
    sub, pos = _restrict(g, keep)
    return sub, [pos.get(v, -1) for v in range(g.n)]


def run_pipeline(g: InterleavedGraph, opts: Optional[PipelineOptions] = None) -> PipelineResult:
    """Preprocess, solve, and lift the partition back to g's node ids."""
    opts = opts or PipelineOptions()
    if opts.mode not in ("d1d1", "dkd1-bounded"):
        raise ValueError(f"unknown mode {opts.mode!r}")
    if opts.mode == "d1d1":
        _require(g, 1, 1)
    else:
        _require(g, k2=1)
    timings = {}
    reports = {}
    # the default d1d1 bound is exact, so contraction and the self-loop pass
    # are safe; a bounded relation only tolerates counter-free rewrites
    exact = opts.mode == "d1d1" and opts.bound is None
    fixed_bound = None if exact else (opts.bound if opts.bound is not None else g.n)

    t0 = time.perf_counter()
    under = None
    cur = g
    maps: List[Tuple[List[int], List[List[int]]]] = []  # (node map, groups in pre-map ids)
    if opts.underapprox:
        under, cur, nmap = preprocess_under_approx(g, "union" if exact else "counter-free")
        maps.append((nmap, []))
    timings["underapprox"] = time.perf_counter() - t0

    if opts.selfloop and exact:
        t0 = time.perf_counter()
        resid, rep = remove_doubly_self_looped(cur)
        reports["selfloop"] = rep
        drop = set(rep.removed)
        nxt, nmap = _compact(resid, drop)
        maps.append((nmap, rep.groups))
        cur = nxt
        timings["selfloop"] = time.perf_counter() - t0

    if opts.trim:
        t0 = time.perf_counter()
        resid, rep = trim_motifs(cur, opts.trim_radius)
        reports["trim"] = rep
        nxt, nmap = _compact(resid, set(rep.removed))
        maps.append((nmap, []))
        cur = nxt
        timings["trim"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if opts.mode == "d1d1":
        bound = default_counter_bound(cur.n) if fixed_bound is None else fixed_bound
        part = solve_d1d1(cur, bound)
    else:
        bound = fixed_bound
        part = solve_dkd1_bounded(cur, bound)
    timings["solve"] = time.perf_counter() - t0

    for nmap, groups in reversed(maps):
        lifted = Partition(len(nmap))
        first = {}
        for old, new in enumerate(nmap):
            if new < 0:
                continue
            r = part.find(new)
            if r in first:
                lifted.union(first[r], old)
            else:
                first[r] = old
        for grp in groups:
            for y in grp[1:]:
                lifted.union(grp[0], y)
        part = lifted
    return PipelineResult(part, opts.mode, bound, exact, under, reports, timings)


def pipeline(g: InterleavedGraph, opts: Optional[PipelineOptions] = None) -> Partition:
    return run_pipeline(g, opts).partition
