"""Graph data model for interleaved bidirected Dyck graphs.

Only half-edges are stored.  Every half-edge (u, v, L) stands for the pair
of logical edges (u, v, L) and (v, u, complement(L)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple


class GraphFormatError(ValueError):
    """Raised when an ibdg document cannot be parsed."""

    def __init__(self, msg, line=None):
        self.line = line
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)


class TraversalError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Label:
    """Epsilon when alphabet == 0, otherwise a parenthesis."""
    alphabet: int = 0
    symbol: int = 0
    is_open: bool = False

    @property
    def is_epsilon(self):
        return self.alphabet == 0

    def complement(self) -> "Label":
        if self.alphabet == 0:
            return self
        return Label(self.alphabet, self.symbol, not self.is_open)

    @property
    def code(self) -> str:
        if self.alphabet == 0:
            return "-"
        return f"{'o' if self.is_open else 'c'}{self.alphabet}:{self.symbol}"

    @classmethod
    def parse(cls, code: str) -> "Label":
        if code == "-":
            return EPSILON
        if len(code) < 4 or code[0] not in "oc" or ":" not in code:
            raise ValueError(f"bad label code {code!r}")
        a, s = code[1:].split(":", 1)
        if not a.isdigit() or not s.isdigit():
            raise ValueError(f"bad label code {code!r}")
        a, s = int(a), int(s)
        if a not in (1, 2) or s < 1:
            raise ValueError(f"bad label code {code!r}")
        return cls(a, s, code[0] == "o")

    def __str__(self):
        return self.code


EPSILON = Label()


def opening(a: int, s: int) -> Label:
    return Label(a, s, True)


def closing(a: int, s: int) -> Label:
    return Label(a, s, False)


Edge = Tuple[int, int, Label]


def edge_key(e: Edge):
    return (e[0], e[1], e[2].code)


def _check_label(lab: Label, k1: int, k2: int):
    if lab.alphabet == 0:
        return
    k = k1 if lab.alphabet == 1 else k2
    if lab.symbol > k:
        raise ValueError(f"symbol {lab.symbol} > k{lab.alphabet}={k}")


class InterleavedGraph:
    """Immutable bidirected graph.  ``half_edges`` is sorted canonically.

    A half-edge whose mirror is already present counts as a duplicate, so
    (0, 1, o1:1) and (1, 0, c1:1) describe the same logical pair.
    """

    __slots__ = ("n", "k1", "k2", "half_edges", "_index")

    def __init__(self, n: int, k1: int, k2: int, half_edges: Iterable[Edge] = ()):
        if n < 0 or k1 < 0 or k2 < 0:
            raise ValueError("negative size")
        seen = set()
        kept = []
        for src, dst, lab in half_edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"node id out of range in edge {src} {dst}")
            _check_label(lab, k1, k2)
            e = (int(src), int(dst), lab)
            if e in seen:
                continue
            seen.add(e)
            seen.add((e[1], e[0], lab.complement()))
            kept.append(e)
        kept.sort(key=edge_key)
        self.n = n
        self.k1 = k1
        self.k2 = k2
        self.half_edges: Tuple[Edge, ...] = tuple(kept)
        self._index = None

    def __eq__(self, other):
        if not isinstance(other, InterleavedGraph):
            return NotImplemented
        return (self.n, self.k1, self.k2, self.half_edges) == (
            other.n, other.k1, other.k2, other.half_edges)

    def __hash__(self):
        return hash((self.n, self.k1, self.k2, self.half_edges))

    def __repr__(self):
        return f"InterleavedGraph(n={self.n}, k1={self.k1}, k2={self.k2}, m={len(self.half_edges)})"

    @property
    def m(self):
        return len(self.half_edges)

    def edge_index(self, src, dst, lab) -> int:
        """Index of the half-edge that realizes logical edge (src, dst, lab)
        in either orientation; raises KeyError when absent."""
        if self._index is None:
            idx = {}
            for i, e in enumerate(self.half_edges):
                idx[e] = (i, True)
                idx.setdefault((e[1], e[0], e[2].complement()), (i, False))
            self._index = idx
        return self._index[(src, dst, lab)]

    def logical_edges(self) -> Iterator[Tuple[int, int, Label, int, bool]]:
        """Yield (src, dst, label, half-edge index, forward) for every
        logical edge; an epsilon self-loop yields once."""
        for i, (u, v, lab) in enumerate(self.half_edges):
            yield u, v, lab, i, True
            if not (u == v and lab.is_epsilon):
                yield v, u, lab.complement(), i, False


class DirectedGraph:
    """Plain directed interleaved graph (no implicit mirrors)."""

    def __init__(self, n: int, k1: int, k2: int, edges: Iterable[Edge] = ()):
        es = []
        for src, dst, lab in edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"node id out of range in edge {src} {dst}")
            _check_label(lab, k1, k2)
            es.append((int(src), int(dst), lab))
        self.n, self.k1, self.k2 = n, k1, k2
        self.edges: Tuple[Edge, ...] = tuple(es)

    def __repr__(self):
        return f"DirectedGraph(n={self.n}, m={len(self.edges)})"


# ---------------------------------------------------------------- text format

def _parse_lines(text: str):
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "graph" or len(parts) != 4:
                raise GraphFormatError("missing header 'graph <n> <k1> <k2>'", lineno)
            try:
                n, k1, k2 = (int(p) for p in parts[1:])
            except ValueError:
                raise GraphFormatError("header values must be integers", lineno) from None
            if min(n, k1, k2) < 0:
                raise GraphFormatError("header values must be non-negative", lineno)
            header = (n, k1, k2)
            continue
        if parts[0] != "e" or len(parts) != 4:
            raise GraphFormatError(f"malformed line {line!r}", lineno)
        try:
            src, dst = int(parts[1]), int(parts[2])
            lab = Label.parse(parts[3])
        except ValueError as exc:
            raise GraphFormatError(str(exc), lineno) from None
        n, k1, k2 = header
        for x in (src, dst):
            if not 0 <= x < n:
                raise GraphFormatError(f"node id {x} >= n={n}", lineno)
        try:
            _check_label(lab, k1, k2)
        except ValueError as exc:
            raise GraphFormatError(str(exc), lineno) from None
        edges.append((src, dst, lab))
    if header is None:
        raise GraphFormatError("missing header 'graph <n> <k1> <k2>'")
    return header, edges


def parse_graph(text: str) -> InterleavedGraph:
    (n, k1, k2), edges = _parse_lines(text)
    return InterleavedGraph(n, k1, k2, edges)


def parse_directed_graph(text: str) -> DirectedGraph:
    (n, k1, k2), edges = _parse_lines(text)
    return DirectedGraph(n, k1, k2, edges)


def _dump(n, k1, k2, edges):
    lines = [f"graph {n} {k1} {k2}"]
    for u, v, lab in sorted(edges, key=edge_key):
        lines.append(f"e {u} {v} {lab.code}")
    return "\n".join(lines) + "\n"


def serialize_graph(g) -> str:
    if isinstance(g, DirectedGraph):
        return _dump(g.n, g.k1, g.k2, g.edges)
    return _dump(g.n, g.k1, g.k2, g.half_edges)


def load_graph(path) -> InterleavedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def save_graph(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_graph(g))


# ---------------------------------------------------------------- transforms

def project_alphabet(g: InterleavedGraph, a: int) -> InterleavedGraph:
    """Replace every label of the other alphabet by epsilon."""
    if a not in (1, 2):
        raise ValueError("alphabet must be 1 or 2")
    other = 3 - a
    edges = [(u, v, EPSILON if lab.alphabet == other else lab) for u, v, lab in g.half_edges]
    return InterleavedGraph(g.n, g.k1, g.k2, edges)


def mirror_closure(g: InterleavedGraph) -> List[Edge]:
    """Explicit directed edge list, sorted and without duplicates."""
    out = {(u, v, lab) for u, v, lab, _, _ in g.logical_edges()}
    return sorted(out, key=edge_key)


# ---------------------------------------------------------------- traversals

@dataclass(frozen=True)
class Traversal:
    start: int
    steps: Tuple[Tuple[int, bool], ...] = ()

    def __len__(self):
        return len(self.steps)


def step_edge(g: InterleavedGraph, step) -> Edge:
    idx, fwd = step
    u, v, lab = g.half_edges[idx]
    return (u, v, lab) if fwd else (v, u, lab.complement())


def traversal_edges(g: InterleavedGraph, t: Traversal) -> List[Edge]:
    """Logical edges walked by t; raises TraversalError if steps don't chain."""
    out = []
    cur = t.start
    if not 0 <= cur < g.n:
        raise TraversalError(f"start node {cur} out of range")
    for i, step in enumerate(t.steps):
        if not 0 <= step[0] < g.m:
            raise TraversalError(f"step {i}: bad edge index {step[0]}")
        e = step_edge(g, step)
        if e[0] != cur:
            raise TraversalError(f"step {i} departs {e[0]} but walk is at {cur}")
        out.append(e)
        cur = e[1]
    return out


def traversal_end(g: InterleavedGraph, t: Traversal) -> int:
    es = traversal_edges(g, t)
    return es[-1][1] if es else t.start


def traversal_labels(g, t) -> List[Label]:
    return [e[2] for e in traversal_edges(g, t)]


def reverse_traversal(g: InterleavedGraph, t: Traversal) -> Traversal:
    end = traversal_end(g, t)
    return Traversal(end, tuple((i, not f) for i, f in reversed(t.steps)))


def concat(g: InterleavedGraph, a: Traversal, b: Traversal) -> Traversal:
    if traversal_end(g, a) != b.start:
        raise TraversalError("traversals do not meet")
    return Traversal(a.start, a.steps + b.steps)


@dataclass(frozen=True)
class PathMetrics:
    cnt: Tuple[int, int]
    max_sh: Tuple[int, int]
    stack: Tuple[Tuple[int, ...], Tuple[int, ...]]
    valid: bool


def apply_label(stacks, lab: Label):
    """Return new (stack1, stack2) after lab, or None if the pop is illegal."""
    if lab.alphabet == 0:
        return stacks
    i = lab.alphabet - 1
    st = stacks[i]
    if lab.is_open:
        st = st + (lab.symbol,)
    else:
        if not st or st[-1] != lab.symbol:
            return None
        st = st[:-1]
    return (st, stacks[1]) if i == 0 else (stacks[0], st)


def label_metrics(labels: Sequence[Label]) -> PathMetrics:
    cnt = [0, 0]
    mx = [0, 0]
    stacks = ((), ())
    valid = True
    for lab in labels:
        if lab.alphabet == 0:
            continue
        i = lab.alphabet - 1
        cnt[i] += 1 if lab.is_open else -1
        mx[i] = max(mx[i], cnt[i])
        if valid:
            nxt = apply_label(stacks, lab)
            if nxt is None:
                valid = False
            else:
                stacks = nxt
    return PathMetrics(tuple(cnt), tuple(mx), stacks, valid)


def path_metrics(g: InterleavedGraph, t: Traversal) -> PathMetrics:
    return label_metrics(traversal_labels(g, t))


def _configs(g, t):
    """Prefix configurations (node, stack1, stack2) of a valid traversal."""
    es = traversal_edges(g, t)
    stacks = ((), ())
    confs = [(t.start, stacks)]
    for i, (_, v, lab) in enumerate(es):
        stacks = apply_label(stacks, lab)
        if stacks is None:
            raise TraversalError(f"invalid traversal: illegal pop at step {i}")
        confs.append((v, stacks))
    return confs


def is_irreducible(g: InterleavedGraph, t: Traversal) -> bool:
    confs = _configs(g, t)
    return len(set(confs)) == len(confs)


def reduce_traversal(g: InterleavedGraph, t: Traversal) -> Traversal:
    """Cut every cycle that revisits a configuration, scanning left to right."""
    confs = _configs(g, t)
    kept_steps: List[Tuple[int, bool]] = []
    kept_confs = [confs[0]]
    where = {confs[0]: 0}
    for step, conf in zip(t.steps, confs[1:]):
        if conf in where:
            j = where[conf]
            for c in kept_confs[j + 1:]:
                del where[c]
            del kept_confs[j + 1:]
            del kept_steps[j:]
            continue
        kept_steps.append(step)
        kept_confs.append(conf)
        where[conf] = len(kept_confs) - 1
    return Traversal(t.start, tuple(kept_steps))


# ---------------------------------------------------------------- partitions

class Partition:
    """Disjoint sets over 0..n-1 (union by rank, path compression)."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.count = n

    def __len__(self):
        return len(self.parent)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True

    def same(self, a, b) -> bool:
        return self.find(a) == self.find(b)

    def classes(self) -> List[List[int]]:
        groups = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return sorted(groups.values())

    def rep(self, x: int) -> int:
        """Minimum node id of x's class."""
        r = self.find(x)
        return min(y for y in range(len(self.parent)) if self.find(y) == r)

    def labels(self) -> List[int]:
        """Class label per node: the minimum id of its class."""
        out = [0] * len(self.parent)
        for cls in self.classes():
            for x in cls:
                out[x] = cls[0]
        return out

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        p = cls(len(labels))
        first = {}
        for x, lab in enumerate(labels):
            lab = int(lab)
            if lab in first:
                p.union(first[lab], x)
            else:
                first[lab] = x
        return p

    @classmethod
    def from_classes(cls, n, groups) -> "Partition":
        p = cls(n)
        for grp in groups:
            grp = list(grp)
            for y in grp[1:]:
                p.union(grp[0], y)
        return p

    def refines(self, other: "Partition") -> bool:
        """True when every class of self lies inside a class of other."""
        return all(other.same(cls[0], y) for cls in self.classes() for y in cls)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.classes() == other.classes()

    def __repr__(self):
        return f"Partition({self.classes()})"
