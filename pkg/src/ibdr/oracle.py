"""Ground-truth reachability by brute force.

Two independent engines live here: breadth-first search over
configurations (node, stack1, stack2) with explicit height caps, and the
classic cubic saturation for single-alphabet Dyck reachability.
"""
from __future__ import annotations

import os
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ResourceLimitError
from .graph import (DirectedGraph, Edge, InterleavedGraph, Label, Partition, Traversal,
                    edge_key, reduce_traversal)

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

DEFAULT_STATE_LIMIT = 10 ** 7

Stack = Union[int, Tuple[int, ...]]


def state_limit() -> int:
    env = os.environ.get("IBDR_STATE_LIMIT")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"IBDR_STATE_LIMIT must be an integer, got {env!r}") from None
    return DEFAULT_STATE_LIMIT


@dataclass(frozen=True)
class SearchCaps:
    """Caps on walk length and stack heights; None means uncapped."""
    max_len: Optional[int] = None
    max_sh1: Optional[int] = None
    max_sh2: Optional[int] = None

    def __post_init__(self):
        for v in (self.max_len, self.max_sh1, self.max_sh2):
            if v is not None and v < 0:
                raise ValueError("caps must be non-negative")


@dataclass(frozen=True)
class Configuration:
    """Node plus both stacks.  A unary alphabet's stack is a bare counter."""
    node: int
    stack1: Stack = ()
    stack2: Stack = ()


def empty_stack(k: int) -> Stack:
    return 0 if k == 1 else ()


def algorithm2_length_bound(n: int, k: int, delta: int) -> int:
    """n^3 * k^(3*delta), exactly (Python ints are unbounded)."""
    if min(n, k, delta) < 0:
        raise ValueError("arguments must be non-negative")
    return n ** 3 * k ** (3 * delta)


# ------------------------------------------------------------ python search

def _py_apply(st: Stack, k: int, sym: int, push: bool, cap):
    if k == 1:
        if push:
            return st + 1 if cap is None or st < cap else None
        return st - 1 if st > 0 else None
    if push:
        return st + (sym,) if cap is None or len(st) < cap else None
    if st and st[-1] == sym:
        return st[:-1]
    return None


class Exploration:
    """Result of one search: visited configurations in BFS order with
    parent pointers (index into the same order) and the edge used."""

    def __init__(self, confs: List[Configuration], parent: List[int], via: List[int], edges):
        self.confs = confs
        self.parent = parent
        self.via = via
        self.edges = edges
        self._pos = None

    def __len__(self):
        return len(self.confs)

    def index(self, conf: Configuration) -> Optional[int]:
        if self._pos is None:
            self._pos = {c: i for i, c in enumerate(self.confs)}
        return self._pos.get(conf)

    def path_to(self, i: int) -> List[int]:
        """Edge ids from the start configuration to confs[i]."""
        out = []
        while self.parent[i] >= 0:
            out.append(self.via[i])
            i = self.parent[i]
        out.reverse()
        return out


def _adjacency(n, edges: Sequence[Edge]):
    order = sorted(range(len(edges)), key=lambda i: edge_key(edges[i]))
    adj = [[] for _ in range(n)]
    for i in order:
        adj[edges[i][0]].append(i)
    return adj


def _explore_python(n, k1, k2, edges, start: Configuration, caps: SearchCaps,
                    target: Optional[Configuration], limit: int) -> Exploration:
    adj = _adjacency(n, edges)
    confs = [start]
    parent = [-1]
    via = [-1]
    depth = [0]
    seen = {start: 0}
    head = 0
    if target is not None and start == target:
        return Exploration(confs, parent, via, edges)
    while head < len(confs):
        conf = confs[head]
        d = depth[head]
        if caps.max_len is not None and d >= caps.max_len:
            head += 1
            continue
        for ei in adj[conf.node]:
            _, dst, lab = edges[ei]
            s1, s2 = conf.stack1, conf.stack2
            if lab.alphabet == 1:
                s1 = _py_apply(s1, k1, lab.symbol, lab.is_open, caps.max_sh1)
                if s1 is None:
                    continue
            elif lab.alphabet == 2:
                s2 = _py_apply(s2, k2, lab.symbol, lab.is_open, caps.max_sh2)
                if s2 is None:
                    continue
            nxt = Configuration(dst, s1, s2)
            if nxt in seen:
                continue
            seen[nxt] = len(confs)
            confs.append(nxt)
            parent.append(head)
            via.append(ei)
            depth.append(d + 1)
            if len(confs) > limit:
                raise ResourceLimitError(f"configuration search exceeded {limit} states")
            if target is not None and nxt == target:
                return Exploration(confs, parent, via, edges)
        head += 1
    return Exploration(confs, parent, via, edges)


# ------------------------------------------------------------- numba search

if njit is not None:

    @njit(cache=True)
    def _stack_step(code, counter, lim, base, sym, push):
        # returns new code or -1
        if counter:
            if push:
                return code + 1 if code < lim else -1
            return code - 1 if code > 0 else -1
        if push:
            return code * base + sym if code < lim else -1
        if code % base == sym and code > 0:
            return code // base
        return -1

    @njit(cache=True)
    def _bfs_kernel(start_key, target_key, n, s1, s2, ptr, e_dst, e_alpha, e_sym, e_push,
                    cnt1, lim1, b1, cnt2, lim2, b2, max_len, limit, dense):
        total = n * s1 * s2
        if dense:
            visited = np.zeros(total, dtype=np.uint8)
            hkeys = np.empty(1, dtype=np.int64)
        else:
            visited = np.zeros(1, dtype=np.uint8)
            hkeys = np.full(1 << 12, -1, dtype=np.int64)
        hcount = 0
        cap = 1024
        keys = np.empty(cap, dtype=np.int64)
        par = np.empty(cap, dtype=np.int64)
        via = np.empty(cap, dtype=np.int64)
        dep = np.empty(cap, dtype=np.int64)
        keys[0] = start_key
        par[0] = -1
        via[0] = -1
        dep[0] = 0
        cnt = 1
        # mark start
        if dense:
            visited[start_key] = 1
        else:
            mask = len(hkeys) - 1
            h = ((start_key ^ (start_key >> 17)) * 2654435761) & mask
            hkeys[h] = start_key
            hcount = 1
        if start_key == target_key:
            return keys[:cnt], par[:cnt], via[:cnt], 0
        head = 0
        s12 = s1 * s2
        while head < cnt:
            key = keys[head]
            d = dep[head]
            if max_len >= 0 and d >= max_len:
                head += 1
                continue
            node = key // s12
            rem = key - node * s12
            c1 = rem // s2
            c2 = rem - c1 * s2
            for ei in range(ptr[node], ptr[node + 1]):
                a = e_alpha[ei]
                n1 = c1
                n2 = c2
                if a == 1:
                    n1 = _stack_step(c1, cnt1, lim1, b1, e_sym[ei], e_push[ei])
                    if n1 < 0:
                        continue
                elif a == 2:
                    n2 = _stack_step(c2, cnt2, lim2, b2, e_sym[ei], e_push[ei])
                    if n2 < 0:
                        continue
                nk = (e_dst[ei] * s1 + n1) * s2 + n2
                if dense:
                    if visited[nk]:
                        continue
                    visited[nk] = 1
                else:
                    mask = len(hkeys) - 1
                    h = ((nk ^ (nk >> 17)) * 2654435761) & mask
                    found = False
                    while hkeys[h] != -1:
                        if hkeys[h] == nk:
                            found = True
                            break
                        h = (h + 1) & mask
                    if found:
                        continue
                    hkeys[h] = nk
                    hcount += 1
                    if hcount * 2 > len(hkeys):
                        old = hkeys
                        hkeys = np.full(len(old) * 2, -1, dtype=np.int64)
                        mask = len(hkeys) - 1
                        for j in range(len(old)):
                            x = old[j]
                            if x != -1:
                                h = ((x ^ (x >> 17)) * 2654435761) & mask
                                while hkeys[h] != -1:
                                    h = (h + 1) & mask
                                hkeys[h] = x
                if cnt == cap:
                    cap *= 2
                    keys2 = np.empty(cap, dtype=np.int64)
                    par2 = np.empty(cap, dtype=np.int64)
                    via2 = np.empty(cap, dtype=np.int64)
                    dep2 = np.empty(cap, dtype=np.int64)
                    keys2[:cnt] = keys[:cnt]
                    par2[:cnt] = par[:cnt]
                    via2[:cnt] = via[:cnt]
                    dep2[:cnt] = dep[:cnt]
                    keys, par, via, dep = keys2, par2, via2, dep2
                keys[cnt] = nk
                par[cnt] = head
                via[cnt] = ei
                dep[cnt] = d + 1
                cnt += 1
                if cnt > limit:
                    return keys[:cnt], par[:cnt], via[:cnt], 1
                if nk == target_key:
                    return keys[:cnt], par[:cnt], via[:cnt], 0
            head += 1
        return keys[:cnt], par[:cnt], via[:cnt], 0


_DENSE_LIMIT = 6 * 10 ** 7
_KEY_LIMIT = 1 << 62


class _Codec:
    """Integer encoding of stacks: a unary alphabet is a counter, otherwise
    base-(k+1) digits with the top of stack as the least digit."""

    def __init__(self, k, cap):
        self.k = k
        self.counter = k <= 1
        if k == 0:
            self.size, self.lim, self.base = 1, 0, 2
        elif k == 1:
            self.size, self.lim, self.base = cap + 1, cap, 2
        else:
            self.base = k + 1
            self.size = self.base ** cap
            self.lim = self.base ** (cap - 1) if cap > 0 else 0

    def encode(self, st: Stack) -> int:
        if self.counter:
            return int(st) if self.k == 1 else 0
        code = 0
        for s in st:
            code = code * self.base + s
        return code

    def decode(self, code: int) -> Stack:
        if self.k == 0:
            return ()
        if self.counter:
            return int(code)
        out = []
        while code:
            out.append(code % self.base)
            code //= self.base
        return tuple(reversed(out))


def _kernel_plan(n, k1, k2, caps: SearchCaps):
    if njit is None or caps.max_sh1 is None and k1 > 0 or caps.max_sh2 is None and k2 > 0:
        return None
    c1 = _Codec(k1, caps.max_sh1 or 0)
    c2 = _Codec(k2, caps.max_sh2 or 0)
    if n * c1.size * c2.size >= _KEY_LIMIT:
        return None
    return c1, c2


def _explore_kernel(n, edges, start, caps, target, limit, plan) -> Exploration:
    c1, c2 = plan
    order = sorted(range(len(edges)), key=lambda i: edge_key(edges[i]))
    ptr = np.zeros(n + 1, dtype=np.int64)
    for i in order:
        ptr[edges[i][0] + 1] += 1
    ptr = np.cumsum(ptr)
    m = len(order)
    e_dst = np.empty(m, dtype=np.int64)
    e_alpha = np.empty(m, dtype=np.int64)
    e_sym = np.empty(m, dtype=np.int64)
    e_push = np.empty(m, dtype=np.bool_)
    for j, i in enumerate(order):  # order is grouped by src, so CSR slots line up
        _, v, lab = edges[i]
        e_dst[j], e_alpha[j], e_sym[j], e_push[j] = v, lab.alphabet, lab.symbol, lab.is_open
    s1, s2 = c1.size, c2.size

    def enc(conf):
        return (conf.node * s1 + c1.encode(conf.stack1)) * s2 + c2.encode(conf.stack2)

    tkey = enc(target) if target is not None else -1
    dense = n * s1 * s2 <= _DENSE_LIMIT
    keys, par, via, status = _bfs_kernel(
        enc(start), tkey, n, s1, s2, ptr, e_dst, e_alpha, e_sym, e_push,
        c1.counter, c1.lim, c1.base, c2.counter, c2.lim, c2.base,
        -1 if caps.max_len is None else caps.max_len, limit, dense)
    if status == 1:
        raise ResourceLimitError(f"configuration search exceeded {limit} states")
    via = via.copy()
    ok = via >= 0
    via[ok] = np.asarray(order, dtype=np.int64)[via[ok]]
    exp = _LazyExploration(keys, par.tolist(), via.tolist(), edges, (s1, s2, c1, c2))
    return exp


class _LazyExploration(Exploration):
    def __init__(self, keys, parent, via, edges, codec):
        super().__init__(None, parent, via, edges)
        self.keys = keys
        self.codec = codec
        self._kpos = None

    def __len__(self):
        return len(self.keys)

    def _key(self, conf):
        s1, s2, c1, c2 = self.codec
        return (conf.node * s1 + c1.encode(conf.stack1)) * s2 + c2.encode(conf.stack2)

    def decode(self, key) -> Configuration:
        s1, s2, c1, c2 = self.codec
        node, rem = divmod(int(key), s1 * s2)
        a, b = divmod(rem, s2)
        return Configuration(node, c1.decode(a), c2.decode(b))

    @property
    def all_confs(self):
        return [self.decode(k) for k in self.keys]

    def index(self, conf):
        try:
            key = self._key(conf)
        except (TypeError, ValueError):
            return None
        if self._kpos is None:
            self._kpos = {int(k): i for i, k in enumerate(self.keys.tolist())}
        return self._kpos.get(key)

    def empty_stack_nodes(self):
        s12 = self.codec[0] * self.codec[1]
        ks = self.keys[self.keys % s12 == 0]
        return sorted(set((ks // s12).tolist()))


def explore(n, k1, k2, edges: Sequence[Edge], start: Configuration, caps: SearchCaps,
            target: Optional[Configuration] = None, limit: Optional[int] = None,
            backend: str = "auto") -> Exploration:
    """Breadth-first search over configurations along directed ``edges``.

    Stops early once ``target`` is discovered.  Raises ResourceLimitError if
    more than ``limit`` configurations would be visited.
    """
    limit = state_limit() if limit is None else limit
    plan = _kernel_plan(n, k1, k2, caps) if backend != "python" else None
    if backend == "numba" and plan is None:
        raise ValueError("numba backend needs finite caps and a 62-bit key space")
    if plan is not None:
        try:
            return _explore_kernel(n, edges, start, caps, target, limit, plan)
        except (TypeError, ValueError):
            # start/target stack outside the codec's range
            if backend == "numba":
                raise
    return _explore_python(n, k1, k2, edges, start, caps, target, limit)


def empty_stack_nodes(exp: Exploration) -> List[int]:
    if isinstance(exp, _LazyExploration):
        return exp.empty_stack_nodes()
    k_empty = {(), 0}
    return sorted({c.node for c in exp.confs if c.stack1 in k_empty and c.stack2 in k_empty})


def exploration_confs(exp: Exploration) -> List[Configuration]:
    if isinstance(exp, _LazyExploration):
        return exp.all_confs
    return list(exp.confs)


# ---------------------------------------------------------- public searches

def _bidirected_edges(g: InterleavedGraph):
    edges, steps = [], []
    for u, v, lab, idx, fwd in g.logical_edges():
        edges.append((u, v, lab))
        steps.append((idx, fwd))
    return edges, steps


def bounded_reach(g: InterleavedGraph, src: int, dst: int, caps: SearchCaps,
                  limit: Optional[int] = None, backend="auto") -> Optional[Traversal]:
    """Shortest valid walk src -> dst starting and ending with empty stacks,
    every prefix within caps; None if no such walk exists."""
    edges, steps = _bidirected_edges(g)
    start = Configuration(src, empty_stack(g.k1), empty_stack(g.k2))
    goal = Configuration(dst, empty_stack(g.k1), empty_stack(g.k2))
    exp = explore(g.n, g.k1, g.k2, edges, start, caps, goal, limit, backend)
    i = exp.index(goal)
    if i is None:
        return None
    path = exp.path_to(i)
    t = Traversal(src, tuple(steps[e] for e in path))
    return reduce_traversal(g, t)


def directed_bounded_reach(dg: DirectedGraph, src: int, dst: int, caps: SearchCaps,
                           limit: Optional[int] = None, backend="auto") -> Optional[List[int]]:
    """Same as bounded_reach on a directed graph; returns edge indices."""
    start = Configuration(src, empty_stack(dg.k1), empty_stack(dg.k2))
    goal = Configuration(dst, empty_stack(dg.k1), empty_stack(dg.k2))
    exp = explore(dg.n, dg.k1, dg.k2, dg.edges, start, caps, goal, limit, backend)
    i = exp.index(goal)
    if i is None:
        return None
    return exp.path_to(i)


def all_pairs_bounded(g: InterleavedGraph, caps: SearchCaps, limit: Optional[int] = None,
                      backend="auto") -> Partition:
    """u ~ v iff a capped witness exists.  One search per class suffices:
    the configuration graph of a bidirected graph is symmetric."""
    edges, _ = _bidirected_edges(g)
    p = Partition(g.n)
    done = [False] * g.n
    for u in range(g.n):
        if done[u]:
            continue
        start = Configuration(u, empty_stack(g.k1), empty_stack(g.k2))
        exp = explore(g.n, g.k1, g.k2, edges, start, caps, None, limit, backend)
        for v in empty_stack_nodes(exp):
            p.union(u, v)
            done[v] = True
        done[u] = True
    return p


def directed_traversal_labels(dg: DirectedGraph, path: Sequence[int]) -> List[Label]:
    return [dg.edges[i][2] for i in path]


# ------------------------------------------------------------- saturation

def naive_dyck_closure(edges: Sequence[Edge], k: Optional[int] = None,
                       n: Optional[int] = None) -> set:
    """All (u, v) joined by a path whose label is a Dyck word, by worklist
    saturation.  Every (alphabet, symbol) pair counts as its own symbol, so
    callers project alphabets beforehand if needed."""
    nodes = set()
    for u, v, lab in edges:
        nodes.update((u, v))
        if k is not None and lab.symbol > k:
            raise ValueError(f"symbol {lab.symbol} exceeds k={k}")
    if n is not None:
        nodes.update(range(n))
    opens_into = defaultdict(list)   # x -> [(w, sym)] for w -open-> x
    closes_from = defaultdict(list)  # y -> [(z, sym)] for y -close-> z
    rel = set()
    succ = defaultdict(set)
    pred = defaultdict(set)
    work = deque()

    def add(a, b):
        if (a, b) not in rel:
            rel.add((a, b))
            succ[a].add(b)
            pred[b].add(a)
            work.append((a, b))

    for u in nodes:
        add(u, u)
    for u, v, lab in edges:
        if lab.is_epsilon:
            add(u, v)
        elif lab.is_open:
            opens_into[v].append((u, (lab.alphabet, lab.symbol)))
        else:
            closes_from[u].append((v, (lab.alphabet, lab.symbol)))
    while work:
        x, y = work.popleft()
        for w in list(pred[x]):
            add(w, y)
        for z in list(succ[y]):
            add(x, z)
        if opens_into[x] and closes_from[y]:
            for w, s in opens_into[x]:
                for z, s2 in closes_from[y]:
                    if s == s2:
                        add(w, z)
    return rel


def closure_partition(n: int, rel) -> Partition:
    """Partition from a (symmetric on bidirected inputs) pair relation."""
    p = Partition(n)
    for a, b in rel:
        if (b, a) in rel:
            p.union(a, b)
    return p


def counter_product_partition(g: InterleavedGraph, counter_cap: int) -> Partition:
    """Exact oracle for the bounded-counter problem (k2 = 1): saturation on
    the product of g with counter values 0..counter_cap.  Stack 1 is
    unbounded here; stack 2 never leaves [0, counter_cap]."""
    if g.k2 != 1:
        raise ValueError("counter product needs a unary second alphabet")
    width = counter_cap + 1
    out = []
    for u, v, lab, _, _ in g.logical_edges():
        for j in range(width):
            a, b = u * width + j, v * width + j
            if lab.alphabet == 2:
                if lab.is_open:
                    if j < counter_cap:
                        out.append((a, b + 1, Label()))
                elif j > 0:
                    out.append((a, b - 1, Label()))
            else:
                out.append((a, b, lab))
    rel = naive_dyck_closure(out, n=g.n * width)
    p = Partition(g.n)
    for a, b in rel:
        if a % width == 0 and b % width == 0:
            p.union(a // width, b // width)
    return p
