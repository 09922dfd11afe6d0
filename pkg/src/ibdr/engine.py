"""All-pairs bidirected Dyck reachability by congruence closure.

On a bidirected graph, two close-s edges leaving the same class force
their targets together (z -s-> x -s̄-> y gives y ~ z).  We keep, per class
representative, a table close-symbol -> target and merge tables when
classes merge; every collision becomes another pending union.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .graph import InterleavedGraph, Partition

try:  # numba is optional; the Python path is always available
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


ACTIVE_CHOICES = ("1", "2", "union")


def _norm_active(active):
    active = str(active)
    if active not in ACTIVE_CHOICES:
        raise ValueError(f"active alphabet must be one of {ACTIVE_CHOICES}")
    return active


def symbol_count(g: InterleavedGraph, active) -> int:
    active = _norm_active(active)
    return {"1": g.k1, "2": g.k2, "union": g.k1 + g.k2}[active]


def _sym(lab, g, active):
    """0-based symbol id in the active alphabet, or None when lab acts as ε."""
    if lab.alphabet == 0:
        return None
    if active == "union":
        return lab.symbol - 1 + (g.k1 if lab.alphabet == 2 else 0)
    if str(lab.alphabet) != active:
        return None
    return lab.symbol - 1


def split_edges(g: InterleavedGraph, active="union"):
    """Return (eps_pairs, close_edges).

    close_edges holds (x, s, y) for every logical edge x -> y closing symbol s,
    i.e. stored closes plus mirrors of stored opens.
    """
    active = _norm_active(active)
    eps, closes = [], []
    for u, v, lab in g.half_edges:
        s = _sym(lab, g, active)
        if s is None:
            eps.append((u, v))
        elif lab.is_open:
            closes.append((v, s, u))
        else:
            closes.append((u, s, v))
    return eps, closes


class CongruenceState:
    """Union-find plus per-representative close tables and a worklist."""

    def __init__(self, n: int):
        self.partition = Partition(n)
        self.tables = [dict() for _ in range(n)]
        self.worklist = deque()

    def find(self, x):
        return self.partition.find(x)

    def add_close(self, x, s, y):
        """Record logical edge x -s̄-> y; a collision enqueues a union."""
        t = self.tables[self.find(x)]
        old = t.get(s)
        if old is None:
            t[s] = y
        elif self.find(old) != self.find(y):
            self.worklist.append((old, y))

    def drain(self, order=None):
        """Process pending unions to quiescence.  ``order`` (a random.Random)
        picks pending pairs in random order, for order-independence tests."""
        wl = self.worklist
        while wl:
            if order is not None and len(wl) > 1:
                i = order.randrange(len(wl))
                wl.rotate(-i)
            a, b = wl.popleft()
            union_with_congruence(self, a, b)
        return self


def union_with_congruence(state: CongruenceState, a: int, b: int) -> CongruenceState:
    """Merge the classes of a and b; collided table entries are enqueued."""
    p = state.partition
    ra, rb = p.find(a), p.find(b)
    if ra == rb:
        return state
    p.union(ra, rb)
    root = p.find(ra)
    child = rb if root == ra else ra
    big, small = state.tables[root], state.tables[child]
    if len(small) > len(big):
        big, small = small, big
    for s, y in small.items():
        x = big.get(s)
        if x is None:
            big[s] = y
        elif p.find(x) != p.find(y):
            state.worklist.append((x, y))
    state.tables[root] = big
    state.tables[child] = {}
    return state


def _solve_python(n, eps, closes, order=None) -> Partition:
    st = CongruenceState(n)
    for x, s, y in closes:
        st.add_close(x, s, y)
    for u, v in eps:
        st.worklist.append((u, v))
    st.drain(order)
    return st.partition


# ------------------------------------------------------------- numba kernel

if njit is not None:

    @njit(cache=True)
    def _find(parent, x):
        r = x
        while parent[r] != r:
            r = parent[r]
        while parent[x] != r:
            nxt = parent[x]
            parent[x] = r
            x = nxt
        return r

    @njit(cache=True)
    def _congruence_kernel(n, k, eu, ev, cx, cs, cy):
        parent = np.arange(n, dtype=np.int64)
        rank = np.zeros(n, dtype=np.int8)
        kk = max(k, 1)
        tgt = np.full(n * kk, -1, dtype=np.int64)
        cap = len(cx) + len(eu) + n * kk + 1
        qa = np.empty(cap, dtype=np.int64)
        qb = np.empty(cap, dtype=np.int64)
        top = 0
        for i in range(len(cx)):
            slot = cx[i] * kk + cs[i]
            if tgt[slot] == -1:
                tgt[slot] = cy[i]
            elif tgt[slot] != cy[i]:
                qa[top] = tgt[slot]
                qb[top] = cy[i]
                top += 1
        for i in range(len(eu)):
            qa[top] = eu[i]
            qb[top] = ev[i]
            top += 1
        while top > 0:
            top -= 1
            ra = _find(parent, qa[top])
            rb = _find(parent, qb[top])
            if ra == rb:
                continue
            if rank[ra] < rank[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            if rank[ra] == rank[rb]:
                rank[ra] += 1
            for s in range(k):
                t = tgt[rb * kk + s]
                if t != -1:
                    u = tgt[ra * kk + s]
                    if u == -1:
                        tgt[ra * kk + s] = t
                    else:
                        qa[top] = u
                        qb[top] = t
                        top += 1
        for i in range(n):
            parent[i] = _find(parent, i)
        return parent


def solve_arrays(n, k, eps_u, eps_v, cl_x, cl_s, cl_y):
    """Run the kernel on raw arrays; returns root id per node (numpy)."""
    arr = lambda a: np.ascontiguousarray(a, dtype=np.int64)
    if njit is None:  # pragma: no cover
        p = _solve_python(n, list(zip(eps_u, eps_v)), list(zip(cl_x, cl_s, cl_y)))
        return np.array([p.find(i) for i in range(n)], dtype=np.int64)
    return _congruence_kernel(int(n), int(k), arr(eps_u), arr(eps_v), arr(cl_x), arr(cl_s), arr(cl_y))


def solve_bidirected_dyck(g: InterleavedGraph, active="union", backend="auto") -> Partition:
    """Partition of g's nodes by bidirected Dyck reachability over the
    active alphabet ("1", "2" or "union"); other labels act as ε."""
    active = _norm_active(active)
    eps, closes = split_edges(g, active)
    if backend == "python" or (backend == "auto" and njit is None):
        return _solve_python(g.n, eps, closes)
    if backend not in ("auto", "numba"):
        raise ValueError(f"unknown backend {backend!r}")
    eu = [e[0] for e in eps]
    ev = [e[1] for e in eps]
    roots = solve_arrays(g.n, symbol_count(g, active), eu, ev,
                         [c[0] for c in closes], [c[1] for c in closes], [c[2] for c in closes])
    return Partition.from_labels(roots.tolist())
