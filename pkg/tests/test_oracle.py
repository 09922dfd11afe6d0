import random

import pytest

from ibdr.errors import ResourceLimitError
from ibdr.graph import (EPSILON, DirectedGraph, InterleavedGraph, Partition, Traversal, closing,
                        is_irreducible, mirror_closure, opening, path_metrics, traversal_edges,
                        traversal_end)
from ibdr.oracle import (Configuration, SearchCaps, algorithm2_length_bound, all_pairs_bounded,
                         bounded_reach, closure_partition, counter_product_partition,
                         directed_bounded_reach, empty_stack_nodes, explore, exploration_confs,
                         naive_dyck_closure, state_limit)
from ibdr.reductions import gen_random_bidirected

from samples import SQUARE_NAMES, DIAMOND_NAMES, square, diamond

U, V = SQUARE_NAMES["u"], SQUARE_NAMES["v"]


def caps_ok(g, t, caps):
    labs = [e[2] for e in traversal_edges(g, t)]
    for i in range(len(labs) + 1):
        m = path_metrics(g, Traversal(t.start, t.steps[:i]))
        if caps.max_sh1 is not None and m.cnt[0] > caps.max_sh1:
            return False
        if caps.max_sh2 is not None and m.cnt[1] > caps.max_sh2:
            return False
    return caps.max_len is None or len(labs) <= caps.max_len


# ------------------------------------------------------------ bounded_reach

def test_square_witness():
    g = square()
    caps = SearchCaps(20, 6, 6)
    t = bounded_reach(g, U, V, caps)
    assert t is not None and traversal_end(g, t) == V
    m = path_metrics(g, t)
    assert m.valid and m.cnt == (0, 0)
    assert caps_ok(g, t, caps) and is_irreducible(g, t)


def test_same_endpoints_give_empty_traversal():
    assert bounded_reach(square(), 2, 2, SearchCaps(5, 1, 1)) == Traversal(2)


def test_square_counter2_cap_one_frozen():
    # exhaustive search finds a witness that never stacks two beta symbols;
    # this walk is frozen here as the reference
    g = square()
    caps = SearchCaps(None, 6, 1)
    t = bounded_reach(g, U, V, caps)
    assert t is not None
    m = path_metrics(g, t)
    assert m.valid and m.cnt == (0, 0) and m.max_sh == (2, 1)
    assert len(t) == 8
    assert bounded_reach(g, U, V, SearchCaps(None, 6, 0)) is None


def test_unreachable_pair():
    g = InterleavedGraph(2, 1, 1, [(0, 1, opening(1, 1))])
    assert bounded_reach(g, 0, 1, SearchCaps(10, 3, 3)) is None


def test_length_cap_is_respected():
    g = InterleavedGraph(4, 1, 1, [(0, 1, EPSILON), (1, 2, EPSILON), (2, 3, EPSILON)])
    assert bounded_reach(g, 0, 3, SearchCaps(2, 0, 0)) is None
    assert len(bounded_reach(g, 0, 3, SearchCaps(3, 0, 0))) == 3


@pytest.mark.parametrize("seed", range(20))
def test_witness_symmetry_and_validity(seed):
    rng = random.Random(seed)
    g = gen_random_bidirected(5, 7, k1=2, k2=1, seed=seed)
    caps = SearchCaps(12, 2, 2)
    for _ in range(4):
        u, v = rng.randrange(g.n), rng.randrange(g.n)
        a, b = bounded_reach(g, u, v, caps), bounded_reach(g, v, u, caps)
        assert (a is None) == (b is None)
        if a is not None:
            m = path_metrics(g, a)
            assert m.valid and m.stack == ((), ()) and caps_ok(g, a, caps)


@pytest.mark.parametrize("seed", range(15))
def test_cap_monotonicity(seed):
    g = gen_random_bidirected(5, 8, k1=1, k2=1, seed=seed)
    small = all_pairs_bounded(g, SearchCaps(None, 1, 1))
    large = all_pairs_bounded(g, SearchCaps(None, 3, 3))
    assert small.refines(large)


@pytest.mark.parametrize("seed", range(15))
def test_kernel_and_python_backends_agree(seed):
    g = gen_random_bidirected(6, 9, k1=2, k2=1, seed=seed)
    caps = SearchCaps(None, 3, 3)
    assert all_pairs_bounded(g, caps, backend="python") == all_pairs_bounded(g, caps, backend="numba")
    for v in range(g.n):
        a = bounded_reach(g, 0, v, caps, backend="python")
        b = bounded_reach(g, 0, v, caps, backend="numba")
        assert (a is None) == (b is None)
        if a is not None:
            assert len(a) == len(b)


def test_explore_reports_configurations():
    g = InterleavedGraph(2, 1, 1, [(0, 1, opening(2, 1))])
    edges = mirror_closure(g)
    exp = explore(2, 1, 1, edges, Configuration(0, 0, 0), SearchCaps(None, 1, 1))
    assert sorted((c.node, c.stack1, c.stack2) for c in exploration_confs(exp)) == [(0, 0, 0), (1, 0, 1)]
    assert empty_stack_nodes(exp) == [0]


def test_uncapped_search_uses_python_path():
    g = InterleavedGraph(2, 1, 1, [(0, 1, EPSILON)])
    assert bounded_reach(g, 0, 1, SearchCaps()) is not None
    with pytest.raises(ValueError):
        explore(2, 1, 1, mirror_closure(g), Configuration(0, 0, 0), SearchCaps(), backend="numba")


# ----------------------------------------------------------- resource guard

@pytest.mark.parametrize("backend", ["python", "numba"])
def test_state_limit_raises(backend):
    # node 1 sits behind a push, so the search runs until the guard fires
    g = InterleavedGraph(2, 1, 1, [(0, 0, opening(1, 1)), (0, 1, opening(1, 1))])
    with pytest.raises(ResourceLimitError):
        bounded_reach(g, 0, 1, SearchCaps(None, 50, 0), limit=10, backend=backend)
    with pytest.raises(ResourceLimitError):
        all_pairs_bounded(g, SearchCaps(None, 50, 0), limit=10, backend=backend)


def test_state_limit_env(monkeypatch):
    monkeypatch.setenv("IBDR_STATE_LIMIT", "5")
    assert state_limit() == 5
    g = InterleavedGraph(1, 1, 1, [(0, 0, opening(1, 1))])
    with pytest.raises(ResourceLimitError):
        all_pairs_bounded(g, SearchCaps(None, 50, 0))
    monkeypatch.setenv("IBDR_STATE_LIMIT", "many")
    with pytest.raises(ValueError):
        state_limit()


def test_caps_reject_negative():
    with pytest.raises(ValueError):
        SearchCaps(-1, 0, 0)


# --------------------------------------------------------- all_pairs_bounded

def test_all_pairs_edgeless():
    assert all_pairs_bounded(InterleavedGraph(3, 1, 1), SearchCaps(4, 4, 4)).count == 3


def test_all_pairs_square():
    p = all_pairs_bounded(square(), SearchCaps(None, 6, 6))
    assert p.same(U, V)


# ----------------------------------------------------------------- directed

def test_directed_reach_respects_direction():
    dg = DirectedGraph(2, 1, 1, [(0, 1, EPSILON)])
    assert directed_bounded_reach(dg, 0, 1, SearchCaps(5, 2, 2)) == [0]
    assert directed_bounded_reach(dg, 1, 0, SearchCaps(5, 2, 2)) is None


def test_directed_reach_needs_balance():
    dg = DirectedGraph(3, 1, 1, [(0, 1, opening(1, 1)), (1, 2, closing(1, 1)), (0, 2, opening(2, 1))])
    assert directed_bounded_reach(dg, 0, 2, SearchCaps(5, 2, 2)) == [0, 1]


# --------------------------------------------------------------- saturation

def test_naive_matched_pair():
    rel = naive_dyck_closure([(0, 1, opening(1, 1)), (1, 2, closing(1, 1))])
    assert (0, 2) in rel


def test_naive_unmatched_close():
    rel = naive_dyck_closure([(0, 1, closing(1, 1))])
    assert rel == {(0, 0), (1, 1)}


def test_naive_diamond():
    g = diamond()
    p = closure_partition(g.n, naive_dyck_closure(mirror_closure(g), 2, g.n))
    u, x, v, y = (DIAMOND_NAMES[c] for c in "uxvy")
    assert p == Partition.from_classes(4, [[u, v], [x], [y]])


def test_naive_rejects_large_symbol():
    with pytest.raises(ValueError):
        naive_dyck_closure([(0, 1, opening(1, 3))], k=2)


@pytest.mark.parametrize("seed", range(15))
def test_counter_product_matches_bfs(seed):
    g = gen_random_bidirected(5, 8, k1=2, k2=1, seed=seed)
    # stack 1 uncapped in the product; BFS with a generous stack-1 cap
    assert counter_product_partition(g, 2) == all_pairs_bounded(g, SearchCaps(None, 10, 2))


def test_counter_product_needs_counter():
    with pytest.raises(ValueError):
        counter_product_partition(InterleavedGraph(1, 1, 2), 1)


# ------------------------------------------------------------- length bound

def test_algorithm2_length_bound():
    assert algorithm2_length_bound(1, 1, 5) == 1
    assert algorithm2_length_bound(2, 2, 1) == 64
    assert algorithm2_length_bound(10, 2, 200) == 1000 * 2 ** 600
    with pytest.raises(ValueError):
        algorithm2_length_bound(-1, 1, 1)
