"""Acceptance criteria 1-10.  Each test prints a single PASS/FAIL line."""
import io
import itertools
import os
import random
import time

from ibdr.cli import default_bench_dir, main
from ibdr.engine import solve_bidirected_dyck
from ibdr.errors import ResourceLimitError
from ibdr.graph import (EPSILON, DirectedGraph, closing, mirror_closure, opening, path_metrics,
                        traversal_end)
from ibdr.oracle import (Configuration, SearchCaps, all_pairs_bounded, bounded_reach,
                         closure_partition, counter_product_partition, directed_bounded_reach,
                         explore, exploration_confs, naive_dyck_closure)
from ibdr.reductions import (OVInstance, SubsetSumInstance, brute_ov, brute_subset_sum,
                             gen_bidirect, gen_ov, gen_power_gadget, gen_random_bidirected,
                             gen_subset_sum, lift_witness)
from ibdr.solver import (PipelineOptions, default_counter_bound,
                         preprocess_under_approx, run_pipeline, solve_d1d1, solve_dkd1_bounded)


def report(num, ok, detail=""):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return ok


def seeded_graph(seed, n_max, m_max, k1, k2):
    rng = random.Random(seed)
    n = rng.randint(1, n_max)
    return gen_random_bidirected(n, rng.randint(0, m_max), k1=k1, k2=k2, seed=seed)


# ------------------------------------------------------------------------ 1

def test_acceptance_1_engine_matches_naive_closure():
    bad = []
    for seed in range(500):
        rng = random.Random(1000 + seed)
        n, m, k = rng.randint(1, 8), rng.randint(0, 12), rng.randint(1, 3)
        g = gen_random_bidirected(n, m, k1=k, k2=0, seed=seed)
        expect = closure_partition(n, naive_dyck_closure(mirror_closure(g), k, n))
        if solve_bidirected_dyck(g, "1") != expect:
            bad.append(seed)
    assert report(1, not bad, f"500 graphs, {len(bad)} mismatches"), bad


# ------------------------------------------------------------------------ 2

def test_acceptance_2_d1d1_matches_bounded_oracle():
    bad = []
    for seed in range(500):
        g = seeded_graph(2000 + seed, 7, 14, 1, 1)
        c = default_counter_bound(g.n)
        if solve_d1d1(g, c) != all_pairs_bounded(g, SearchCaps(None, c, c)):
            bad.append(seed)
    assert report(2, not bad, f"500 graphs, {len(bad)} mismatches"), bad


# ------------------------------------------------------------------------ 3

def test_acceptance_3_dkd1_matches_bounded_oracle():
    bad, fallback = [], 0
    for seed in range(300):
        rng = random.Random(3000 + seed)
        g = seeded_graph(3000 + seed, 6, 12, rng.randint(1, 2), 1)
        n = g.n
        got = solve_dkd1_bounded(g, n)
        try:
            ref = all_pairs_bounded(g, SearchCaps(None, n * n, n), limit=200_000)
        except ResourceLimitError:
            # configuration space too large: the product with an unbounded
            # stack 1 and counter capped at n is the same relation
            fallback += 1
            ref = counter_product_partition(g, n)
        if got != ref:
            bad.append(seed)
    assert report(3, not bad, f"300 graphs, {len(bad)} mismatches, "
                              f"{fallback} checked via counter product"), bad


# ------------------------------------------------------------------------ 4

def test_acceptance_4_power_gadget_law():
    bad = []
    for level in range(4):
        for sign in "+-":
            frag = gen_power_gadget(level, sign)
            g = frag.graph
            top = 2 ** level
            caps = SearchCaps(None, 2 * level + 2, 3 * top + 2)
            start = 0 if sign == "+" else caps.max_sh2
            exp = explore(g.n, g.k1, g.k2, mirror_closure(g),
                          Configuration(frag.entry, (), start), caps)
            deltas = {c.stack2 - start for c in exploration_confs(exp)
                      if c.node == frag.exit and c.stack1 == ()}
            want = {top if sign == "+" else -top}
            if deltas != want:
                bad.append((level, sign, sorted(deltas)))
    assert report(4, not bad, f"levels 0-3, {len(bad)} counterexamples"), bad


# ------------------------------------------------------------------------ 5

def test_acceptance_5_subset_sum_reduction():
    bad, total = [], 0
    for size in range(1, 4):
        for X in itertools.combinations_with_replacement(range(1, 5), size):
            for S in range(max(X), 7):
                inst = SubsetSumInstance(X, S)
                g, u1, v, _ = gen_subset_sum(inst)
                caps = SearchCaps(None, size + (2 * S).bit_length() + 2, 2 * S)
                total += 1
                if (bounded_reach(g, u1, v, caps) is not None) != brute_subset_sum(inst):
                    bad.append((X, S))
    assert report(5, not bad, f"{total} instances, {len(bad)} disagreements"), bad[:10]


# ------------------------------------------------------------------------ 6

def test_acceptance_6_ov_reduction():
    bad, total = [], 0
    for D in range(1, 4):
        vecs = list(itertools.product((0, 1), repeat=D))
        for n in (1, 2):
            for X in itertools.product(vecs, repeat=n):
                for Y in itertools.product(vecs, repeat=n):
                    inst = OVInstance(X, Y, D)
                    g, u, v, _ = gen_ov(inst)
                    total += 1
                    got = bounded_reach(g, u, v, SearchCaps(None, 2 * D + 3, 2 ** (D + 3)))
                    if (got is not None) != brute_ov(inst):
                        bad.append((X, Y))
    assert report(6, not bad, f"{total} instances, {len(bad)} disagreements"), bad[:10]


# ------------------------------------------------------------------------ 7

LABELS = [EPSILON, opening(1, 1), closing(1, 1), opening(2, 1), closing(2, 1)]


def test_acceptance_7_bidirect_reduction():
    bad, lift_bad, total, lifted = [], [], 0, 0
    for n in (1, 2, 3):
        pairs = [(a, b) for a in range(n) for b in range(n)]
        for m in range(4):
            for es in itertools.combinations(pairs, m):
                for labs in itertools.product(LABELS, repeat=m):
                    dg = DirectedGraph(n, 1, 1, [(a, b, l) for (a, b), l in zip(es, labs)])
                    for u, v in itertools.permutations(range(n), 2):
                        total += 1
                        p = directed_bounded_reach(dg, u, v, SearchCaps(20, 4, 4))
                        g, s, t, art = gen_bidirect(dg, u, v)
                        r = bounded_reach(g, s, t, SearchCaps(60, m + 1, 6))
                        if (p is not None) != (r is not None):
                            bad.append((dg.edges, u, v))
                        if p is not None:
                            lifted += 1
                            tr = lift_witness(p, g, art)
                            pm = path_metrics(g, tr)
                            if not (pm.valid and pm.cnt == (0, 0) and traversal_end(g, tr) == t):
                                lift_bad.append((dg.edges, p))
    ok = not bad and not lift_bad
    assert report(7, ok, f"{total} queries, {len(bad)} disagreements, "
                         f"{lifted} lifts with {len(lift_bad)} invalid"), (bad[:5], lift_bad[:5])


# ------------------------------------------------------------------------ 8

def test_acceptance_8_preprocessing_soundness():
    bad = []
    for seed in range(200):
        for mode, k1, bare in (("d1d1", 1, solve_d1d1), ("dkd1-bounded", 2, solve_dkd1_bounded)):
            g = seeded_graph(8000 + seed, 6, 12, k1, 1)
            res = run_pipeline(g, PipelineOptions(mode=mode))
            if res.partition != bare(g):
                bad.append((seed, mode, "partition"))
            elif res.under_approx is not None and not res.under_approx.refines(res.partition):
                bad.append((seed, mode, "refinement"))
            under, _, _ = preprocess_under_approx(g, "union" if mode == "d1d1" else "counter-free")
            if not under.refines(res.partition):
                bad.append((seed, mode, "under-approx"))
    assert report(8, not bad, f"200 graphs x 2 modes, {len(bad)} failures"), bad


# ------------------------------------------------------------------------ 9

def _timed(fn, *args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def test_acceptance_9_performance():
    solve_d1d1(gen_random_bidirected(5, 6, seed=0))  # warm the kernels
    solve_dkd1_bounded(gen_random_bidirected(5, 6, k1=2, seed=0))
    d1 = {n: _timed(solve_d1d1, gen_random_bidirected(n, n, seed=n)) for n in (20, 40, 60)}
    dk = {n: _timed(solve_dkd1_bounded, gen_random_bidirected(n, 2 * n, k1=2, seed=n))
          for n in (250, 500, 1000)}
    floor = 0.05  # ratios of sub-50ms timings are noise
    r1 = [max(d1[b], floor) / max(d1[a], floor) for a, b in ((20, 40), (40, 60))]
    r2 = [max(dk[b], floor) / max(dk[a], floor) for a, b in ((250, 500), (500, 1000))]
    ok = d1[60] < 30 and dk[1000] < 10 and max(r1) <= 10 and max(r2) <= 5
    detail = (f"d1d1 n=60 {d1[60]:.2f}s, dkd1 n=1000 {dk[1000]:.2f}s, "
              f"growth {max(r1):.1f}x / {max(r2):.1f}x")
    assert report(9, ok, detail), (d1, dk)


# ----------------------------------------------------------------------- 10

def test_acceptance_10_bench_table():
    text, tsv = io.StringIO(), io.StringIO()
    assert main(["bench"], text) == 0 and main(["bench", "--format", "tsv"], tsv) == 0
    header = text.getvalue().splitlines()[0].split()
    files = [f for f in os.listdir(default_bench_dir()) if f.endswith(".ibdg")]
    rows = [line.split("\t") for line in tsv.getvalue().splitlines()]
    ok = header == ["Benchmark", "n", "ID-CCs", "D-CCs", "Time(ms)"] and len(rows) == len(files)
    bad = [r for r in rows if not (int(r[3]) <= int(r[4]) <= int(r[2]))]
    assert report(10, ok and not bad, f"{len(rows)} files, {len(bad)} violating rows"), bad
