"""Command-line front end: ibdr <command> ...

Exit codes: 0 success, 1 negative answer (query, oracle), 2 usage or input
error, 3 a resource guard fired.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from importlib import resources

from .engine import solve_bidirected_dyck
from .errors import ResourceLimitError
from .graph import (GraphFormatError, load_graph, parse_directed_graph, save_graph,
                    serialize_graph, traversal_edges)
from .oracle import SearchCaps, bounded_reach
from .reductions import (OVInstance, SubsetSumInstance, gen_bidirect, gen_ov,
                         gen_random_bidirected, gen_subset_sum)
from .solver import PipelineOptions, run_pipeline

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- helpers

def _add_mode_args(p):
    p.add_argument("--mode", choices=("d1d1", "dkd1-bounded", "dk"), default="d1d1")
    p.add_argument("--alphabet", choices=("1", "2", "union"), default="union",
                   help="active alphabet for --mode dk")
    p.add_argument("--counter-bound", type=int, default=None,
                   help="counter bound (dkd1-bounded default: n; d1d1 default: 18n^2+6n)")
    p.add_argument("--no-underapprox", action="store_true")
    p.add_argument("--no-selfloop-pass", action="store_true")
    p.add_argument("--no-trim", action="store_true")


def _load(path):
    try:
        return load_graph(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def compute_partition(g, args):
    """Returns (partition, metadata dict) for the mode selected in args."""
    if args.mode == "dk":
        t0 = time.perf_counter()
        part = solve_bidirected_dyck(g, args.alphabet)
        return part, {"mode": "dk", "alphabet": args.alphabet, "exact": "yes",
                      "time_ms": f"{1000 * (time.perf_counter() - t0):.1f}"}
    if args.counter_bound is not None and args.counter_bound < 0:
        raise UsageError("--counter-bound must be non-negative")
    opts = PipelineOptions(mode=args.mode, underapprox=not args.no_underapprox,
                           selfloop=not args.no_selfloop_pass, trim=not args.no_trim,
                           bound=args.counter_bound)
    t0 = time.perf_counter()
    try:
        res = run_pipeline(g, opts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    meta = {"mode": res.mode, "counter_bound": str(res.bound),
            "exact": "yes" if res.exact else "no (witnesses with counter <= bound only)",
            "time_ms": f"{1000 * (time.perf_counter() - t0):.1f}"}
    return res.partition, meta


def _print_classes(part, fmt, out):
    for cls in part.classes():
        if fmt == "tsv":
            out.write("\t".join(["class", str(cls[0])] + [str(x) for x in cls]) + "\n")
        else:
            out.write(" ".join(str(x) for x in cls) + "\n")


def _node(g, s):
    try:
        x = int(s)
    except ValueError:
        raise UsageError(f"node id must be an integer, got {s!r}") from None
    if not 0 <= x < g.n:
        raise UsageError(f"node {x} out of range (n={g.n})")
    return x


# ---------------------------------------------------------------- commands

def cmd_solve(args, out):
    g = _load(args.graph)
    part, meta = compute_partition(g, args)
    if args.format == "tsv":
        for k, v in meta.items():
            out.write(f"meta\t{k}\t{v}\n")
        out.write(f"meta\tclasses\t{part.count}\n")
        _print_classes(part, "tsv", out)
    else:
        out.write(f"n={g.n} m={g.m} classes={part.count}\n")
        for k, v in meta.items():
            out.write(f"{k}: {v}\n")
    return EXIT_OK


def cmd_classes(args, out):
    g = _load(args.graph)
    part, _ = compute_partition(g, args)
    _print_classes(part, args.format, out)
    return EXIT_OK


def cmd_query(args, out):
    g = _load(args.graph)
    u, v = _node(g, args.u), _node(g, args.v)
    part, _ = compute_partition(g, args)
    if part.same(u, v):
        out.write("reachable\n")
        return EXIT_OK
    out.write("not reachable\n")
    return EXIT_NEGATIVE


def cmd_oracle(args, out):
    g = _load(args.graph)
    u, v = _node(g, args.u), _node(g, args.v)
    caps = SearchCaps(args.max_len, args.max_sh1, args.max_sh2)
    t = bounded_reach(g, u, v, caps)
    if t is None:
        out.write("no witness within caps\n")
        return EXIT_NEGATIVE
    out.write(f"witness found ({len(t.steps)} steps)\n")
    if args.show_path:
        for a, b, lab in traversal_edges(g, t):
            out.write(f"{a} {b} {lab.code}\n")
    return EXIT_OK


def _write_instance(g, meta, args, out):
    text = serialize_graph(g)
    if args.output:
        save_graph(g, args.output)
        with open(args.output + ".meta", "w", encoding="utf-8") as fh:
            for k, v in meta.items():
                fh.write(f"{k}={v}\n")
    else:
        out.write(text)
    return EXIT_OK


def _int_list(s, what):
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated integers") from None


def _vectors(s):
    vecs = [tuple(int(c) for c in tok) for tok in s.split(",") if tok]
    if not vecs or any(not set(tok) <= {"0", "1"} for tok in s.split(",") if tok):
        raise UsageError("vectors must be comma-separated 0/1 strings, e.g. 101,011")
    return vecs


def cmd_gen(args, out):
    kind = args.kind
    try:
        if kind == "subset-sum":
            inst = SubsetSumInstance(tuple(_int_list(args.values, "--values")), args.target)
            g, u, v, art = gen_subset_sum(inst)
            meta = {"kind": kind, "source": u, "target": v, **art.metadata()}
        elif kind == "ov":
            X, Y = _vectors(args.x), _vectors(args.y)
            inst = OVInstance(X, Y, len(X[0]))
            g, u, v, art = gen_ov(inst)
            meta = {"kind": kind, "source": u, "target": v, **art.metadata()}
        elif kind == "bidirect":
            try:
                with open(args.input, encoding="utf-8") as fh:
                    dg = parse_directed_graph(fh.read())
            except OSError as exc:
                raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
            g, s, t, art = gen_bidirect(dg, args.source, args.target)
            meta = {"kind": kind, "source": s, "target": t, **art.metadata()}
        else:
            g = gen_random_bidirected(args.nodes, args.edges, args.k1, args.k2, args.seed)
            meta = {"kind": kind, "seed": args.seed}
    except ValueError as exc:
        if isinstance(exc, GraphFormatError):
            raise
        raise UsageError(str(exc)) from None
    return _write_instance(g, meta, args, out)


def cmd_stats(args, out):
    g = _load(args.graph)
    per = {0: 0, 1: 0, 2: 0}
    loops = 0
    for u, v, lab in g.half_edges:
        per[lab.alphabet] += 1
        loops += u == v
    rows = [("n", g.n), ("k1", g.k1), ("k2", g.k2), ("half_edges", g.m),
            ("epsilon_edges", per[0]), ("alphabet1_edges", per[1]),
            ("alphabet2_edges", per[2]), ("self_loops", loops)]
    for k, v in rows:
        out.write(f"{k}\t{v}\n" if args.format == "tsv" else f"{k:<16}{v}\n")
    return EXIT_OK


def bench_rows(paths, args):
    """One (name, n, idccs, dccs, ms) tuple per file, sorted by name."""
    rows = []
    for path in sorted(paths, key=os.path.basename):
        g = _load(path)
        t0 = time.perf_counter()
        mode = "d1d1" if (g.k1, g.k2) == (1, 1) else "dkd1-bounded"
        opts = PipelineOptions(mode=mode, underapprox=not args.no_underapprox,
                               selfloop=not args.no_selfloop_pass, trim=not args.no_trim,
                               bound=args.counter_bound)
        res = run_pipeline(g, opts)
        ms = 1000 * (time.perf_counter() - t0)
        dccs = res.under_approx.count if res.under_approx is not None and res.exact \
            else solve_bidirected_dyck(g, "union").count
        rows.append((os.path.basename(path), g.n, res.partition.count, dccs, ms))
    return rows


def default_bench_dir():
    return str(resources.files("ibdr") / "data" / "bench")


def cmd_bench(args, out):
    d = args.directory or default_bench_dir()
    if not os.path.isdir(d):
        raise UsageError(f"not a directory: {d}")
    paths = [os.path.join(d, f) for f in os.listdir(d) if f.endswith(".ibdg")]
    rows = bench_rows(paths, args)
    if args.format == "tsv":
        for name, n, idc, dcc, ms in rows:
            out.write(f"row\t{name}\t{n}\t{idc}\t{dcc}\t{ms:.1f}\n")
    else:
        out.write(f"{'Benchmark':<24}{'n':>8}{'ID-CCs':>10}{'D-CCs':>10}{'Time(ms)':>12}\n")
        for name, n, idc, dcc, ms in rows:
            out.write(f"{name:<24}{n:>8}{idc:>10}{dcc:>10}{ms:>12.1f}\n")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser():
    ap = argparse.ArgumentParser(prog="ibdr", description="Interleaved bidirected Dyck reachability")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_format(p):
        p.add_argument("--format", choices=("text", "tsv"), default="text")
        return p

    p = with_format(sub.add_parser("solve", help="solve and summarize"))
    p.add_argument("graph")
    _add_mode_args(p)
    p.set_defaults(func=cmd_solve)

    p = with_format(sub.add_parser("classes", help="print equivalence classes"))
    p.add_argument("graph")
    _add_mode_args(p)
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("query", help="are u and v related")
    p.add_argument("graph")
    p.add_argument("u")
    p.add_argument("v")
    _add_mode_args(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("oracle", help="brute-force bounded witness search")
    p.add_argument("graph")
    p.add_argument("u")
    p.add_argument("v")
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--max-sh1", type=int, default=None)
    p.add_argument("--max-sh2", type=int, default=None)
    p.add_argument("--show-path", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate instances")
    gsub = p.add_subparsers(dest="kind", required=True)
    q = gsub.add_parser("subset-sum")
    q.add_argument("--values", required=True, help="comma-separated positive integers")
    q.add_argument("--target", type=int, required=True)
    q = gsub.add_parser("ov")
    q.add_argument("--x", required=True, help="comma-separated 0/1 vectors, e.g. 101,011")
    q.add_argument("--y", required=True)
    q = gsub.add_parser("bidirect")
    q.add_argument("input", help="directed graph in ibdg format")
    q.add_argument("--source", type=int, required=True)
    q.add_argument("--target", type=int, required=True)
    q = gsub.add_parser("random")
    q.add_argument("--nodes", type=int, required=True)
    q.add_argument("--edges", type=int, required=True)
    q.add_argument("--k1", type=int, default=1)
    q.add_argument("--k2", type=int, default=1)
    q.add_argument("--seed", type=int, default=0)
    for q in gsub.choices.values():
        q.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gen)

    p = with_format(sub.add_parser("stats", help="graph statistics"))
    p.add_argument("graph")
    p.set_defaults(func=cmd_stats)

    p = with_format(sub.add_parser("bench", help="run the solver over a directory of graphs"))
    p.add_argument("directory", nargs="?", default=None,
                   help="directory of .ibdg files (default: packaged corpus)")
    p.add_argument("--counter-bound", type=int, default=None)
    p.add_argument("--no-underapprox", action="store_true")
    p.add_argument("--no-selfloop-pass", action="store_true")
    p.add_argument("--no-trim", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None, out=None):
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"ibdr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GraphFormatError as exc:
        print(f"ibdr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"ibdr: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
