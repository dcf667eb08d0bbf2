"""kstlab command line: gen | tile | oracle | verify | claims | bench.

Every command prints one JSON report (sorted keys) on stdout.  Timing is
left out unless ``--timing`` is given so reports stay byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from .bigraph import GraphError, read_graph_full, write_graph
from .copies import Tiling, read_tiling, verify_tiling, write_tiling
from .errors import KstError
from .partition import (
    PartitionLabels,
    TilingParameters,
    derive_partition,
    diagonal_density_check,
    edge_minimalize,
    exceptional_degree_check,
    parse_rational,
    validate_bounds,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, KstError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _count(text: str) -> int:
    value = _rational(text)
    if value.denominator != 1 or value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return int(value)


def _digest(*paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()[:16]


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, default=str) + "\n")


def _params(args, n: int, meta: dict) -> TilingParameters:
    s, t = args.s, args.t
    if n % (s + t) or (n // (s + t)) % 2 == 0:
        raise UsageError(f"side size {n} is not (2k+1)(s+t) for s={s}, t={t}")
    k = (n // (s + t) - 1) // 2
    alpha = args.alpha
    if alpha is None and meta.get("params", {}).get("alpha"):
        alpha = parse_rational(meta["params"]["alpha"])
    if alpha is None:
        return TilingParameters(s, t, k)
    return TilingParameters.with_alpha(s, t, k, alpha)


def _labels(G, named: dict, params: TilingParameters | None) -> PartitionLabels | None:
    if all(k in named for k in ("U0", "U1", "U2", "V0", "V1", "V2")):
        return PartitionLabels.from_labels(named).with_tilde(G, params.s if params else 1)
    if "U1p" in named and "V2p" in named and params is not None:
        return derive_partition(G, named["U1p"], named["V2p"], params)
    return None


def _load_labels(path):
    if path is None:
        return {}
    _, named, _ = read_graph_full(path)
    return named


# -- commands ------------------------------------------------------------------


def cmd_gen(args) -> int:
    from . import gen

    seed = args.seed
    meta_labels = None
    if args.kind == "counterexample":
        inst = gen.gen_counterexample(_need(args, "s"), _need(args, "t"), _need(args, "k"))
        G, meta_labels, meta = inst.graph, inst.labels, inst.meta
    elif args.kind == "extremal":
        inst = gen.gen_extremal_instance(_need(args, "s"), _need(args, "t"), _need(args, "k"), seed,
                                         args.profile)
        G, meta_labels, meta = inst.graph, inst.labels, inst.meta
    elif args.kind == "pmp":
        G = gen.gen_pmp(_need(args, "m"), _need(args, "p"))
        meta = {"generator": "pmp", "params": {"m": args.m, "p": args.p}, "seed": None}
    elif args.kind == "complete":
        G = gen.gen_complete(_need(args, "nu"), _need(args, "nv"))
        meta = {"generator": "complete", "params": {"nu": args.nu, "nv": args.nv}, "seed": None}
    else:  # gadget
        G, meta_labels, tiling = gen.gen_swap_gadget(args.gadget)
        meta = {"generator": "gadget", "params": {"kind": args.gadget, "s": 2, "t": 5}, "seed": None,
                "tiling": tiling.to_dict()}
    labels = meta_labels.to_labels() if meta_labels is not None else None
    report = {"command": "gen", "kind": args.kind, "outcome": "ok", "nu": G.nu, "nv": G.nv,
              "edges": G.edge_count, "meta": meta}
    if args.output:
        write_graph(G, args.output, labels, meta)
        report["artifacts"] = [str(args.output)]
    else:
        from .bigraph import graph_to_dict
        report["graph"] = graph_to_dict(G, labels, meta)
    _emit(report)
    return EXIT_OK


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required for --kind {args.kind}")
    return value


def cmd_tile(args) -> int:
    from .tiler import plan_split, tile_extremal

    G, named, meta = read_graph_full(args.graph)
    named.update(_load_labels(args.labels))
    params = _params(args, G.nu, meta)
    report = {"command": "tile", "inputs": _digest(args.graph), "params": params.to_dict()}
    labels = _labels(G, named, params)
    if labels is None:
        report.update(outcome="failure", error="labels missing: need U0..V2 or U1p/V2p")
        _emit(report)
        return EXIT_FAIL
    try:
        plan = plan_split(G, labels, params)
        tiling = tile_extremal(G, labels, params)
    except KstError as exc:
        report.update(outcome="failure", error=str(exc), kind=type(exc).__name__,
                      details={k: str(v) for k, v in exc.details.items()})
        _emit(report)
        return EXIT_FAIL
    report.update(outcome="ok", case=plan.case, copies=len(tiling),
                  orientation=list(tiling.orientation_counts()), meta=tiling.meta)
    if args.output:
        write_tiling(tiling, args.output)
        report["artifacts"] = [str(args.output)]
    else:
        report["tiling"] = tiling.to_dict()
    _emit(report)
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import BUDGET, TILED, exact_tile

    G, _, _ = read_graph_full(args.graph)
    res = exact_tile(G, args.s, args.t, node_budget=args.budget_nodes, ms_budget=args.budget_ms)
    report = {"command": "oracle", "inputs": _digest(args.graph), "outcome": res.status}
    report.update(res.to_dict(timing=args.timing))
    if res.tiling is not None and args.output:
        write_tiling(res.tiling, args.output)
        report["artifacts"] = [str(args.output)]
    _emit(report)
    if res.status == TILED:
        return EXIT_OK
    return EXIT_BUDGET if res.status == BUDGET else EXIT_FAIL


def cmd_verify(args) -> int:
    G, _, _ = read_graph_full(args.graph)
    tiling = read_tiling(args.tiling)
    if args.s is not None and args.t is not None and (tiling.s, tiling.t) != (args.s, args.t):
        tiling = Tiling(args.s, args.t, tiling.copies)
    res = verify_tiling(G, tiling, perfect=args.perfect)
    report = {"command": "verify", "inputs": _digest(args.graph, args.tiling),
              "outcome": "ok" if res.ok else "violations"}
    report.update(res.to_dict())
    _emit(report)
    return EXIT_OK if res.ok else EXIT_FAIL


CLAIMS = ("2.1", "2.2", "2.3", "eq2-3", "3.2", "3.3", "3.5")


def _crossing_copies(G, labels, s, t):
    from .oracle import enumerate_kst

    side1 = (labels.u1.mask, labels.v1.mask)
    side2 = (labels.u2.mask, labels.v2.mask)
    return enumerate_kst(G, s, t, touch=[side1, side2])


def _claims_report(which: str, G, labels, params, args):
    from collections import Counter

    from .oracle import (
        UNCLASSIFIED,
        check_crossing_facts,
        classify_crossing,
        construction_facts,
        touching_sets,
    )
    from .partition import Report

    s, t = params.s, params.t
    if which == "2.1":
        if labels.u1_prime is None:
            raise UsageError("--which 2.1 needs the primed halves U1p and V2p in the labels")
        G_min = edge_minimalize(G, params.n + 3 * s - 2)
        rep = diagonal_density_check(G_min, labels, params.alpha)
        rep.warnings.append(f"edge-minimal graph keeps {G_min.edge_count} of {G.edge_count} edges")
        return rep
    if which == "2.2":
        return validate_bounds(G, labels, params)
    if which == "2.3":
        rep = Report("tilde and hat sets")
        for side in ("U", "V"):
            for i in (1, 2):
                tilde, hat = labels.tilde(side, i), labels.hat(side, i)
                rep.add(f"{side}{i} = tilde + hat", (tilde | hat) == labels.main(side, i),
                        {"tilde": len(tilde), "hat": len(hat)})
        return rep
    if which == "eq2-3":
        return exceptional_degree_check(G, labels, params)
    if which in ("3.2", "3.3"):
        rep = Report(f"crossing copies ({which})")
        problems = construction_facts(G, labels, s)
        # outside the construction's regime these checks do not apply
        rep.add("structural facts (cross-degree <= s-1, no cross K_{2,2})", None if problems else True,
                len(problems), 0, "; ".join(problems[:3]))
        if problems:
            rep.warnings.append("structural facts fail; crossing-copy clauses not applicable")
            return rep
        kinds: Counter = Counter()
        failed: Counter = Counter()
        total = 0
        for K in _crossing_copies(G, labels, s, t):
            total += 1
            if which == "3.3":
                c = classify_crossing(K, labels, s, t)
                kinds[f"{c.kind} p={c.p} from {c.source}" if c.p is not None else c.kind] += 1
                if c.kind == UNCLASSIFIED:
                    failed["unclassified"] += 1
            else:
                for chk in check_crossing_facts(G, K, labels, s, t, facts_checked=True).failed():
                    failed[chk.name.split(" ")[0]] += 1
        rep.add("crossing copies enumerated", None, total)
        if which == "3.3":
            rep.add("every crossing copy is Type 1 or Type 2", failed["unclassified"] == 0,
                    dict(sorted(kinds.items())), 0)
        else:
            for clause in ("(i)", "(ii)", "(iii)", "(iv)"):
                rep.add(f"clause {clause} holds for every crossing copy", failed[clause] == 0, failed[clause], 0)
        return rep
    # 3.5
    if args.tiling is None:
        raise UsageError("--which 3.5 needs --tiling")
    tiling = read_tiling(args.tiling)
    rep = Report("touching-set dichotomy")
    for ts in touching_sets(tiling, labels, params.k):
        sizes = (len(labels.main("U", ts.index)), len(labels.main("V", ts.index)))
        # the dichotomy presumes |U_i|, |V_i| > k(s+t)+s
        applies = min(sizes) > params.block + s
        rep.add(f"i={ts.index}: max >= k(s+t)+2t or min >= (k+1)(s+t)", ts.holds if applies else None,
                {"U*": len(ts.u_star), "V*": len(ts.v_star)},
                {"max": params.block + 2 * t, "min": params.block + s + t},
                "" if applies else f"|U{ts.index}|,|V{ts.index}|={sizes} not above k(s+t)+s")
    return rep


def cmd_claims(args) -> int:
    G, named, meta = read_graph_full(args.graph)
    named.update(_load_labels(args.labels))
    params = _params(args, G.nu, meta)
    labels = _labels(G, named, params)
    if labels is None:
        raise UsageError("labels missing: need U0..V2 or U1p/V2p")
    rep = _claims_report(args.which, G, labels, params, args)
    report = {"command": "claims", "which": args.which, "inputs": _digest(args.graph),
              "params": params.to_dict(), "outcome": "pass" if rep.ok else "fail"}
    report.update(rep.to_dict())
    _emit(report)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_bench(args) -> int:
    from .gen import PROFILES, gen_extremal_instance
    from .tiler import tile_extremal

    runs = []
    status = EXIT_OK
    for k in args.k:
        for profile in args.profiles or PROFILES:
            start = time.monotonic()
            entry = {"s": args.s, "t": args.t, "k": k, "profile": profile, "seed": args.seed}
            try:
                inst = gen_extremal_instance(args.s, args.t, k, args.seed, profile)
                tiling = tile_extremal(inst.graph, inst.labels, inst.params)
                entry.update(outcome="ok", case=tiling.meta["case"], copies=len(tiling),
                             fallback=tiling.meta["fallback"])
            except KstError as exc:
                entry.update(outcome="failure", error=str(exc))
                status = EXIT_FAIL
            if args.timing:
                entry["ms"] = int((time.monotonic() - start) * 1000)
            runs.append(entry)
    _emit({"command": "bench", "outcome": "ok" if status == EXIT_OK else "failure", "runs": runs})
    return status


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--jobs", type=_count, default=1, help="worker cap (computation is single-threaded)")
    shared.add_argument("--timing", action="store_true", help="include wall-clock timings in reports")
    p = argparse.ArgumentParser(prog="kstlab", description="K_{s,t}-tiling experiments on bipartite graphs")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[shared])

    g = add("gen", help="generate an instance")
    g.add_argument("--kind", required=True, choices=["counterexample", "extremal", "pmp", "complete", "gadget"])
    for name in ("s", "t", "k", "m", "p", "nu", "nv"):
        g.add_argument(f"--{name}", type=_count)
    g.add_argument("--profile", default="case1.1", choices=["case1.1", "case1.2", "case2.1", "case2.2"])
    g.add_argument("--gadget", default="a", choices=["a", "b"])
    g.add_argument("--seed", type=_count, default=0)
    g.add_argument("-o", "--output")

    def common(sp, need_st=True):
        sp.add_argument("--s", type=_count, required=need_st)
        sp.add_argument("--t", type=_count, required=need_st)

    tl = add("tile", help="tile an extremal instance constructively")
    tl.add_argument("graph")
    tl.add_argument("--labels", help="graph file whose labels override those in GRAPH")
    common(tl)
    tl.add_argument("--alpha", type=_rational)
    tl.add_argument("-o", "--output")

    o = add("oracle", help="decide tileability exactly")
    o.add_argument("graph")
    common(o)
    o.add_argument("--budget-nodes", type=_count)
    o.add_argument("--budget-ms", type=_count)
    o.add_argument("-o", "--output")

    v = add("verify", help="check a tiling against a graph")
    v.add_argument("graph")
    v.add_argument("tiling")
    common(v, need_st=False)
    v.add_argument("--perfect", action="store_true")

    c = add("claims", help="run a validator suite")
    c.add_argument("graph")
    c.add_argument("--labels")
    common(c)
    c.add_argument("--alpha", type=_rational)
    c.add_argument("--which", required=True, choices=CLAIMS)
    c.add_argument("--tiling")

    b = add("bench", help="generate and tile extremal instances")
    common(b)
    b.add_argument("--k", type=_count, nargs="+", default=[4])
    b.add_argument("--profiles", nargs="+", choices=["case1.1", "case1.2", "case2.1", "case2.2"])
    b.add_argument("--seed", type=_count, default=0)
    return p


COMMANDS = {"gen": cmd_gen, "tile": cmd_tile, "oracle": cmd_oracle, "verify": cmd_verify,
            "claims": cmd_claims, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    env_seed = os.environ.get("KST_SEED")
    if env_seed is not None and hasattr(args, "seed"):
        try:
            args.seed = _count(env_seed)
        except argparse.ArgumentTypeError as exc:
            parser.error(f"KST_SEED: {exc}")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _emit({"command": args.command, "outcome": "usage error", "error": str(exc)})
        return EXIT_USAGE
    except (GraphError, OSError) as exc:
        _emit({"command": args.command, "outcome": "input error", "error": str(exc)})
        return EXIT_USAGE if args.command == "gen" else EXIT_FAIL
    except KstError as exc:
        _emit({"command": args.command, "outcome": "failure", "error": str(exc),
               "kind": type(exc).__name__})
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
