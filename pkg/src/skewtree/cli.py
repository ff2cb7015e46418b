"""Command-line interface for the pipeline and the oracle lab.

One binary, nine subcommands, reproducible seeds, JSON output.  Exit
codes: 0 success/confirmed, 1 legitimate negative result or ledgered
precondition failure, 2 usage or parse error.  All rationals are p/q
strings; SKEWTREE_SEED supplies the default seed; --config points to a
JSON file whose keys mirror the long flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from skewtree.clusters import SkewLksGraph, synthesize_lks, validate_lks
from skewtree.configs import (ConfigWitness, NoConfigurationError, TreeStats,
                              find_configuration, verify_witness)
from skewtree.embedding import master_embed
from skewtree.graphs import RootedTree, validate_embedding
from skewtree.oracle import (BudgetExceededError, brute_force_embed,
                             conjecture_scan, bistar_check, gen_extremal,
                             gen_tight_tree, ramsey_check)
from skewtree.regularity import (BudgetExceededError as
                                 RegularityBudgetError, EmbeddingFailure,
                                 PreconditionError)
from skewtree.treeparts import (FinePartition, fine_partition,
                                verify_fine_partition)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational {text!r}: {exc}") from exc


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _emit(args, payload: dict) -> None:
    payload = dict(payload)
    payload["run_config"] = {
        k: (str(v) if isinstance(v, Fraction) else v)
        for k, v in sorted(vars(args).items())
        if k not in ("func", "output") and v is not None}
    payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def bundle_to_json(g: SkewLksGraph, tree: RootedTree, fp: FinePartition,
                   witness: ConfigWitness | None, delta) -> str:
    """Self-contained instance bundle consumed by embed/find-config."""
    return json.dumps({
        "graph": json.loads(g.to_json()),
        "tree": json.loads(tree.to_json()),
        "fine_partition": json.loads(fp.to_json()),
        "witness": None if witness is None
        else json.loads(witness.to_json()),
        "delta": str(Fraction(delta)),
    })


def bundle_from_json(text: str):
    d = json.loads(text)
    g = SkewLksGraph.from_json(json.dumps(d["graph"]))
    tree = RootedTree.from_json(json.dumps(d["tree"]))
    fp = FinePartition.from_json(json.dumps(d["fine_partition"]))
    w = (ConfigWitness.from_json(json.dumps(d["witness"]))
         if d.get("witness") else None)
    delta = Fraction(d.get("delta", "1/10"))
    return g, tree, fp, w, delta


def _parse_tree_spec(spec: str) -> RootedTree:
    """P<n> path, S<n> star with n leaves, or a RootedTree JSON file."""
    if spec and spec[0] in "PS" and spec[1:].isdigit():
        n = int(spec[1:])
        if spec[0] == "P":
            if n < 1:
                raise UsageError("path needs at least one vertex")
            return RootedTree(n, 0, [-1] + list(range(n - 1)))
        return RootedTree(n + 1, 0, [-1] + [0] * n)
    return RootedTree.from_json(_read(spec))


def cmd_fine_partition(args) -> int:
    tree = _parse_tree_spec(args.tree)
    if not 1 <= args.ell < tree.k:
        raise UsageError(f"need 1 <= ell < k={tree.k}")
    fp = fine_partition(tree, args.ell)
    violations = verify_fine_partition(tree, fp)
    _emit(args, {"fine_partition": json.loads(fp.to_json()),
                 "violations": [list(v) for v in violations],
                 "seed_bound": str(Fraction(336 * tree.k, args.ell)),
                 "seed_sizes": [len(fp.W_A), len(fp.W_B)]})
    return EXIT_OK if not violations else EXIT_NEGATIVE


def cmd_find_config(args) -> int:
    g, tree, fp, _, _ = bundle_from_json(_read(args.bundle))
    stats = TreeStats.from_partition(fp, tree)
    try:
        w = find_configuration(g.cluster_graph(), stats,
                               Fraction(g.params["eta"]))
    except NoConfigurationError as exc:
        _emit(args, {"witness": None,
                     "counterexample_candidate": exc.report})
        return EXIT_NEGATIVE
    _emit(args, {"witness": json.loads(w.to_json()),
                 "verified": verify_witness(g.cluster_graph(), stats, w,
                                            Fraction(g.params["eta"]))})
    return EXIT_OK


def cmd_embed(args) -> int:
    g, tree, fp, w, delta = bundle_from_json(_read(args.bundle))
    if args.delta is not None:
        delta = args.delta
    if w is None:
        stats = TreeStats.from_partition(fp, tree)
        w = find_configuration(g.cluster_graph(), stats,
                               Fraction(g.params["eta"]))
    ledger: list = []
    try:
        cert = master_embed(g, tree, fp, w, delta, ledger_out=ledger)
    except (PreconditionError, EmbeddingFailure) as exc:
        payload = {"certificate": None, "error": str(exc.args[0])}
        if args.trace:
            payload["ledger"] = [list(map(str, row)) for row in ledger]
        _emit(args, payload)
        return EXIT_NEGATIVE
    payload = {"certificate": json.loads(cert.to_json()),
               "validates": validate_embedding(cert, tree, g.host),
               "configuration": w.config}
    if args.trace:
        payload["ledger"] = [list(map(str, row)) for row in ledger]
    _emit(args, payload)
    return EXIT_OK


def _scan_chunk(chunk_args):
    k, r, n, seed, trials = chunk_args
    rep = conjecture_scan(k, r, n, ("random", seed, trials))
    return (rep.instances_tried, rep.hypothesis_skipped,
            rep.counterexamples)


def cmd_scan(args) -> int:
    if args.exhaustive:
        rep = conjecture_scan(args.k, args.r, args.n, ("exhaustive",))
        tried, skipped = rep.instances_tried, rep.hypothesis_skipped
        cex = rep.counterexamples
        subscan = rep.subscan
    else:
        seeds = np.random.SeedSequence(args.seed).spawn(args.jobs)
        base, extra = divmod(args.trials, args.jobs)
        chunks = [(args.k, args.r, args.n,
                   int(s.generate_state(1)[0]),
                   base + (1 if i < extra else 0))
                  for i, s in enumerate(seeds)]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_scan_chunk, chunks))
        else:
            results = [_scan_chunk(c) for c in chunks]
        tried = sum(x[0] for x in results)
        skipped = sum(x[1] for x in results)
        cex = [c for x in results for c in x[2]]
        subscan = None
    _emit(args, {"instances_tried": tried, "hypothesis_skipped": skipped,
                 "counterexamples": cex, "subscan": subscan})
    return EXIT_OK if not cex else EXIT_NEGATIVE


def cmd_extremal(args) -> int:
    g = gen_extremal(args.k, args.r, args.copies)
    payload = {"order": g.n,
               "degrees": sorted(g.degree(v) for v in range(g.n))}
    code = EXIT_OK
    if args.check_path:
        q = int(args.r * (args.k + 1))
        path = RootedTree(2 * q, 0, [-1] + list(range(2 * q - 1)))
        found = brute_force_embed(path, g) is not None
        payload["path_order"] = 2 * q
        payload["path_found"] = found
        payload["verdict"] = ("unexpected embedding" if found
                              else f"no P{2 * q}: confirmed")
        code = EXIT_NEGATIVE if found else EXIT_OK
    if args.check_tight:
        t = gen_tight_tree(args.k, args.r)
        found = brute_force_embed(t, g) is not None
        payload["tight_tree_found"] = found
        if found:
            code = EXIT_NEGATIVE
    _emit(args, payload)
    return code


def cmd_bistar(args) -> int:
    missing = bistar_check(args.k)
    _emit(args, {"k": args.k, "bistar_missing": missing})
    return EXIT_OK if missing else EXIT_NEGATIVE


def cmd_ramsey(args) -> int:
    trees = [_parse_tree_spec(s) for s in args.trees.split(",")]
    try:
        verdict = ramsey_check(trees, args.n)
    except BudgetExceededError as exc:
        _emit(args, {"forced": None, "inconclusive": str(exc)})
        return EXIT_NEGATIVE
    _emit(args, {"forced": verdict.forced,
                 "witness": verdict.witness,
                 "colourings_checked": verdict.colourings_checked})
    return EXIT_OK if verdict.forced else EXIT_NEGATIVE


def cmd_synthesize(args) -> int:
    plan = json.loads(_read(args.plan))
    g = synthesize_lks(plan["m_L"], plan["m_S"], plan["cluster_size"],
                       Fraction(plan["r"]),
                       [[Fraction(x) for x in row]
                        for row in plan["densities"]],
                       args.seed,
                       k=plan.get("k"),
                       eta=Fraction(plan["eta"]) if "eta" in plan else None,
                       epsilon=(Fraction(plan["epsilon"])
                                if "epsilon" in plan else None),
                       d=Fraction(plan["d"]) if "d" in plan else None)
    _emit(args, {"graph": json.loads(g.to_json())})
    return EXIT_OK


def cmd_validate_lks(args) -> int:
    text = _read(args.bundle)
    data = json.loads(text)
    graph_json = json.dumps(data["graph"] if "graph" in data else data)
    g = SkewLksGraph.from_json(graph_json)
    budget = ("exhaustive" if args.exhaustive
              else ("sampled", args.seed, args.trials))
    violations = validate_lks(g, budget)
    _emit(args, {"violations": [list(map(str, v)) for v in violations]})
    return EXIT_OK if not violations else EXIT_NEGATIVE


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="skewtree",
        description="Skewed tree-embedding pipeline and oracle lab")
    top.add_argument("--config", help="JSON file with flag defaults")
    sub = top.add_subparsers(dest="command", required=True)
    env_seed = int(os.environ.get("SKEWTREE_SEED", "0"))

    def common(p):
        p.add_argument("--output", help="write JSON here instead of stdout")
        p.add_argument("--seed", type=int, default=env_seed)

    p = sub.add_parser("fine-partition", help="cut a tree, verify the cut")
    p.add_argument("tree", help="P<n>, S<n>, or tree JSON file")
    p.add_argument("--ell", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_fine_partition)

    p = sub.add_parser("find-config", help="search degree configurations")
    p.add_argument("bundle", help="instance bundle JSON")
    common(p)
    p.set_defaults(func=cmd_find_config)

    p = sub.add_parser("embed", help="run the embedding engine")
    p.add_argument("bundle", help="instance bundle JSON")
    p.add_argument("--delta", type=_fraction)
    p.add_argument("--trace", action="store_true",
                   help="include the inequality ledger")
    common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("scan", help="conjecture scan at small scale")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=_fraction, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("extremal", help="extremal block construction")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=_fraction, required=True)
    p.add_argument("--copies", type=int, default=1)
    p.add_argument("--check-path", action="store_true")
    p.add_argument("--check-tight", action="store_true")
    common(p)
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("bistar", help="bistar non-embedding check")
    p.add_argument("--k", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_bistar)

    p = sub.add_parser("ramsey", help="monochromatic tree forcing")
    p.add_argument("--trees", required=True,
                   help="comma list: P<n>, S<n>, or tree JSON files")
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_ramsey)

    p = sub.add_parser("synthesize", help="realize a density plan")
    p.add_argument("plan", help="density plan JSON file")
    common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("validate-lks", help="check the six properties")
    p.add_argument("bundle", help="model bundle or bare graph JSON")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--trials", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_validate_lks)
    return top


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            defaults = json.loads(_read(args.config))
        except (UsageError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for key, value in defaults.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and attr not in _explicit(argv):
                setattr(args, attr, value)
    try:
        return args.func(args)
    except (PreconditionError, EmbeddingFailure, BudgetExceededError,
            RegularityBudgetError) as exc:
        print(f"failed: {exc.args[0]}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (UsageError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _explicit(argv) -> set[str]:
    out = set()
    for token in (argv if argv is not None else sys.argv[1:]):
        if token.startswith("--"):
            out.add(token[2:].split("=")[0].replace("-", "_"))
    return out


if __name__ == "__main__":
    sys.exit(main())
