"""Command line interface.

Exit codes: 0 success, 2 validation error (bad inputs), 3 statistical
failure (an experiment ran but did not meet its threshold).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import degree_sequence as dsmod
from .errors import TreelamError
from .excursion import ei_bridge, h_exc, vervaat
from .fragmentation import build_merge_log, frag_process_query
from .harness import ExperimentConfig, run_experiment
from .lamination import Lamination, chords_from_tree, lamination_at, svg_export
from .plane_tree import (
    PlaneTree,
    contour,
    height_process,
    prim_path,
    reverse_lukasiewicz,
    to_lukasiewicz,
)
from .sampler import Seed, attach_weights, enumerate_trees, sample_tree


def _default_seed(args) -> Seed:
    if args.seed is not None:
        return Seed(args.seed, getattr(args, "stream", 0) or 0)
    env = os.environ.get("TREELAM_SEED")
    return Seed(int(env) if env else 0, getattr(args, "stream", 0) or 0)


def _load_ds(path: str) -> dsmod.DegreeSequence:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".csv"):
        return dsmod.DegreeSequence.from_csv(text)
    return dsmod.DegreeSequence.from_json(text)


def _load_tree(path: str) -> PlaneTree:
    with open(path) as fh:
        return PlaneTree.from_csv(fh.read())


def cmd_validate(args) -> int:
    ds = _load_ds(args.ds)
    st = dsmod.stats(ds)
    print(
        json.dumps(
            {
                "valid": True,
                "V": st.num_vertices,
                "E": st.num_edges,
                "sigma2": st.sigma2,
                "max_degree": st.max_degree,
            }
        )
    )
    return 0


def cmd_sample(args) -> int:
    ds = _load_ds(args.ds)
    tree = sample_tree(ds, _default_seed(args))
    with open(args.out, "w") as fh:
        fh.write(tree.to_csv() + "\n")
    return 0


def cmd_enumerate(args) -> int:
    ds = _load_ds(args.ds)
    trees = enumerate_trees(ds)
    print(len(trees))
    if args.outdir:
        os.makedirs(args.outdir, exist_ok=True)
        for i, t in enumerate(trees):
            with open(os.path.join(args.outdir, f"tree_{i:04d}.csv"), "w") as fh:
                fh.write(t.to_csv() + "\n")
    return 0


def cmd_encode(args) -> int:
    tree = _load_tree(args.tree)
    if args.kind == "lex":
        vals = to_lukasiewicz(tree).values
    elif args.kind == "rev":
        vals = reverse_lukasiewicz(tree).values
    elif args.kind == "prim":
        weights = attach_weights(tree, _default_seed(args))
        vals = prim_path(tree, weights)[0].values
    elif args.kind == "height":
        vals = height_process(tree)
    elif args.kind == "contour":
        vals = contour(tree)
    else:
        raise TreelamError(f"unknown encoding {args.kind!r}")
    out = ",".join(str(int(v)) for v in vals)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)
    return 0


def cmd_frag(args) -> int:
    tree = _load_tree(args.tree)
    weights = attach_weights(tree, _default_seed(args))
    log = build_merge_log(tree, weights)
    times = [float(x) for x in args.times.split(",")]
    rows = ["u," + ",".join(f"mass{j+1}" for j in range(args.topk))]
    for u in times:
        masses = frag_process_query(log, u)
        rows.append(
            ",".join([repr(u)] + [repr(masses[j]) for j in range(args.topk)])
        )
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


def cmd_lam(args) -> int:
    tree = _load_tree(args.tree)
    rng = _default_seed(args).rng()
    edges = [v for v in range(tree.zeta) if v != tree.root]
    order = [int(v) for v in rng.permutation(edges)]
    t = args.t if args.t is not None else tree.zeta - 1
    lam = lamination_at(tree, order, t)
    if args.svg:
        svg_export(lam, args.svg)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(lam.to_csv())
    if not args.svg and not args.csv:
        print(lam.to_csv(), end="")
    return 0


def cmd_icrt(args) -> int:
    betas = [float(b) for b in args.betas.split(",")] if args.betas else []
    theta = dsmod.theta_check(args.sigma, betas)
    K = len([b for b in theta.betas if b > 0])
    path = ei_bridge(theta, K, args.m, _default_seed(args))
    if args.kind in ("excursion", "height"):
        path, _ = vervaat(path)
    if args.kind == "height":
        path, _ = h_exc(path)
    with open(args.out, "w") as fh:
        fh.write(path.to_csv())
    with open(args.out + ".jumps.json", "w") as fh:
        fh.write(path.jumps_json())
    return 0


def cmd_compare(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    result = run_experiment(cfg, outdir=args.outdir)
    summary = {k: v for k, v in result.items() if k != "samples"}
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0 if result["passed"] else 3


def cmd_report(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_json(fh.read())
    result = run_experiment(cfg, outdir=args.outdir)
    print(f"report written to {args.outdir} (hash {result['config_hash']})")
    return 0 if result["passed"] else 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treelam")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None)
            sp.add_argument("--stream", type=int, default=0)

    sp = sub.add_parser("validate", help="check a degree sequence")
    sp.add_argument("--ds", required=True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("sample", help="sample a uniform tree")
    sp.add_argument("--ds", required=True)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("enumerate", help="list all trees (small V)")
    sp.add_argument("--ds", required=True)
    sp.add_argument("--outdir")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("encode", help="path encodings of a tree")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--kind", required=True,
                    choices=["lex", "rev", "prim", "height", "contour"])
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("frag", help="fragmentation masses at given times")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--times", required=True, help="comma-separated u values")
    sp.add_argument("--topk", type=int, default=5)
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_frag)

    sp = sub.add_parser("lam", help="lamination of a tree")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--svg")
    sp.add_argument("--csv")
    common(sp)
    sp.set_defaults(func=cmd_lam)

    sp = sub.add_parser("icrt", help="continuum excursion paths")
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--betas", default="")
    sp.add_argument("--m", type=int, default=2**14)
    sp.add_argument("--kind", choices=["bridge", "excursion", "height"],
                    default="excursion")
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_icrt)

    sp = sub.add_parser("compare", help="run a KS experiment from a config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--outdir")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("report", help="run an experiment and write figures")
    sp.add_argument("--config", required=True)
    sp.add_argument("--outdir", required=True)
    sp.set_defaults(func=cmd_report)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TreelamError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
