"""Command-line front end: fit, eval, project, plot, check, gen."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .model import Model, load_model, save_model
from .pca import FitConfig, TropicalPolytope, fit, objective, project_to_polytope
from .svgplot import scatter_svg
from .treespace import (
    default_tolerance,
    load_newick_file,
    project_to_treespace,
    random_ultrametrics,
    reconstruct_tree,
    topology_signature,
    ultrametric_violation,
)
from .tropical import canonicalize, trop_dist


class CliError(Exception):
    """User-facing failure; printed as a one-line diagnostic with exit code 1."""


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _load_sample(path, project_inputs: bool = False, normalize_height: bool = False):
    """Read a Newick file into (leaf_labels, line_numbers, vector matrix)."""
    trees, errors = load_newick_file(path)
    if errors:
        raise CliError("; ".join(f"line {ln}: {err}" for ln, err in errors))
    if not trees:
        raise CliError(f"no trees found in {path}")

    first_ln, first = trees[0]
    labels = first.leaf_names
    for ln, tree in trees[1:]:
        if tree.leaf_names != labels:
            missing = sorted(set(labels) - set(tree.leaf_names))
            extra = sorted(set(tree.leaf_names) - set(labels))
            raise CliError(
                f"line {ln}: leaf set differs from line {first_ln}"
                f" (missing: {', '.join(missing) or 'none'}; extra: {', '.join(extra) or 'none'})"
            )

    if normalize_height:
        rescaled = []
        for ln, tree in trees:
            h = tree.height()
            if h <= 0:
                raise CliError(f"line {ln}: cannot normalize a tree of height 0")
            rescaled.append((ln, tree.scaled(1.0 / h)))
        trees = rescaled

    line_numbers = [ln for ln, _ in trees]
    vectors = [tree.cophenetic_vector() for _, tree in trees]
    offenders = [
        ln
        for (ln, _), vec in zip(trees, vectors)
        if ultrametric_violation(vec) > default_tolerance(vec)
    ]
    if offenders:
        if not project_inputs:
            raise CliError(
                f"non-ultrametric input trees at lines {', '.join(map(str, offenders))};"
                " rerun with --project-inputs to project them onto tree space"
            )
        bad = set(offenders)
        vectors = [
            project_to_treespace(vec) if ln in bad else vec
            for ln, vec in zip(line_numbers, vectors)
        ]
    return labels, line_numbers, np.array(vectors)


def _load_model_and_sample(args):
    model = load_model(args.model)
    labels, lines, vectors = _load_sample(
        args.input,
        project_inputs=getattr(args, "project_inputs", False),
        normalize_height=getattr(args, "normalize_height", False),
    )
    if labels != model.leaf_labels:
        missing = sorted(set(model.leaf_labels) - set(labels))
        extra = sorted(set(labels) - set(model.leaf_labels))
        raise CliError(
            f"leaf sets of model and input differ"
            f" (missing from input: {', '.join(missing) or 'none'};"
            f" extra in input: {', '.join(extra) or 'none'})"
        )
    return model, lines, vectors


def _write_trace_csv(path, trace) -> None:
    best = trace.initial_se
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("iter,alpha,SE,best_SE\n")
        for t, (alpha, se) in enumerate(zip(trace.alpha, trace.se)):
            best = min(best, se)
            handle.write(f"{t},{_fmt(alpha)},{_fmt(se)},{_fmt(best)}\n")


def cmd_fit(args) -> int:
    labels, _, vectors = _load_sample(args.input, args.project_inputs, args.normalize_height)
    cfg = FitConfig(
        s=args.s,
        max_iters=args.iters,
        lr0=args.lr0,
        decay=args.decay,
        seed=args.seed,
        update_mode=args.update_mode,
    )
    polytope, trace = fit(vectors, cfg)
    # store canonical torus representatives and the objective value they
    # reproduce exactly; the raw best-so-far may differ in the last ulp
    canonical = TropicalPolytope(np.stack([canonicalize(v) for v in polytope.vertices]))
    best_se = objective(vectors, canonical)
    model = Model(
        leaf_labels=labels,
        polytope=canonical,
        config={
            "s": cfg.s,
            "max_iters": cfg.max_iters,
            "lr0": cfg.lr0,
            "decay": cfg.decay,
            "seed": cfg.seed,
            "init": cfg.init,
            "update_mode": cfg.update_mode,
            "project_inputs": bool(args.project_inputs),
            "normalize_height": bool(args.normalize_height),
        },
        trace_summary={
            "iterations": len(trace),
            "initial_se": trace.initial_se,
            "best_se": best_se,
            "best_iteration": trace.best_iteration,
            "final_se": trace.final_se,
        },
    )
    save_model(model, args.out)
    if args.trace:
        _write_trace_csv(args.trace, trace)
    print(f"SE={best_se:.4f} time_s={trace.wall_time_s:.2f}")
    return 0


def cmd_eval(args) -> int:
    model, _, vectors = _load_model_and_sample(args)
    se = objective(vectors, model.polytope)
    print(f"SE={se:.4f}")
    return 0


def cmd_project(args) -> int:
    model, lines, vectors = _load_model_and_sample(args)
    s = model.s
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("id," + ",".join(f"lambda_{k + 1}" for k in range(s)) + ",dist\n")
        for i, u in enumerate(vectors):
            w, lam = project_to_polytope(u, model.polytope)
            row = [str(i + 1)] + [_fmt(v) for v in lam] + [_fmt(trop_dist(u, w))]
            handle.write(",".join(row) + "\n")
    return 0


def _positive_representative(u: np.ndarray) -> np.ndarray:
    """Torus-equivalent vector with all entries positive (topology-preserving shift)."""
    lowest = float(u.min())
    if lowest > 0:
        return u
    spread = float(u.max()) - lowest
    return u - lowest + 0.5 * (spread if spread > 0 else 1.0)


def cmd_plot(args) -> int:
    model, _, vectors = _load_model_and_sample(args)
    if model.s != 3:
        raise CliError("plotting requires s = 3")
    xs, ys = [], []
    groups = [] if args.color_by == "topology" else None
    for u in vectors:
        w, lam = project_to_polytope(u, model.polytope)
        xs.append(lam[1] - lam[0])
        ys.append(lam[2] - lam[0])
        if groups is not None:
            tree = reconstruct_tree(_positive_representative(w), names=model.leaf_labels)
            groups.append(topology_signature(tree))
    svg = scatter_svg(
        xs,
        ys,
        groups=groups,
        xlabel="lambda_2 - lambda_1",
        ylabel="lambda_3 - lambda_1",
    )
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(svg)
    return 0


def cmd_check(args) -> int:
    trees, errors = load_newick_file(args.input)
    if not trees and not errors:
        raise CliError(f"no trees found in {args.input}")
    rows = [(ln, "error", err) for ln, err in errors] + [(ln, "tree", t) for ln, t in trees]
    rows.sort(key=lambda item: item[0])
    n_equidistant = 0
    n_ultrametric = 0
    for ln, kind, payload in rows:
        if kind == "error":
            print(f"line {ln}: parse error: {payload}")
            continue
        tree = payload
        vec = tree.cophenetic_vector()
        gap = tree.equidistance_gap()
        violation = ultrametric_violation(vec)
        tol_eq = args.tol if args.tol is not None else default_tolerance(tree.leaf_depths())
        tol_um = args.tol if args.tol is not None else default_tolerance(vec)
        equidistant = gap <= tol_eq
        ultrametric = violation <= tol_um
        n_equidistant += equidistant
        n_ultrametric += ultrametric
        print(
            f"line {ln}: m={tree.m} height={tree.height():.6g}"
            f" equidistant={'yes' if equidistant else 'no'} (gap={gap:.3g})"
            f" ultrametric={'yes' if ultrametric else 'no'} (violation={violation:.3g})"
        )
    print(
        f"checked {len(trees)} trees: {n_equidistant} equidistant,"
        f" {n_ultrametric} ultrametric, {len(errors)} parse errors"
    )
    return 1 if errors else 0


def cmd_gen(args) -> int:
    if args.m < 3:
        raise CliError(f"m must be at least 3, got {args.m}")
    if args.n < 1:
        raise CliError(f"n must be positive, got {args.n}")
    vectors = random_ultrametrics(args.m, args.n, args.seed)
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# random equidistant trees: m={args.m} n={args.n} seed={args.seed}\n")
        for vec in vectors:
            handle.write(reconstruct_tree(vec).to_newick() + "\n")
    print(f"wrote {args.n} trees to {args.out}")
    return 0


def _add_ingestion_flags(sub) -> None:
    sub.add_argument("--project-inputs", action="store_true",
                     help="replace non-ultrametric inputs by their tree-space projection")
    sub.add_argument("--normalize-height", action="store_true",
                     help="rescale every input tree to height 1 before vectorizing")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="troppca",
        description="Fit and inspect best-fit tropical polytopes for equidistant trees.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("fit", help="fit a polytope to a Newick sample")
    p.add_argument("--input", required=True, help="Newick file, one tree per line")
    p.add_argument("--s", type=int, required=True, help="number of polytope vertices")
    p.add_argument("--iters", type=int, default=100, help="iteration count (default 100)")
    p.add_argument("--lr0", type=float, default=0.01, help="initial learning rate (default 0.01)")
    p.add_argument("--decay", type=float, default=0.999,
                   help="per-iteration learning-rate factor (default 0.999)")
    p.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")
    _add_ingestion_flags(p)
    p.add_argument("--update-mode", choices=["simultaneous", "cyclic"], default="simultaneous")
    p.add_argument("--out", required=True, help="output model JSON path")
    p.add_argument("--trace", default=None, help="optional per-iteration CSV path")
    p.set_defaults(func=cmd_fit)

    p = subparsers.add_parser("eval", help="objective value of a sample under a model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    _add_ingestion_flags(p)
    p.set_defaults(func=cmd_eval)

    p = subparsers.add_parser("project", help="per-tree polytope coordinates as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    _add_ingestion_flags(p)
    p.set_defaults(func=cmd_project)

    p = subparsers.add_parser("plot", help="2-D scatter of a sample in polytope coordinates (s=3)")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output SVG path")
    p.add_argument("--color-by", choices=["topology"], default=None)
    _add_ingestion_flags(p)
    p.set_defaults(func=cmd_plot)

    p = subparsers.add_parser("check", help="validate equidistance and ultrametricity")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=None,
                   help="absolute tolerance (default: 1e-8 x scale, per tree)")
    p.set_defaults(func=cmd_check)

    p = subparsers.add_parser("gen", help="generate random equidistant trees")
    p.add_argument("--m", type=int, required=True, help="leaf count")
    p.add_argument("--n", type=int, required=True, help="tree count")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output Newick path")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
