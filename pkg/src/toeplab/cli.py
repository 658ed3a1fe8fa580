"""Command line interface.

Subcommands: ``simulate`` (Monte-Carlo ratio study), ``constant`` (the
variational constant report), ``blocks`` (partition statistics dump),
``invariance`` (swapping-bound experiments), ``verify`` (acceptance
suite, nonzero exit on any failure), ``eigvec`` (exploratory top
eigenvector localization).
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (SUBCOMMANDS, config_from_sources, load_config,
                      run_blocks, run_constant, run_eigvec, run_invariance,
                      run_simulate)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toeplab",
        description="random Toeplitz top-eigenvalue laboratory")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, dest="master_seed", help="master seed")
        p.add_argument("--n", dest="n_list", help="comma separated sizes, e.g. 128,256")
        p.add_argument("--trials", type=int)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--out", dest="output_dir")
        p.add_argument("--ensemble", choices=("gaussian", "rademacher", "uniform", "student_t"))
        p.add_argument("--jobs", type=int, dest="n_jobs")
        if name == "verify":
            p.add_argument("--criteria", help="comma separated criterion ids (default: all)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    file_values = load_config(args.config) if args.config else None
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("config", "subcommand", "criteria") and v is not None}
    config = config_from_sources(file_values, subcommand=args.subcommand, **overrides)

    if args.subcommand == "simulate":
        report = run_simulate(config)
        for n, agg in report["per_n"].items():
            print(f"n={n}: mean={agg.get('mean', float('nan')):.6f} "
                  f"stderr={agg.get('stderr', float('nan')):.6f} failed={agg['failed']}")
        return 0
    if args.subcommand == "constant":
        report = run_constant(config)
        print(json.dumps({k: report[k] for k in
                          ("K1", "K1_squared", "sqrt2_pi_k_max", "sin_crosscheck")}, indent=2))
        return 0
    if args.subcommand == "blocks":
        report = run_blocks(config)
        print(f"admissible fraction: {report['admissible_fraction']:.3f}  "
              f"visibility symmetry: {report['visibility_symmetric_fraction']:.3f}")
        return 0
    if args.subcommand == "invariance":
        report = run_invariance(config)
        for name in ("linear_quadratic", "cosine", "bump"):
            c = report[name]
            print(f"{name}: lhs={c['lhs']:.5f} bound={c['bound']:.5f} holds={c['holds']}")
        return 0
    if args.subcommand == "eigvec":
        report = run_eigvec(config)
        for row in report["rows"]:
            print(f"n={row['n']}: ipr={row['ipr']:.5f} "
                  f"support_90pct={row['support_size_90pct']}")
        return 0
    # verify
    from .acceptance import run_criteria
    wanted = None
    if getattr(args, "criteria", None):
        wanted = [int(x) for x in args.criteria.split(",")]
    results = run_criteria(config, wanted)
    failures = sum(not r.passed for r in results)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
