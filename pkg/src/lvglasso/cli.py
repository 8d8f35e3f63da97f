"""Command-line interface.

    lvglasso [fit] --input data.csv --method em --kappa 2 --target-edges 40 \
        --out-json fit.json --out-dot fit.dot
    lvglasso synth --p 30 --kappa 2 --edge-prob 0.1 --n 2000 --seed 0 --out data.csv

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from .core import (ConfigError, DataError, NumericalError, as_covariance,
                   empirical_covariance)
from .graphstats import extract_graph
from .io import (atomic_write_text, dumps_result, emit_outputs, ingest_csv,
                 result_document)
from .methods import FitSpec, calibrate_lambda, fit
from .stability import StabilityConfig, bootstrap_edge_frequencies, stable_graph
from .synthetic import generate_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("lvglasso")


def _fit_parser(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
    p.add_argument("--input", required=True, help="CSV of observations (or a covariance with --covariance)")
    p.add_argument("--covariance", action="store_true", help="treat the CSV as a covariance matrix")
    p.add_argument("--method", choices=["em", "nuclear", "glasso"], default="em")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--kappa", type=int, default=None)
    p.add_argument("--iters", type=int, default=4, help="EM iterations")
    p.add_argument("--target-edges", type=int, default=None,
                   help="calibrate lambda to this many edges")
    p.add_argument("--bootstrap", type=int, default=None, metavar="B")
    p.add_argument("--stability-threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="processes for bootstrap replicates")
    p.add_argument("--out-json", default=None)
    p.add_argument("--out-dot", default=None)
    p.add_argument("--dot-isolated", action="store_true", help="keep isolated vertices in DOT")
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--divisor", choices=["n", "n-1"], default="n")
    p.add_argument("--penalize-diagonal", action="store_true")
    p.add_argument("--zero-tol", type=float, default=1e-8)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _synth_parser(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--kappa", type=int, default=2)
    p.add_argument("--edge-prob", type=float, default=0.1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--latent-scale", type=float, default=1.5)
    p.add_argument("--out", required=True, help="CSV destination for the samples")
    p.add_argument("--truth", default=None, help="JSON destination for S*, L* and the true edges")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lvglasso",
                                     description="Sparse graphical models with latent variables")
    sub = parser.add_subparsers(dest="command", required=True)
    _fit_parser(sub.add_parser("fit", help="estimate a graph"))
    _synth_parser(sub.add_parser("synth", help="generate synthetic sparse-minus-low-rank data"))
    return parser


def _check_config(args) -> None:
    if args.method == "em" and args.kappa is None:
        raise ConfigError("--method em requires --kappa")
    if args.method == "nuclear" and args.gamma is None:
        raise ConfigError("--method nuclear requires --gamma")
    if args.lam is None and args.target_edges is None:
        raise ConfigError("give --lambda or --target-edges")
    if args.bootstrap is not None:
        if args.covariance:
            raise ConfigError("--bootstrap needs raw observations, not --covariance")
        if args.bootstrap < 1:
            raise ConfigError("--bootstrap must be >= 1")
    if not 0 < args.stability_threshold <= 1:
        raise ConfigError("--stability-threshold must be in (0, 1]")


def run_fit(args) -> int:
    _check_config(args)
    data = ingest_csv(args.input)
    labels = list(data.labels)
    if args.covariance:
        Sigma = as_covariance(data.values, "input covariance")
    else:
        Sigma = empirical_covariance(data, standardize=args.standardize, divisor=args.divisor)
    spec = FitSpec(args.method, args.lam if args.lam is not None else 0.0, kappa=args.kappa,
                   gamma=args.gamma, iterations=args.iters,
                   penalize_diagonal=args.penalize_diagonal)
    extra = {}
    if args.target_edges is not None:
        cal = calibrate_lambda(Sigma, spec, args.target_edges, zero_tol=args.zero_tol)
        spec = spec.with_lam(cal.lam)
        est = cal.fit
        extra["calibration"] = dict(target_edges=cal.target, edges=cal.edges, exact=cal.exact,
                                    lam=cal.lam, steps=cal.steps,
                                    bracket=[list(b) for b in cal.bracket] if cal.bracket else None)
        if not cal.exact:
            print(f"warning: no lambda gives exactly {cal.target} edges; "
                  f"closest {cal.edges}, bracket {cal.bracket}", file=sys.stderr)
    else:
        est = fit(Sigma, spec)
    graph = extract_graph(est.S, args.zero_tol, source=dict(method=args.method))

    stability = None
    if args.bootstrap is not None:
        cfg = StabilityConfig(args.bootstrap, args.stability_threshold, spec, args.seed,
                              standardize=args.standardize, divisor=args.divisor,
                              zero_tol=args.zero_tol)
        table = bootstrap_edge_frequencies(data, cfg, n_jobs=args.jobs)
        sg = stable_graph(table, args.stability_threshold)
        iu, ju = np.nonzero(np.triu(table.counts, 1))
        stability = dict(
            B=table.B, replicates=args.bootstrap, threshold=args.stability_threshold,
            failures=len(table.failures),
            frequencies=[dict(i=int(i), j=int(j), count=int(table.counts[i, j]),
                              frequency=float(table.counts[i, j] / table.B))
                         for i, j in zip(iu, ju)],
            stable_edges=[[i, j] for i, j in sg.edges()])

    params = spec.params()
    params.update(standardize=bool(args.standardize and not args.covariance),
                  divisor=args.divisor, zero_tol=args.zero_tol, seed=args.seed,
                  covariance_input=args.covariance)
    doc = result_document(args.method, params, est, graph, labels, stability, extra)
    emit_outputs(doc, graph, est.S, labels, args.out_json, args.out_dot, args.dot_isolated)
    if args.out_json is None:
        sys.stdout.write(dumps_result(doc))
    else:
        s = doc["summary"]
        print(f"{args.method}: lambda={spec.lam:.6g} edges={s['edges']} isolated={s['isolated']} "
              f"cliques={s['cliques']} largest_clique={s['largest_clique']}")
    return EXIT_OK


def run_synth(args) -> int:
    model = generate_synthetic(args.p, args.kappa, args.edge_prob, args.n, args.seed,
                               latent_scale=args.latent_scale)
    header = ",".join(model.data.labels)
    body = "\n".join(",".join(repr(float(v)) for v in row) for row in model.data.values)
    atomic_write_text(args.out, header + "\n" + body + "\n")
    if args.truth:
        i, j = np.nonzero(np.triu(model.support, 1))
        truth = dict(p=args.p, kappa=args.kappa, seed=args.seed, S=model.S_true.tolist(),
                     L=model.L_true.tolist(), edges=[[int(a), int(b)] for a, b in zip(i, j)])
        atomic_write_text(args.truth, json.dumps(truth, indent=2) + "\n")
    print(f"wrote {args.n} x {args.p} samples to {args.out} "
          f"({int(model.support.sum() // 2)} true edges)")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("fit", "synth", "-h", "--help"):
        argv = ["fit"] + argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return run_synth(args)
        return run_fit(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
