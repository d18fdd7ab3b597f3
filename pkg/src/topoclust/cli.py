"""``topoclust`` command line.

Every failure prints one line ``topoclust: error: <CODE>: <message>`` to stderr
and exits with status 2.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .barycenter import InterpolationConfig, interpolate, sample_mean, topological_centroid
from .cluster import ClusterConfig, cluster
from .errors import TopoclustError, ValidationError
from .evaluate import DEFAULT_PERMS, evaluate
from .experiment import (
    ExperimentConfig,
    SimulationSpec,
    _write_dataset,
    export_betti,
    parse_groups,
    read_run,
    run_experiment,
    write_run,
)
from .filtration import decompose, write_barcode_json
from .metric import check_lambda, distance_matrix, write_matrix_csv
from .network import FORMATS, load_dataset, load_network, save_network

log = logging.getLogger("topoclust")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise TopoclustError(message.replace("\n", " "), code="E_USAGE")


def _interp_args(p):
    p.add_argument("--step-size", type=float, default=InterpolationConfig.step_size)
    p.add_argument("--interp-iters", type=int, default=InterpolationConfig.max_iters)
    p.add_argument("--rel-tol", type=float, default=InterpolationConfig.rel_tol)


def _interp_cfg(args) -> InterpolationConfig:
    return InterpolationConfig(args.step_size, args.interp_iters, args.rel_tol)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topoclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="write random modular networks and a manifest")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--groups", required=True, help="modules:count pairs, e.g. 2:20,3:20,5:20")
    p.add_argument("--r", type=float, required=True, help="within-module connection probability")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("decompose", help="birth/death barcode of a network")
    p.add_argument("--network", required=True)
    p.add_argument("--format", choices=FORMATS, default="dense-csv")
    p.add_argument("--out", required=True)

    p = sub.add_parser("dist", help="pairwise d_net^2 matrix as CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("centroid", help="representative of all networks in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--out", required=True)
    _interp_args(p)

    p = sub.add_parser("cluster", help="topological k-means")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", required=True)
    _interp_args(p)

    p = sub.add_parser("eval", help="purity, ARI, confusion and permutation p-value of a run")
    p.add_argument("--run", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--perms", type=int, default=DEFAULT_PERMS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--smoothed", action="store_true", help="use (count+1)/(perms+1)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("experiment", help="(lambda, seed) sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir")
    p.add_argument("--lambdas", help="comma-separated override")
    p.add_argument("--seeds", type=int, help="override with seeds 0..N-1")
    p.add_argument("--perms", type=int)

    p = sub.add_parser("betti", help="Betti-curve CSVs per network and per label centroid")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--grid", choices=("weights", "uniform"), default="weights")
    p.add_argument("--points", type=int, default=100)
    return parser


def cmd_simulate(args):
    spec = SimulationSpec(args.nodes, parse_groups(args.groups), args.r, args.mu, args.sigma,
                          args.seed)
    nets, labels = spec.generate()
    path = _write_dataset(nets, labels, args.out_dir)
    print(path)


def cmd_decompose(args):
    write_barcode_json(decompose(load_network(args.network, args.format)), args.out)


def cmd_dist(args):
    nets, _ = load_dataset(args.manifest)
    write_matrix_csv(distance_matrix(nets, check_lambda(args.lam)), args.out)


def cmd_centroid(args):
    lam = check_lambda(args.lam)
    nets, _ = load_dataset(args.manifest)
    if lam == 1.0:
        write_barcode_json(topological_centroid([decompose(n) for n in nets]), args.out)
        return
    mean = sample_mean(nets)
    if lam > 0.0:
        centroid = topological_centroid([decompose(n) for n in nets])
        mean = interpolate(mean, centroid, lam, _interp_cfg(args)).network
    save_network(mean, args.out)


def cmd_cluster(args):
    nets, _ = load_dataset(args.manifest)
    cfg = ClusterConfig(k=args.k, lam=check_lambda(args.lam), seed=args.seed,
                        max_outer_iters=args.max_iters, interp=_interp_cfg(args),
                        restarts=args.restarts)
    start = time.perf_counter()
    result = cluster(nets, cfg)
    write_run(result, cfg, args.out, time.perf_counter() - start)


def cmd_eval(args):
    run = read_run(args.run)
    _, labels = load_dataset(args.manifest)
    if any(lab is None for lab in labels):
        raise ValidationError("every manifest entry needs a label for evaluation", code="E_LABELS")
    if len(labels) != len(run["assignments"]):
        raise ValidationError(
            f"run has {len(run['assignments'])} assignments, manifest {len(labels)} networks",
            code="E_LENGTH",
        )
    report = evaluate(run["assignments"], labels, args.perms, args.seed, args.smoothed)
    with open(args.out, "w") as fh:
        json.dump(report.to_json(), fh, indent=1)
        fh.write("\n")


def cmd_experiment(args):
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise TopoclustError(f"cannot read config {args.config}: {exc}", code="E_IO") from exc
    except json.JSONDecodeError as exc:
        raise TopoclustError(f"cannot parse config {args.config}: {exc}", code="E_PARSE") from exc
    if args.output_dir:
        doc["output_dir"] = args.output_dir
    if args.lambdas:
        doc["lambdas"] = [float(x) for x in args.lambdas.split(",")]
    if args.seeds is not None:
        doc["seeds"] = args.seeds
    if args.perms is not None:
        doc["perms"] = args.perms
    cfg = ExperimentConfig.from_json(doc, os.path.dirname(os.path.abspath(args.config)))
    for row in run_experiment(cfg):
        print(f"lambda={row['lambda']} accuracy={row['accuracy_mean']:.4f}"
              f"+-{row['accuracy_std']:.4f} p={row['p_value_mean']:.4g}")


def cmd_betti(args):
    nets, labels = load_dataset(args.manifest)
    export_betti(nets, labels, args.out_dir, args.grid, args.points)


COMMANDS = {
    "simulate": cmd_simulate,
    "decompose": cmd_decompose,
    "dist": cmd_dist,
    "centroid": cmd_centroid,
    "cluster": cmd_cluster,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
    "betti": cmd_betti,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except TopoclustError as exc:
        print(f"topoclust: error: {exc.code}: {' '.join(str(exc).split())}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"topoclust: error: E_IO: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
