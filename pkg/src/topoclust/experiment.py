"""Experiment orchestration: (lambda, seed) sweeps, run files, aggregates, Betti exports."""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .barycenter import InterpolationConfig, topological_centroid
from .cluster import ClusterConfig, Clustering, cluster
from .errors import EmptyInputError, ParseError, TopoclustError, ValidationError
from .evaluate import evaluate
from .filtration import Barcode, betti_curve, decompose, uniform_grid, weight_grid
from .metric import check_lambda, worker_count
from .network import (
    DatasetManifest,
    WeightedNetwork,
    load_dataset,
    save_network,
    write_manifest,
)
from .simulate import modular_groups, network_seed, simulate_groups

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimulationSpec:
    node_count: int
    groups: tuple  # (modules, count) pairs
    within_prob: float
    mu: float = 1.0
    sigma: float = 0.5
    seed: int = 0

    def generate(self):
        return simulate_groups(modular_groups(self.node_count, self.groups, self.within_prob,
                                              self.seed, self.mu, self.sigma))


def parse_groups(text: str) -> tuple:
    """``"2:20,3:20,5:20"`` -> ``((2, 20), (3, 20), (5, 20))``."""
    try:
        pairs = []
        for part in text.split(","):
            m, c = part.split(":")
            pairs.append((int(m), int(c)))
    except ValueError as exc:
        raise ValidationError(f"groups must look like 'modules:count,...', got {text!r}",
                              code="E_USAGE") from exc
    if not pairs:
        raise ValidationError("no groups given", code="E_USAGE")
    return tuple(pairs)


@dataclass
class ExperimentConfig:
    k: int
    lambdas: list
    seeds: list
    perms: int = 10_000
    output_dir: str = "results"
    manifest: Optional[str] = None
    simulation: Optional[SimulationSpec] = None
    perm_seed: int = 0
    restarts: int = 1
    max_outer_iters: int = 100
    interp: InterpolationConfig = field(default_factory=InterpolationConfig)
    workers: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.seeds, int):
            self.seeds = list(range(self.seeds))
        self.lambdas = [check_lambda(x) for x in self.lambdas]
        if not self.lambdas or not self.seeds:
            raise ValidationError("an experiment needs at least one lambda and one seed")
        if (self.manifest is None) == (self.simulation is None):
            raise ValidationError("give exactly one of 'manifest' or 'simulation'")

    @classmethod
    def from_json(cls, doc: dict, base_dir: str = ".") -> "ExperimentConfig":
        doc = dict(doc)
        data = doc.pop("dataset", None)
        if data is None:
            raise ParseError("experiment config needs a 'dataset' entry")
        manifest = simulation = None
        if isinstance(data, str):
            manifest = data
        elif "manifest" in data:
            manifest = data["manifest"]
        else:
            groups = data["groups"]
            if isinstance(groups, str):
                groups = parse_groups(groups)
            else:
                groups = tuple((int(g["modules"]), int(g["count"])) for g in groups)
            simulation = SimulationSpec(int(data["nodes"]), groups, float(data["r"]),
                                        float(data.get("mu", 1.0)), float(data.get("sigma", 0.5)),
                                        int(data.get("seed", 0)))
        if manifest is not None and not os.path.isabs(manifest):
            manifest = os.path.join(base_dir, manifest)
        interp = InterpolationConfig(**doc.pop("interp", {}))
        known = {f for f in cls.__dataclass_fields__} - {"manifest", "simulation", "interp"}
        unknown = set(doc) - known
        if unknown:
            raise ParseError(f"unknown experiment config keys: {sorted(unknown)}")
        return cls(manifest=manifest, simulation=simulation, interp=interp, **doc)

    def load(self):
        if self.manifest is not None:
            return load_dataset(self.manifest)
        return self.simulation.generate()


def perm_seed_for(perm_seed: int, run_seed: int) -> int:
    """Permutation-test seed for one run; re-drawn for every initialization."""
    return network_seed(perm_seed, run_seed)


# ---------------------------------------------------------------- run files


def representatives_json(result: Clustering, rep_paths: Optional[Sequence[str]] = None) -> list:
    out = []
    for h, rep in enumerate(result.representatives):
        if isinstance(rep, Barcode):
            out.append({"kind": "barcode", "barcode": rep.to_json()})
        else:
            entry = {"kind": "network", "barcode": decompose(rep).to_json()}
            if rep_paths is not None:
                entry["path"] = rep_paths[h]
            out.append(entry)
    return out


def run_json(result: Clustering, cfg: ClusterConfig, elapsed: float,
             rep_paths: Optional[Sequence[str]] = None) -> dict:
    return {
        "k": cfg.k,
        "lambda": cfg.lam,
        "seed": cfg.seed,
        "restarts": cfg.restarts,
        "run_seed": result.seed,
        "assignments": [int(x) for x in result.assignments],
        "objective": result.objective,
        "trace": list(result.trace),
        "iterations": result.iterations,
        "converged": result.converged,
        "representatives": representatives_json(result, rep_paths),
        "timing_s": elapsed,
    }


def write_run(result: Clustering, cfg: ClusterConfig, path: str, elapsed: float,
              save_networks: bool = True) -> dict:
    """Write ``run.json``; network representatives go to sibling dense-csv files."""
    rep_paths = None
    if save_networks and not isinstance(result.representatives[0], Barcode):
        stem = os.path.splitext(path)[0]
        rep_paths = []
        for h, rep in enumerate(result.representatives):
            rp = f"{stem}_rep{h}.csv"
            save_network(rep, rp)
            rep_paths.append(os.path.basename(rp))
    doc = run_json(result, cfg, elapsed, rep_paths)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return doc


def read_run(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read run file {path}: {exc}") from exc
    if "assignments" not in doc:
        raise ParseError(f"run file {path} has no 'assignments'")
    return doc


# ---------------------------------------------------------------- sweeps


def _one_run(nets, labels, cfg: ExperimentConfig, lam: float, seed: int):
    ccfg = ClusterConfig(k=cfg.k, lam=lam, seed=seed, max_outer_iters=cfg.max_outer_iters,
                         interp=cfg.interp, restarts=cfg.restarts)
    start = time.perf_counter()
    try:
        result = cluster(nets, ccfg, workers=1)
        report = None
        if labels is not None:
            report = evaluate(result.assignments, labels, cfg.perms or None,
                              perm_seed_for(cfg.perm_seed, seed), workers=1)
    except TopoclustError as exc:
        raise type(exc)(f"run lambda={lam} seed={seed}: {exc}", exc.code) from exc
    elapsed = time.perf_counter() - start
    doc = run_json(result, ccfg, elapsed)
    doc["eval"] = None if report is None else report.to_json()
    return doc


def _std(values) -> float:
    # population standard deviation, defined for a single run
    return float(np.std(values)) if values else float("nan")


def aggregate(runs: Sequence[dict], lambdas: Sequence[float]) -> list[dict]:
    rows = []
    for lam in lambdas:
        sel = [r for r in runs if r["lambda"] == lam]
        evals = [r["eval"] for r in sel if r.get("eval")]
        acc = [e["accuracy"] for e in evals]
        ari = [e["ari"] for e in evals]
        pv = [e["p_value"] for e in evals if e["p_value"] is not None]
        objs = [r["objective"] for r in sel]
        rows.append({
            "lambda": lam,
            "runs": len(sel),
            "accuracy_mean": float(np.mean(acc)) if acc else float("nan"),
            "accuracy_std": _std(acc),
            "ari_mean": float(np.mean(ari)) if ari else float("nan"),
            "ari_std": _std(ari),
            "p_value_mean": float(np.mean(pv)) if pv else float("nan"),
            "p_value_std": _std(pv),
            "objective_mean": float(np.mean(objs)),
            "converged": sum(bool(r["converged"]) for r in sel),
        })
    return rows


AGGREGATE_COLUMNS = ["lambda", "runs", "accuracy_mean", "accuracy_std", "ari_mean", "ari_std",
                     "p_value_mean", "p_value_std", "objective_mean", "converged"]


def write_aggregate(rows: Sequence[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c]
                             for c in AGGREGATE_COLUMNS])


def _write_dataset(nets, labels, out_dir) -> str:
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for i, (net, lab) in enumerate(zip(nets, labels)):
        name = f"net{i:04d}.csv"
        save_network(net, os.path.join(out_dir, name))
        entries.append((name, lab))
    path = os.path.join(out_dir, "manifest.json")
    write_manifest(DatasetManifest(tuple(entries)), path)
    return path


def run_experiment(cfg: ExperimentConfig) -> list[dict]:
    """Cluster and evaluate every (lambda, seed) pair; write run files and ``aggregate.csv``."""
    nets, labels = cfg.load()
    has_labels = all(lab is not None for lab in labels)
    labels = labels if has_labels else None
    out = cfg.output_dir
    os.makedirs(os.path.join(out, "runs"), exist_ok=True)
    if cfg.simulation is not None:
        _write_dataset(nets, labels, os.path.join(out, "dataset"))

    grid = [(lam, seed) for lam in cfg.lambdas for seed in cfg.seeds]
    nworkers = worker_count(cfg.workers)
    if nworkers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(nworkers) as pool:
            futures = [pool.submit(_one_run, nets, labels, cfg, lam, seed) for lam, seed in grid]
            runs = [f.result() for f in futures]
    else:
        runs = [_one_run(nets, labels, cfg, lam, seed) for lam, seed in grid]

    for doc in runs:
        name = f"lambda{doc['lambda']!r}_seed{doc['seed']}.json"
        with open(os.path.join(out, "runs", name), "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
    rows = aggregate(runs, cfg.lambdas)
    write_aggregate(rows, os.path.join(out, "aggregate.csv"))
    log.info("wrote %d runs to %s", len(runs), out)
    return rows


# ---------------------------------------------------------------- Betti export


def export_betti(nets: Sequence[WeightedNetwork], labels: Sequence[Optional[str]], out_dir: str,
                 grid: str = "weights", points: int = 100) -> dict:
    """Betti curves per network and per label centroid, plus rank-wise barcode spread.

    ``grid="weights"`` evaluates each curve at its own barcode values;
    ``grid="uniform"`` uses ``points`` evenly spaced thresholds shared by all curves.
    """
    if len(nets) == 0:
        raise EmptyInputError("no networks to export")
    if grid not in ("weights", "uniform"):
        raise ValidationError(f"grid must be 'weights' or 'uniform', got {grid!r}", code="E_USAGE")
    os.makedirs(out_dir, exist_ok=True)
    barcodes = [decompose(net) for net in nets]
    groups: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault("all" if lab is None else str(lab), []).append(i)
    centroids = {lab: topological_centroid([barcodes[i] for i in idx]) for lab, idx in groups.items()}
    shared = uniform_grid(barcodes + list(centroids.values()), points) if grid == "uniform" else None

    def curve(bc):
        return betti_curve(bc, shared if shared is not None else weight_grid(bc))

    paths = {k: os.path.join(out_dir, f"betti_{k}.csv") for k in ("networks", "centroids", "spread")}
    with open(paths["networks"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["network", "label", "epsilon", "beta0", "beta1"])
        for i, bc in enumerate(barcodes):
            lab = "all" if labels[i] is None else labels[i]
            for eps, b0, b1 in curve(bc).rows():
                w.writerow([i, lab, repr(eps), b0, b1])
    with open(paths["centroids"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "epsilon", "beta0", "beta1"])
        for lab, bc in centroids.items():
            for eps, b0, b1 in curve(bc).rows():
                w.writerow([lab, repr(eps), b0, b1])
    with open(paths["spread"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "kind", "rank", "mean", "std"])
        for lab, idx in groups.items():
            for kind in ("births", "deaths"):
                values = np.array([getattr(barcodes[i], kind) for i in idx])
                for rank, (m, s) in enumerate(zip(values.mean(axis=0), values.std(axis=0))):
                    w.writerow([lab, kind, rank, repr(float(m)), repr(float(s))])
    return {"centroids": centroids, "paths": paths}


def experiment_config_json(cfg: ExperimentConfig) -> dict:
    doc = {k: v for k, v in asdict(cfg).items() if k not in ("simulation", "manifest")}
    if cfg.simulation is not None:
        sim = asdict(cfg.simulation)
        doc["dataset"] = {"nodes": sim["node_count"], "r": sim["within_prob"], "mu": sim["mu"],
                          "sigma": sim["sigma"], "seed": sim["seed"],
                          "groups": [{"modules": m, "count": c} for m, c in cfg.simulation.groups]}
    else:
        doc["dataset"] = {"manifest": cfg.manifest}
    return doc
