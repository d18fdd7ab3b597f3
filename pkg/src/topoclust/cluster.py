"""Topological k-means: alternate nearest-representative assignment and re-estimation.

With ``lam == 0`` this is plain k-means on edge weights, with ``lam == 1`` the
representatives are topological centroids (barcodes only), and in between they
are found by topological interpolation warm-started from the previous round.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .barycenter import (
    InterpolationConfig,
    Representative,
    interpolate,
    sample_mean,
    topological_centroid,
)
from .errors import EmptyInputError, ValidationError
from .filtration import Barcode, decompose
from .metric import BarcodeCache, check_lambda, d_net_sq, d_top_sq, worker_count
from .network import WeightedNetwork, check_same_size

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusterConfig:
    k: int
    lam: float = 1.0
    seed: int = 0
    max_outer_iters: int = 100
    interp: InterpolationConfig = field(default_factory=InterpolationConfig)
    restarts: int = 1

    def __post_init__(self):
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 1):
            raise ValidationError(f"k must be a positive integer, got {self.k!r}")
        check_lambda(self.lam)
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.max_outer_iters < 1 or self.restarts < 1:
            raise ValidationError("max_outer_iters and restarts must be positive")


@dataclass
class Clustering:
    assignments: np.ndarray
    representatives: list
    objective: float
    iterations: int
    converged: bool
    # objective after the initial estimate and after every re-estimation
    trace: list = field(default_factory=list)
    # objective after every assignment and every re-estimation, interleaved
    half_steps: list = field(default_factory=list)
    seed: int = 0

    @property
    def k(self) -> int:
        return len(self.representatives)


def rep_distance(rep: Representative, net: WeightedNetwork, lam: float,
                 rep_bc: Optional[Barcode] = None, net_bc: Optional[Barcode] = None) -> float:
    """``d_net_sq`` from a representative to a network.

    A barcode-only representative is only meaningful at ``lam == 1``, where the
    dissimilarity reduces to the squared topological distance.
    """
    if isinstance(rep, Barcode):
        if lam != 1.0:
            raise ValidationError("barcode representatives require lambda == 1")
        return d_top_sq(rep, net_bc if net_bc is not None else decompose(net))
    return d_net_sq(rep, net, lam, rep_bc, net_bc)


def objective(nets: Sequence[WeightedNetwork], assignments, reps: Sequence[Representative],
              lam: float, barcodes: Optional[Sequence[Barcode]] = None) -> float:
    """Sum over networks of ``d_net_sq`` to their cluster representative."""
    lam = check_lambda(lam)
    assignments = np.asarray(assignments)
    if assignments.shape != (len(nets),):
        raise ValidationError(f"{len(nets)} networks but {assignments.size} assignments")
    if assignments.size and (assignments.min() < 0 or assignments.max() >= len(reps)):
        raise ValidationError("assignment refers to a missing representative")
    if barcodes is None and lam > 0:
        barcodes = [decompose(net) for net in nets]
    rep_bcs = [None if isinstance(r, Barcode) or lam == 0 else decompose(r) for r in reps]
    total = 0.0
    for i, h in enumerate(assignments.tolist()):
        total += rep_distance(reps[h], nets[i], lam, rep_bcs[h],
                              None if barcodes is None else barcodes[i])
    return total


def random_partition(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random labels in ``0..k-1`` with every label used at least once."""
    perm = rng.permutation(n)
    labels = np.empty(n, dtype=np.int64)
    labels[perm[:k]] = np.arange(k)
    labels[perm[k:]] = rng.integers(0, k, n - k)
    return labels


def restart_seeds(seed: int, restarts: int) -> list[int]:
    if restarts == 1:
        return [int(seed)]
    state = np.random.SeedSequence(int(seed)).generate_state(restarts, dtype=np.uint64)
    return [int(s) for s in state]


class _Run:
    """One clustering run from one random initial partition."""

    def __init__(self, nets, cfg: ClusterConfig, barcodes, workers: int):
        self.nets = nets
        self.cfg = cfg
        self.lam = float(cfg.lam)
        self.barcodes = barcodes
        self.workers = workers

    def _map(self, fn, items):
        if self.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(self.workers) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]

    def estimate(self, labels, prev) -> list:
        lam, cfg = self.lam, self.cfg

        def one(h):
            members = np.flatnonzero(labels == h)
            if lam == 1.0:
                return topological_centroid([self.barcodes[i] for i in members])
            mean = sample_mean([self.nets[i] for i in members])
            if lam == 0.0:
                return mean
            centroid = topological_centroid([self.barcodes[i] for i in members])
            init = prev[h] if prev is not None else mean
            res = interpolate(mean, centroid, lam, cfg.interp, init=init)
            if res.stalled:
                log.debug("cluster %d: interpolation stalled", h)
            return res.network

        return self._map(one, list(range(cfg.k)))

    def rep_barcodes(self, reps):
        if self.lam == 0.0 or self.lam == 1.0:
            return [None] * len(reps)
        return self._map(decompose, reps)

    def distances(self, reps) -> np.ndarray:
        rep_bcs = self.rep_barcodes(reps)
        k, lam = len(reps), self.lam

        def row(i):
            bc = self.barcodes[i] if self.barcodes is not None else None
            return [rep_distance(reps[h], self.nets[i], lam, rep_bcs[h], bc) for h in range(k)]

        return np.array(self._map(row, list(range(len(self.nets)))))

    def assign(self, reps):
        """Nearest representative per network, then repair empty clusters.

        An empty cluster takes the network farthest from its own representative
        (ties to the lower index) among clusters that can spare one, and that
        network becomes the empty cluster's representative.
        """
        dist = self.distances(reps)
        labels = np.argmin(dist, axis=1)  # first minimum, so ties go to the lowest index
        reps = list(reps)
        k = self.cfg.k
        counts = np.bincount(labels, minlength=k)
        for h in range(k):
            if counts[h] > 0:
                continue
            own = dist[np.arange(len(labels)), labels]
            movable = counts[labels] >= 2
            candidates = np.flatnonzero(movable)
            pick = candidates[np.lexsort((candidates, -own[candidates]))[0]]
            counts[labels[pick]] -= 1
            labels[pick] = h
            counts[h] = 1
            dist[pick, labels[pick]] = 0.0
            reps[h] = self.barcodes[pick] if self.lam == 1.0 else self.nets[pick]
            log.debug("cluster %d was empty; moved network %d into it", h, pick)
        return labels, reps

    def objective(self, labels, reps) -> float:
        return objective(self.nets, labels, reps, self.lam, self.barcodes)

    def run(self, seed: int) -> Clustering:
        rng = np.random.default_rng(seed)
        labels = random_partition(len(self.nets), self.cfg.k, rng)
        reps = self.estimate(labels, None)
        loss = self.objective(labels, reps)
        trace, half = [loss], [loss]
        converged = False
        iterations = 0
        for iterations in range(1, self.cfg.max_outer_iters + 1):
            new_labels, reps = self.assign(reps)
            half.append(self.objective(new_labels, reps))
            if np.array_equal(new_labels, labels):
                converged = True
                loss = half[-1]
                break
            labels = new_labels
            reps = self.estimate(labels, reps)
            loss = self.objective(labels, reps)
            half.append(loss)
            trace.append(loss)
        return Clustering(labels, reps, loss, iterations, converged, trace, half, seed)


def cluster(nets: Sequence[WeightedNetwork], cfg: ClusterConfig,
            workers: Optional[int] = None, cache: Optional[BarcodeCache] = None) -> Clustering:
    """Partition ``nets`` into ``cfg.k`` clusters; best of ``cfg.restarts`` random starts."""
    if len(nets) == 0:
        raise EmptyInputError("cannot cluster an empty dataset")
    check_same_size(nets)
    if cfg.k > len(nets):
        raise ValidationError(f"k={cfg.k} exceeds the number of networks ({len(nets)})")
    if cfg.lam > 0:
        cache = cache if cache is not None else BarcodeCache()
        barcodes = [cache.get(net) for net in nets]
    else:
        barcodes = None
    engine = _Run(list(nets), cfg, barcodes, worker_count(workers))
    best = None
    for seed in restart_seeds(cfg.seed, cfg.restarts):
        result = engine.run(seed)
        if best is None or result.objective < best.objective:
            best = result
    return best
