"""Exact topological distance, combined network dissimilarity, distance matrices."""
from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInputError, SizeMismatchError, ValidationError
from .filtration import Barcode, decompose
from .network import WeightedNetwork, check_same_size


def check_lambda(lam) -> float:
    """Validate the topology weight; it must lie in [0, 1]."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ValidationError(f"lambda must lie in [0, 1], got {lam}", code="E_LAMBDA")
    return lam


def d_top_sq(a: Barcode, b: Barcode) -> float:
    """Squared 2-Wasserstein distance between two barcodes of equal node count.

    Both barcodes are stored sorted, so the optimal matching pairs values by rank.
    """
    if a.node_count != b.node_count:
        raise SizeMismatchError(
            f"barcodes come from {a.node_count}- and {b.node_count}-node networks"
        )
    db = a.births - b.births
    dd = a.deaths - b.deaths
    return float(db @ db + dd @ dd)


def d_top(a: Barcode, b: Barcode) -> float:
    return math.sqrt(d_top_sq(a, b))


def d_geo_sq(g: WeightedNetwork, h: WeightedNetwork) -> float:
    if g.node_count != h.node_count:
        raise SizeMismatchError(f"networks have {g.node_count} and {h.node_count} nodes")
    diff = g.weights - h.weights
    return float(diff @ diff)


def d_net_sq(
    g: WeightedNetwork,
    h: WeightedNetwork,
    lam: float,
    bg: Optional[Barcode] = None,
    bh: Optional[Barcode] = None,
) -> float:
    """(1 - lam) * squared edge-weight distance + lam * squared topological distance.

    ``bg`` and ``bh`` may carry precomputed barcodes of ``g`` and ``h``.
    """
    lam = check_lambda(lam)
    if g.node_count != h.node_count:
        raise SizeMismatchError(f"networks have {g.node_count} and {h.node_count} nodes")
    total = 0.0
    if lam < 1.0:
        total += (1.0 - lam) * d_geo_sq(g, h)
    if lam > 0.0:
        bg = decompose(g) if bg is None else bg
        bh = decompose(h) if bh is None else bh
        total += lam * d_top_sq(bg, bh)
    return total


def d_net(g, h, lam, bg=None, bh=None) -> float:
    return math.sqrt(d_net_sq(g, h, lam, bg, bh))


class BarcodeCache:
    """Barcodes keyed by network content hash. Safe to share between threads."""

    def __init__(self):
        self._store: dict[str, Barcode] = {}
        self._lock = threading.Lock()

    def get(self, net: WeightedNetwork) -> Barcode:
        key = net.digest()
        bc = self._store.get(key)
        if bc is None:
            bc = decompose(net)
            with self._lock:
                self._store.setdefault(key, bc)
        return bc

    def __len__(self):
        return len(self._store)


def worker_count(requested: Optional[int] = None) -> int:
    """Worker budget: explicit request, else ``TOPOCLUST_THREADS``, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("TOPOCLUST_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"TOPOCLUST_THREADS must be an integer, got {env!r}")
    return 1


def distance_matrix(
    nets: Sequence[WeightedNetwork],
    lam: float,
    workers: Optional[int] = None,
    cache: Optional[BarcodeCache] = None,
) -> np.ndarray:
    """Matrix of ``d_net_sq`` between all pairs. Rows may be computed concurrently."""
    lam = check_lambda(lam)
    if len(nets) == 0:
        raise EmptyInputError("distance matrix of an empty dataset")
    check_same_size(nets)
    n = len(nets)
    cache = cache if cache is not None else BarcodeCache()
    barcodes = [cache.get(net) for net in nets] if lam > 0 else [None] * n
    out = np.zeros((n, n))

    def fill_row(i):
        for j in range(i + 1, n):
            out[i, j] = d_net_sq(nets[i], nets[j], lam, barcodes[i], barcodes[j])

    nworkers = worker_count(workers)
    if nworkers > 1 and n > 2:
        with ThreadPoolExecutor(nworkers) as pool:
            list(pool.map(fill_row, range(n)))
    else:
        for i in range(n):
            fill_row(i)
    # each entry is written once, so the mirror is exact
    iu = np.triu_indices(n, 1)
    out[(iu[1], iu[0])] = out[iu]
    return out


def write_matrix_csv(matrix: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        for row in matrix:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")
