"""Birth-death decomposition of edge weights and Betti numbers of the graph filtration.

Thresholding a network at ``eps`` keeps exactly the edges with weight ``> eps``.
As ``eps`` grows, each removed edge either splits a component (a birth) or
breaks a cycle (a death). The birth values are the weights of a maximum
spanning tree; every other weight is a death.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .network import WeightedNetwork, n_pairs, pair_index


def n_births(node_count: int) -> int:
    return node_count - 1


def n_deaths(node_count: int) -> int:
    return 1 + node_count * (node_count - 3) // 2


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


@dataclass(frozen=True, eq=False)
class Barcode:
    """Sorted birth values (components) and sorted death values (cycles)."""

    node_count: int
    births: np.ndarray
    deaths: np.ndarray

    def __post_init__(self):
        n = int(self.node_count)
        b = np.array(self.births, dtype=np.float64).reshape(-1)
        d = np.array(self.deaths, dtype=np.float64).reshape(-1)
        if n < 2:
            raise ValidationError(f"a barcode needs at least 2 nodes, got {n}")
        if b.size != n_births(n) or d.size != n_deaths(n):
            raise ValidationError(
                f"{n}-node barcode needs {n_births(n)} births and {n_deaths(n)} deaths, "
                f"got {b.size} and {d.size}"
            )
        if np.any(np.diff(b) < 0) or np.any(np.diff(d) < 0):
            raise ValidationError("births and deaths must be sorted non-decreasing")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(d))):
            raise ValidationError("barcode values must be finite", code="E_NONFINITE")
        b.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "births", b)
        object.__setattr__(self, "deaths", d)

    @classmethod
    def from_values(cls, node_count: int, births: Iterable[float], deaths: Iterable[float]):
        """Build from unsorted values."""
        return cls(node_count, np.sort(np.asarray(list(births), dtype=float)),
                   np.sort(np.asarray(list(deaths), dtype=float)))

    def to_json(self) -> dict:
        return {
            "node_count": self.node_count,
            "births": [float(x) for x in self.births],
            "deaths": [float(x) for x in self.deaths],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Barcode":
        try:
            return cls(int(doc["node_count"]), doc["births"], doc["deaths"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed barcode JSON: {exc}") from exc

    def equals(self, other: "Barcode") -> bool:
        return (
            self.node_count == other.node_count
            and np.array_equal(self.births, other.births)
            and np.array_equal(self.deaths, other.deaths)
        )


@dataclass(frozen=True, eq=False)
class Decomposition:
    """A barcode together with the edge that produced each of its values.

    ``birth_edges[l]`` is the pair index whose weight is ``barcode.births[l]``;
    likewise for deaths. Equal weights keep the order Kruskal visited them in.
    """

    barcode: Barcode
    birth_edges: np.ndarray
    death_edges: np.ndarray

    @property
    def birth_mask(self) -> np.ndarray:
        mask = np.zeros(n_pairs(self.barcode.node_count), dtype=bool)
        mask[self.birth_edges] = True
        return mask


def decompose_edges(net: WeightedNetwork) -> Decomposition:
    """Kruskal maximum spanning tree over all pairs, keeping per-edge attribution."""
    n = net.node_count
    if n < 2:
        raise ValidationError(f"decomposition needs at least 2 nodes, got {n}")
    w = net.weights
    rows, cols = pair_index(n)
    # descending weight; the stable sort keeps lexicographic (i, j) order among ties
    order = np.argsort(-w, kind="stable")
    uf = UnionFind(n)
    tree = []
    for e, a, b in zip(order.tolist(), rows[order].tolist(), cols[order].tolist()):
        if uf.union(a, b):
            tree.append(e)
            if len(tree) == n - 1:
                break
    mask = np.zeros(w.size, dtype=bool)
    mask[tree] = True
    # reversing the descending visit order gives ascending weights
    asc = order[::-1]
    birth_edges = asc[mask[asc]]
    death_edges = asc[~mask[asc]]
    barcode = Barcode(n, w[birth_edges], w[death_edges])
    return Decomposition(barcode, birth_edges, death_edges)


def decompose(net: WeightedNetwork) -> Barcode:
    """Birth values (maximum spanning tree weights) and death values (the rest), sorted."""
    return decompose_edges(net).barcode


# ---------------------------------------------------------------- Betti numbers


@dataclass(frozen=True, eq=False)
class BettiCurve:
    thresholds: np.ndarray
    beta0: np.ndarray
    beta1: np.ndarray

    def rows(self):
        for eps, b0, b1 in zip(self.thresholds, self.beta0, self.beta1):
            yield float(eps), int(b0), int(b1)


def betti_curve(bc: Barcode, thresholds: Sequence[float]) -> BettiCurve:
    eps = np.asarray(thresholds, dtype=float).reshape(-1)
    if np.any(np.diff(eps) < 0):
        raise ValidationError("thresholds must be sorted ascending", code="E_UNSORTED")
    beta0 = 1 + np.searchsorted(bc.births, eps, side="right")
    beta1 = bc.deaths.size - np.searchsorted(bc.deaths, eps, side="right")
    return BettiCurve(eps, beta0.astype(np.int64), beta1.astype(np.int64))


def betti_at(net: WeightedNetwork, eps: float) -> tuple[int, int]:
    """(components, independent cycles) of the graph keeping edges with weight > eps."""
    n = net.node_count
    rows, cols = pair_index(n)
    keep = net.weights > eps
    uf = UnionFind(n)
    for a, b in zip(rows[keep].tolist(), cols[keep].tolist()):
        uf.union(a, b)
    beta0 = uf.components
    return beta0, int(keep.sum()) - n + beta0


def weight_grid(bc: Barcode) -> np.ndarray:
    """Every distinct barcode value, preceded by one point below the smallest."""
    values = np.unique(np.concatenate([bc.births, bc.deaths]))
    span = values[-1] - values[0]
    below = values[0] - (0.05 * span if span > 0 else 1.0)
    return np.concatenate([[below], values])


def uniform_grid(barcodes: Sequence[Barcode], points: int = 100) -> np.ndarray:
    lo = min(min(bc.births[0], bc.deaths[0] if bc.deaths.size else np.inf) for bc in barcodes)
    hi = max(max(bc.births[-1], bc.deaths[-1] if bc.deaths.size else -np.inf) for bc in barcodes)
    return np.linspace(lo, hi, points)


def write_barcode_json(bc: Barcode, path) -> None:
    with open(path, "w") as fh:
        json.dump(bc.to_json(), fh)
        fh.write("\n")


def read_barcode_json(path) -> Barcode:
    try:
        with open(path) as fh:
            return Barcode.from_json(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read barcode {path}: {exc}") from exc


def write_betti_csv(curve: BettiCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "beta0", "beta1"])
        for eps, b0, b1 in curve.rows():
            writer.writerow([repr(eps), b0, b1])
