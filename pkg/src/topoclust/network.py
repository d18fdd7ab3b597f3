"""Weighted networks over a fixed node set, plus file ingestion and serialization.

A network stores only the strict upper triangle of its adjacency matrix, in
``numpy.triu_indices(n, 1)`` order (row-major over pairs ``i < j``). Symmetry and
the zero diagonal are therefore structural. Absent pairs carry weight 0.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInputError, ParseError, SizeMismatchError, ValidationError

FORMATS = ("dense-csv", "edge-list-tsv")
SYMMETRY_TOL = 1e-9


def n_pairs(node_count: int) -> int:
    return node_count * (node_count - 1) // 2


@lru_cache(maxsize=64)
def pair_index(node_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column arrays of the upper-triangular pairs, lexicographic in (i, j)."""
    rows, cols = np.triu_indices(node_count, 1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(frozen=True, eq=False)
class WeightedNetwork:
    """Undirected weighted network stored as its upper-triangular weight vector."""

    node_count: int
    weights: np.ndarray
    labels: Optional[tuple[str, ...]] = None
    _digest: Optional[str] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        n = self.node_count
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError(f"node_count must be a positive integer, got {n!r}")
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if w.size != n_pairs(n):
            raise ValidationError(
                f"expected {n_pairs(n)} upper-triangular weights for {n} nodes, got {w.size}"
            )
        if not np.all(np.isfinite(w)):
            raise ValidationError("weights must be finite", code="E_NONFINITE")
        w.setflags(write=False)
        object.__setattr__(self, "node_count", int(n))
        object.__setattr__(self, "weights", w)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != n:
                raise ValidationError(f"expected {n} node labels, got {len(labels)}")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_matrix(cls, matrix, labels=None, tol: float = SYMMETRY_TOL) -> "WeightedNetwork":
        a = np.asarray(matrix, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"adjacency matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("weights must be finite", code="E_NONFINITE")
        if np.any(np.abs(a - a.T) > tol):
            i, j = np.argwhere(np.abs(a - a.T) > tol)[0]
            raise ValidationError(
                f"matrix is asymmetric at ({i}, {j}): {a[i, j]!r} vs {a[j, i]!r}",
                code="E_ASYMMETRIC",
            )
        if np.any(np.abs(np.diag(a)) > tol):
            raise ValidationError("matrix has a nonzero diagonal", code="E_DIAGONAL")
        rows, cols = pair_index(a.shape[0])
        return cls(a.shape[0], a[rows, cols], labels)

    def to_matrix(self) -> np.ndarray:
        n = self.node_count
        a = np.zeros((n, n))
        rows, cols = pair_index(n)
        a[rows, cols] = self.weights
        a[cols, rows] = self.weights
        return a

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        i, j = min(i, j), max(i, j)
        n = self.node_count
        return float(self.weights[i * n - i * (i + 1) // 2 + (j - i - 1)])

    def digest(self) -> str:
        """Content hash of the weights, used to key barcode caches."""
        if self._digest is None:
            h = hashlib.sha1(self.node_count.to_bytes(8, "little"))
            h.update(self.weights.tobytes())
            object.__setattr__(self, "_digest", h.hexdigest())
        return self._digest

    def __len__(self):
        return self.node_count


def check_same_size(nets: Sequence[WeightedNetwork]) -> int:
    if len(nets) == 0:
        raise EmptyInputError("empty dataset")
    sizes = {net.node_count for net in nets}
    if len(sizes) != 1:
        raise SizeMismatchError(f"networks must share one node count, got sizes {sorted(sizes)}")
    return sizes.pop()


# ---------------------------------------------------------------- file I/O


def load_network(path, fmt: str = "dense-csv") -> WeightedNetwork:
    if fmt not in FORMATS:
        raise ParseError(f"unknown network format {fmt!r}; expected one of {FORMATS}")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", code="E_IO") from exc
    if fmt == "dense-csv":
        return _parse_dense_csv(text, path)
    return _parse_edge_list(text, path)


def _parse_dense_csv(text: str, path) -> WeightedNetwork:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ParseError(f"{path}: empty matrix")
    try:
        a = np.array([[float(x) for x in line.split(",")] for line in rows])
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParseError(f"{path}: matrix is not square")
    return WeightedNetwork.from_matrix(a)


def _parse_edge_list(text: str, path) -> WeightedNetwork:
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines or not lines[0].startswith("#nodes"):
        raise ParseError(f"{path}: edge list must start with a '#nodes <n>' header")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path}: bad header {lines[0]!r}") from exc
    if n < 1:
        raise ParseError(f"{path}: node count must be positive")
    weights = np.zeros(n_pairs(n))
    seen: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'i j weight', got {line!r}")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if i == j:
            raise ValidationError(f"{path}:{lineno}: self-loop on node {i}", code="E_DIAGONAL")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"{path}:{lineno}: node index out of range 1..{n}")
        if not math.isfinite(w):
            raise ValidationError(f"{path}:{lineno}: non-finite weight", code="E_NONFINITE")
        a, b = min(i, j) - 1, max(i, j) - 1
        if (a, b) in seen:
            if seen[(a, b)] != w:
                raise ValidationError(
                    f"{path}:{lineno}: duplicate edge ({i}, {j}) with conflicting weights",
                    code="E_DUPLICATE_EDGE",
                )
            continue
        seen[(a, b)] = w
        weights[a * n - a * (a + 1) // 2 + (b - a - 1)] = w
    return WeightedNetwork(n, weights)


def save_network(net: WeightedNetwork, path, fmt: str = "dense-csv") -> None:
    """Write ``net``; decimals use ``repr`` so a dense-csv round trip is bit-exact."""
    if fmt == "dense-csv":
        a = net.to_matrix()
        with open(path, "w") as fh:
            for row in a:
                fh.write(",".join(repr(float(x)) for x in row))
                fh.write("\n")
    elif fmt == "edge-list-tsv":
        rows, cols = pair_index(net.node_count)
        with open(path, "w") as fh:
            fh.write(f"#nodes {net.node_count}\n")
            for i, j, w in zip(rows, cols, net.weights):
                if w != 0.0:
                    fh.write(f"{i + 1}\t{j + 1}\t{float(w)!r}\n")
    else:
        raise ParseError(f"unknown network format {fmt!r}")


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[tuple[str, Optional[str]], ...]
    format: str = "dense-csv"

    def to_json(self) -> dict:
        return {
            "format": self.format,
            "entries": [
                {"path": p} if lab is None else {"path": p, "label": lab}
                for p, lab in self.entries
            ],
        }


def read_manifest(path) -> DatasetManifest:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read manifest {path}: {exc.strerror}", code="E_IO") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ParseError(f"manifest {path} must be an object with an 'entries' list")
    fmt = doc.get("format", "dense-csv")
    if fmt not in FORMATS:
        raise ParseError(f"manifest {path}: unknown format {fmt!r}")
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for e in doc["entries"]:
        if not isinstance(e, dict) or "path" not in e:
            raise ParseError(f"manifest {path}: every entry needs a 'path'")
        p = e["path"] if os.path.isabs(e["path"]) else os.path.join(base, e["path"])
        label = e.get("label")
        entries.append((p, None if label is None else str(label)))
    return DatasetManifest(tuple(entries), fmt)


def write_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w") as fh:
        json.dump(manifest.to_json(), fh, indent=2)
        fh.write("\n")


def load_dataset(manifest_path) -> tuple[list[WeightedNetwork], list[Optional[str]]]:
    manifest = read_manifest(manifest_path)
    if not manifest.entries:
        raise EmptyInputError(f"manifest {manifest_path} lists no networks: empty dataset")
    nets = [load_network(p, manifest.format) for p, _ in manifest.entries]
    check_same_size(nets)
    return nets, [lab for _, lab in manifest.entries]
