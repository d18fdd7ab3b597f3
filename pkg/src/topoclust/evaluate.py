"""Clustering evaluation: purity, label-permutation test, adjusted Rand index, confusion."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInputError, ValidationError
from .metric import worker_count

DEFAULT_PERMS = 100_000
PERM_BATCH = 5_000


def _codes(values) -> tuple[np.ndarray, np.ndarray]:
    uniq, inv = np.unique(np.asarray(values), return_inverse=True)
    return uniq, inv.reshape(-1).astype(np.int64)


def _check_pair(a, b, min_len=1):
    if len(a) != len(b):
        raise ValidationError(f"length mismatch: {len(a)} assignments vs {len(b)} labels",
                              code="E_LENGTH")
    if len(a) < min_len:
        raise EmptyInputError(f"need at least {min_len} items, got {len(a)}")


def contingency(assignments, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts ``n[i, j] = |C_i & L_j|`` with sorted cluster ids and label values."""
    _check_pair(assignments, labels)
    cids, a = _codes(assignments)
    lids, b = _codes(labels)
    table = np.zeros((cids.size, lids.size), dtype=np.int64)
    np.add.at(table, (a, b), 1)
    return table, cids, lids


def purity(assignments, labels) -> float:
    """Fraction of items carrying the majority label of their cluster."""
    table, _, _ = contingency(assignments, labels)
    return float(table.max(axis=1).sum() / table.sum())


def _majority_hits(clusters: np.ndarray, label_rows: np.ndarray, k: int, n_labels: int) -> np.ndarray:
    """Integer purity numerator for each row of ``label_rows`` (shape B x N)."""
    batch = label_rows.shape[0]
    cells = k * n_labels
    idx = np.arange(batch)[:, None] * cells + clusters[None, :] * n_labels + label_rows
    table = np.bincount(idx.ravel(), minlength=batch * cells).reshape(batch, k, n_labels)
    return table.max(axis=2).sum(axis=1)


def permutation_test(assignments, labels, n_perms: int = DEFAULT_PERMS, seed: int = 0,
                     smoothed: bool = False, workers: Optional[int] = None) -> float:
    """p-value of the observed purity against label shuffles.

    Counts shuffles whose purity is strictly greater than the observed one.
    ``smoothed=True`` returns ``(count + 1) / (n_perms + 1)`` instead of
    ``count / n_perms``. Shuffles run in fixed batches, each with its own child
    seed, so the result does not depend on the worker count.
    """
    _check_pair(assignments, labels)
    if n_perms < 1:
        raise ValidationError(f"n_perms must be positive, got {n_perms}")
    _, a = _codes(assignments)
    _, b = _codes(labels)
    k, n_labels = int(a.max()) + 1, int(b.max()) + 1
    observed = _majority_hits(a, b[None, :], k, n_labels)[0]

    sizes = [PERM_BATCH] * (n_perms // PERM_BATCH)
    if n_perms % PERM_BATCH:
        sizes.append(n_perms % PERM_BATCH)
    children = np.random.SeedSequence(int(seed)).spawn(len(sizes))

    def batch(job):
        size, child = job
        rng = np.random.default_rng(child)
        shuffled = rng.permuted(np.broadcast_to(b, (size, b.size)), axis=1)
        return int(np.count_nonzero(_majority_hits(a, shuffled, k, n_labels) > observed))

    jobs = list(zip(sizes, children))
    nworkers = worker_count(workers)
    if nworkers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(nworkers) as pool:
            exceed = sum(pool.map(batch, jobs))
    else:
        exceed = sum(batch(job) for job in jobs)
    if smoothed:
        return (exceed + 1) / (n_perms + 1)
    return exceed / n_perms


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie adjusted Rand index; 0.0 when both partitions are trivial."""
    _check_pair(a, b, min_len=2)
    table, _, _ = contingency(a, b)
    n = int(table.sum())
    index = int(_comb2(table).sum())
    sum_a = int(_comb2(table.sum(axis=1)).sum())
    sum_b = int(_comb2(table.sum(axis=0)).sum())
    expected = sum_a * sum_b / _comb2(n)
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        return 0.0
    return float((index - expected) / (max_index - expected))


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray
    clusters: tuple
    labels: tuple
    # majority label of each cluster (ties go to the first label in sorted order)
    majority: tuple

    def by_majority(self) -> np.ndarray:
        """Rows reordered by the position of each cluster's majority label."""
        order = np.argsort([self.labels.index(m) for m in self.majority], kind="stable")
        return self.counts[order]

    def to_json(self) -> dict:
        return {
            "clusters": [int(c) if isinstance(c, (int, np.integer)) else str(c) for c in self.clusters],
            "labels": [str(lab) for lab in self.labels],
            "counts": self.counts.tolist(),
            "majority": [str(m) for m in self.majority],
        }


def confusion_matrix(assignments, labels) -> ConfusionMatrix:
    table, cids, lids = contingency(assignments, labels)
    clusters = tuple(c.item() for c in cids)
    label_vals = tuple(lab.item() if hasattr(lab, "item") else lab for lab in lids)
    majority = tuple(label_vals[j] for j in table.argmax(axis=1))
    return ConfusionMatrix(table, clusters, label_vals, majority)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    ari: float
    confusion: ConfusionMatrix
    p_value: Optional[float] = None
    n_permutations: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "ari": self.ari,
            "p_value": self.p_value,
            "n_permutations": self.n_permutations,
            "confusion": self.confusion.to_json(),
        }


def evaluate(assignments: Sequence, labels: Sequence, n_perms: Optional[int] = DEFAULT_PERMS,
             seed: int = 0, smoothed: bool = False, workers: Optional[int] = None) -> EvalReport:
    """Purity, ARI, confusion and (unless ``n_perms`` is None) the permutation p-value."""
    acc = purity(assignments, labels)
    ari = adjusted_rand_index(assignments, labels) if len(labels) >= 2 else 0.0
    p = None
    if n_perms:
        p = permutation_test(assignments, labels, n_perms, seed, smoothed, workers)
    return EvalReport(acc, ari, confusion_matrix(assignments, labels), p,
                      n_perms if n_perms else None)
