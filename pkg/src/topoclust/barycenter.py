"""Cluster representatives: topological centroid, sample mean, topological interpolation."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import EmptyInputError, SizeMismatchError, ValidationError
from .filtration import Barcode, decompose_edges
from .metric import check_lambda, d_top_sq
from .network import WeightedNetwork, check_same_size

log = logging.getLogger(__name__)

# A full network when lambda < 1, a bare barcode when lambda == 1.
Representative = Union[WeightedNetwork, Barcode]

MAX_HALVINGS = 30


@dataclass(frozen=True)
class InterpolationConfig:
    step_size: float = 0.05
    max_iters: int = 200
    rel_tol: float = 1e-8

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValidationError(f"step_size must be positive, got {self.step_size}")
        if not (isinstance(self.max_iters, int) and self.max_iters > 0):
            raise ValidationError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not 0 < self.rel_tol < 1:
            raise ValidationError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")


def topological_centroid(barcodes: Sequence[Barcode]) -> Barcode:
    """Rank-wise mean of sorted births and of sorted deaths.

    This minimizes the summed squared topological distance to ``barcodes``.
    """
    if len(barcodes) == 0:
        raise EmptyInputError("topological centroid of an empty set")
    n = barcodes[0].node_count
    if any(bc.node_count != n for bc in barcodes):
        raise SizeMismatchError("barcodes come from networks of different sizes")
    births = np.mean([bc.births for bc in barcodes], axis=0)
    deaths = np.mean([bc.deaths for bc in barcodes], axis=0)
    # rounding is monotone, so rank-wise means of sorted rows stay sorted
    return Barcode(n, births, deaths)


def sample_mean(nets: Sequence[WeightedNetwork]) -> WeightedNetwork:
    n = check_same_size(nets)
    return WeightedNetwork(n, np.mean([net.weights for net in nets], axis=0))


def _grad_from(weights: np.ndarray, dec, target: Barcode) -> np.ndarray:
    grad = np.zeros_like(weights)
    grad[dec.birth_edges] = 2.0 * (weights[dec.birth_edges] - target.births)
    grad[dec.death_edges] = 2.0 * (weights[dec.death_edges] - target.deaths)
    return grad


def grad_dtop_sq(h: WeightedNetwork, target: Barcode) -> np.ndarray:
    """Gradient of d_top(decompose(h), target)**2 w.r.t. the upper-triangular weights of h.

    Each edge moves exactly one barcode value (a birth if it is a spanning-tree
    edge, a death otherwise), and that value is matched by rank to ``target``.
    At tied weights this is the gradient of the tie-broken matching.
    """
    if h.node_count != target.node_count:
        raise SizeMismatchError(
            f"network has {h.node_count} nodes, target barcode {target.node_count}"
        )
    return _grad_from(h.weights, decompose_edges(h), target)


@dataclass(frozen=True)
class InterpolationResult:
    network: WeightedNetwork
    objective: float
    iterations: int
    # True when 30 step halvings failed to find a descent step
    stalled: bool = False


def interpolation_objective(h: WeightedNetwork, mean_net: WeightedNetwork,
                            top_centroid: Barcode, lam: float) -> float:
    diff = h.weights - mean_net.weights
    bc = decompose_edges(h).barcode
    return (1.0 - lam) * float(diff @ diff) + lam * d_top_sq(bc, top_centroid)


def interpolate(
    mean_net: WeightedNetwork,
    top_centroid: Barcode,
    lam: float,
    cfg: Optional[InterpolationConfig] = None,
    init: Optional[WeightedNetwork] = None,
) -> InterpolationResult:
    """Gradient descent for a network near ``mean_net`` whose barcode is near ``top_centroid``.

    Minimizes ``(1-lam) * d_geo_sq(H, mean_net) + lam * d_top(H, top_centroid)**2``
    starting from ``init`` (default ``mean_net``). A step that would raise the
    objective is halved and retried, so the objective never increases.
    """
    lam = check_lambda(lam)
    if not 0.0 < lam < 1.0:
        raise ValidationError(f"interpolation needs 0 < lambda < 1, got {lam}", code="E_LAMBDA")
    cfg = cfg or InterpolationConfig()
    init = mean_net if init is None else init
    n = mean_net.node_count
    if top_centroid.node_count != n or init.node_count != n:
        raise SizeMismatchError("mean network, centroid and init must share a node count")

    target = mean_net.weights

    def evaluate(x):
        dec = decompose_edges(WeightedNetwork(n, x))
        diff = x - target
        f = (1.0 - lam) * float(diff @ diff) + lam * d_top_sq(dec.barcode, top_centroid)
        return f, dec

    x = np.array(init.weights)
    f, dec = evaluate(x)
    step = cfg.step_size
    iterations = 0
    stalled = False
    for iterations in range(1, cfg.max_iters + 1):
        grad = 2.0 * (1.0 - lam) * (x - target) + lam * _grad_from(x, dec, top_centroid)
        if not np.any(grad):
            iterations -= 1
            break
        for _ in range(MAX_HALVINGS + 1):
            x_new = x - step * grad
            f_new, dec_new = evaluate(x_new)
            if f_new <= f:
                break
            step *= 0.5
        else:
            stalled = True
            log.debug("interpolation stalled after %d halvings at iteration %d",
                      MAX_HALVINGS, iterations)
            break
        decrease = (f - f_new) / f if f > 0 else 0.0
        x, f, dec = x_new, f_new, dec_new
        if decrease < cfg.rel_tol:
            break
    return InterpolationResult(WeightedNetwork(n, x), f, iterations, stalled)
