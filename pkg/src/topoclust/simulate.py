"""Random modular networks.

Nodes are split into ``m`` contiguous modules. A within-module pair draws its
weight from N(mu, sigma^2) with probability ``r`` and from N(0, sigma^2)
otherwise; a between-module pair uses probability ``1 - r`` for N(mu, sigma^2).
Negative weights are clamped to zero afterwards.

Randomness comes from a Philox4x32 counter-based generator keyed by the seed.
Pair ``p`` (in upper-triangular order) always consumes element ``p`` of a
uniform stream (the Bernoulli draw) and element ``p`` of a standard-normal
stream (numpy's ziggurat sampler), so a network depends only on its seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInputError, SizeMismatchError, ValidationError
from .network import WeightedNetwork, pair_index


@dataclass(frozen=True)
class ModularConfig:
    node_count: int
    modules: int
    within_prob: float
    mu: float = 1.0
    sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.node_count < 2:
            raise ValidationError(f"node_count must be at least 2, got {self.node_count}")
        if not 1 <= self.modules <= self.node_count:
            raise ValidationError(
                f"modules must lie in 1..{self.node_count}, got {self.modules}"
            )
        if not 0.0 <= self.within_prob <= 1.0:
            raise ValidationError(f"within_prob must lie in [0, 1], got {self.within_prob}")
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def module_of(node_count: int, modules: int) -> np.ndarray:
    """Module index per node; the first ``node_count % modules`` modules get one extra node."""
    base, extra = divmod(node_count, modules)
    sizes = [base + 1 if h < extra else base for h in range(modules)]
    return np.repeat(np.arange(modules), sizes)


def _generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def simulate_modular(cfg: ModularConfig, return_draws: bool = False):
    """One random modular network.

    With ``return_draws=True`` also returns the per-pair Bernoulli outcome
    (True where the pair drew from N(mu, sigma^2)) and the same-module mask.
    """
    n = cfg.node_count
    rows, cols = pair_index(n)
    module = module_of(n, cfg.modules)
    same = module[rows] == module[cols]
    rng = _generator(int(cfg.seed))
    uniforms = rng.random(rows.size)
    normals = rng.standard_normal(rows.size)
    prob = np.where(same, cfg.within_prob, 1.0 - cfg.within_prob)
    signal = uniforms < prob
    weights = np.where(signal, cfg.mu, 0.0) + cfg.sigma * normals
    weights = np.maximum(weights, 0.0)
    net = WeightedNetwork(n, weights)
    if return_draws:
        return net, signal, same
    return net


def network_seed(group_seed: int, index: int) -> int:
    """Seed for the ``index``-th network of a group."""
    state = np.random.SeedSequence([int(group_seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0])


def simulate_groups(groups: Sequence[tuple[int, ModularConfig]], label_prefix: str = "L"):
    """Networks for each ``(count, config)`` group, labelled ``L1``, ``L2``, ..."""
    if len(groups) == 0:
        raise EmptyInputError("no groups to simulate")
    sizes = {cfg.node_count for _, cfg in groups}
    if len(sizes) != 1:
        raise SizeMismatchError(f"groups must share one node count, got {sorted(sizes)}")
    nets, labels = [], []
    for g, (count, cfg) in enumerate(groups, start=1):
        if count < 1:
            raise ValidationError(f"group {g} has non-positive count {count}")
        for i in range(count):
            seeded = ModularConfig(cfg.node_count, cfg.modules, cfg.within_prob,
                                   cfg.mu, cfg.sigma, network_seed(cfg.seed, i))
            nets.append(simulate_modular(seeded))
            labels.append(f"{label_prefix}{g}")
    return nets, labels


def modular_groups(node_count: int, groups: Sequence[tuple[int, int]], within_prob: float,
                   seed: int, mu: float = 1.0, sigma: float = 0.5):
    """``(count, config)`` pairs from ``(modules, count)`` pairs sharing ``r``, ``mu``, ``sigma``.

    Each group gets its own seed derived from ``seed`` and the group position.
    """
    return [
        (count, ModularConfig(node_count, m, within_prob, mu, sigma, network_seed(seed, 10_000 + g)))
        for g, (m, count) in enumerate(groups)
    ]
