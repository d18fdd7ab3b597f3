"""Topological clustering of same-size weighted networks."""

__version__ = "0.1.0"

from .barycenter import (
    InterpolationConfig,
    InterpolationResult,
    grad_dtop_sq,
    interpolate,
    sample_mean,
    topological_centroid,
)
from .cluster import ClusterConfig, Clustering, cluster, objective
from .errors import TopoclustError
from .evaluate import (
    EvalReport,
    adjusted_rand_index,
    confusion_matrix,
    evaluate,
    permutation_test,
    purity,
)
from .filtration import Barcode, BettiCurve, betti_at, betti_curve, decompose, decompose_edges
from .metric import d_geo_sq, d_net_sq, d_top, d_top_sq, distance_matrix
from .network import WeightedNetwork, load_dataset, load_network, save_network
from .simulate import ModularConfig, simulate_groups, simulate_modular
