"""Face embedding clustering, open-set matching and evaluation."""

from ._facematch import (
    FacematchError,
    affinity_propagation,
    agglomerative_ward,
    emit_timeline,
    estimate_clustering,
    generate_synthetic,
    kmeans,
    match,
    match_probabilities,
    silhouette,
    similarity,
    truncate_top_alpha,
    v_measure,
)

__all__ = [
    "FacematchError",
    "affinity_propagation",
    "agglomerative_ward",
    "emit_timeline",
    "estimate_clustering",
    "generate_synthetic",
    "kmeans",
    "match",
    "match_probabilities",
    "silhouette",
    "similarity",
    "truncate_top_alpha",
    "v_measure",
]
__version__ = "0.1.0"
