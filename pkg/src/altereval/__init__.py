"""Evaluation workbench for conversational recommenders with alternative items."""

from .catalog import Catalog, cosine_similarity, load_catalog, nearest_neighbors
from .judgments import JudgmentSet, cohens_kappa, dataset_stats, load_qrels, relevant_set
from .pooling import (
    PowerSpec,
    build_pool,
    cohen_d_to_probability,
    correlation_to_cohens_d,
    required_sample_size,
    stratified_sample,
)

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "JudgmentSet",
    "PowerSpec",
    "build_pool",
    "cohen_d_to_probability",
    "cohens_kappa",
    "correlation_to_cohens_d",
    "cosine_similarity",
    "dataset_stats",
    "load_catalog",
    "load_qrels",
    "nearest_neighbors",
    "relevant_set",
    "required_sample_size",
    "stratified_sample",
    "__version__",
]
