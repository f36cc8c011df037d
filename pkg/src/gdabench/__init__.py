"""Benchmark toolkit for gene-disease association prediction.

Compares two families of predictors over ontology-backed knowledge graphs
under one rank-based protocol: link prediction with embedding scoring
functions, and node-pair classification over aggregated walk embeddings.
"""

__version__ = "0.1.0"

from .evaluate import Direction, EvalReport, case_study, extract_ranks, hits_at_k, unify_clf, unify_lp
from .kg import EntityKind, KnowledgeGraph, Triple, Vocabulary, assemble_kg, export_numeric
from .pairs import AggregationOp, ClassifierKind, aggregate
from .split import GdaPair, SplitDataset, generate_negatives, split_pairs

__all__ = [
    "__version__",
    "Direction",
    "EvalReport",
    "case_study",
    "extract_ranks",
    "hits_at_k",
    "unify_clf",
    "unify_lp",
    "EntityKind",
    "KnowledgeGraph",
    "Triple",
    "Vocabulary",
    "assemble_kg",
    "export_numeric",
    "AggregationOp",
    "ClassifierKind",
    "aggregate",
    "GdaPair",
    "SplitDataset",
    "generate_negatives",
    "split_pairs",
]
