"""Reaction knowledge graph with path-based product prediction."""

from ._backend import BACKEND
from .kgraph import KnowledgeGraph, ingest, load, save
from .reasoner import Path, SearchParams, find_paths
from .transform import enumerate_all_merges, predict_conditions, predict_products

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "KnowledgeGraph", "Path", "SearchParams", "enumerate_all_merges", "find_paths",
    "ingest", "load", "predict_conditions", "predict_products", "save",
]
