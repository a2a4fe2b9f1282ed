#!/usr/bin/env python3
"""
Provider Interfaces for ctdne

Defines the embedding provider protocol the evaluation harness is written against.
"""

from typing import Protocol

import numpy as np

from apps.ctdne.temporal_graph import TemporalGraph


class EmbeddingProvider(Protocol):
    """
    Protocol for node embedding providers.

    Turns a training graph into one embedding row per node id of that graph.
    """

    @property
    def name(self) -> str:
        """Variant name reported in results"""
        ...

    def embed(self, graph: TemporalGraph, seed: int) -> np.ndarray:
        """(graph.n_nodes, D) embedding matrix for the given seed"""
        ...
