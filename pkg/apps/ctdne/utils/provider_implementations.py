#!/usr/bin/env python3
"""
Provider Implementations for ctdne

Concrete embedding providers: temporal walks, static walks and snapshots.
"""

import logging
from typing import Callable, List, Optional

import numpy as np

from apps.ctdne.embedder import train
from apps.ctdne.models import BiasKind, SamplingOptions, SnapshotConfig, TemporalWalk, TrainConfig, WalkBudget
from apps.ctdne.snapshots import snapshot_embeddings
from apps.ctdne.temporal_graph import TemporalGraph
from apps.ctdne.walker import generate_walks, static_walks

logger = logging.getLogger(__name__)

BudgetFor = Callable[[int], WalkBudget]


class TemporalWalkProviderImpl:
    """
    CTDNE embeddings from F_s / F_Γ biased temporal walks.

    The walk budget is derived from the number of active nodes of the graph
    being embedded.
    """

    def __init__(
        self,
        fs: BiasKind,
        fg: BiasKind,
        budget_for: BudgetFor,
        train_cfg: TrainConfig,
        options: Optional[SamplingOptions] = None,
        threads: int = 1,
        name: Optional[str] = None,
    ):
        self.fs = BiasKind(fs)
        self.fg = BiasKind(fg)
        self._budget_for = budget_for
        self._train_cfg = train_cfg
        self._options = options or SamplingOptions()
        self._threads = threads
        self._name = name or f"ctdne-{self.fs.value}-{self.fg.value}"

    @property
    def name(self) -> str:
        return self._name

    def walks(self, graph: TemporalGraph, seed: int) -> List[TemporalWalk]:
        budget = self._budget_for(int(graph.active_nodes().shape[0]))
        return generate_walks(graph, budget, self.fs, self.fg, seed=seed, options=self._options, threads=self._threads)

    def embed(self, graph: TemporalGraph, seed: int) -> np.ndarray:
        walks = self.walks(graph, seed)
        return train(walks, self._train_cfg.with_seed(seed), labels=graph.labels).in_vectors


class StaticWalkProviderImpl:
    """Time-ignoring walk embeddings (DeepWalk-style baseline)"""

    def __init__(self, budget_for: BudgetFor, train_cfg: TrainConfig, threads: int = 1, name: str = "static"):
        self._budget_for = budget_for
        self._train_cfg = train_cfg
        self._threads = threads
        self._name = name

    @property
    def name(self) -> str:
        return self._name

    def embed(self, graph: TemporalGraph, seed: int) -> np.ndarray:
        budget = self._budget_for(int(graph.active_nodes().shape[0]))
        walks = static_walks(graph, budget, seed=seed, threads=self._threads)
        return train(walks, self._train_cfg.with_seed(seed), labels=graph.labels).in_vectors


class SnapshotProviderImpl:
    """Concatenated per-snapshot static embeddings"""

    def __init__(
        self,
        snap_cfg: SnapshotConfig,
        budget_for: BudgetFor,
        train_cfg: TrainConfig,
        threads: int = 1,
        name: str = "dtdne",
    ):
        self._snap_cfg = snap_cfg
        self._budget_for = budget_for
        self._train_cfg = train_cfg
        self._threads = threads
        self._name = name

    @property
    def name(self) -> str:
        return self._name

    def embed(self, graph: TemporalGraph, seed: int) -> np.ndarray:
        return snapshot_embeddings(
            graph, self._snap_cfg, self._budget_for, self._train_cfg, seed=seed, threads=self._threads
        )
