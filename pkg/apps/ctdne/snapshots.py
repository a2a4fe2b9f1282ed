#!/usr/bin/env python3
"""
Discrete snapshot embeddings.

The training span is cut into T snapshots. Each snapshot becomes a static graph
embedded with static walks at dimension D/T, and the T blocks are concatenated
into one D-dimensional embedding per node.
"""

import logging
from typing import Callable, List, Tuple

import numpy as np

from apps.ctdne.embedder import train
from apps.ctdne.errors import EmptyGraphError, InvariantViolation
from apps.ctdne.models import InactivePolicy, SnapshotConfig, SnapshotMode, TrainConfig, WalkBudget
from apps.ctdne.temporal_graph import TemporalGraph
from apps.ctdne.walker import static_walks

logger = logging.getLogger(__name__)

BudgetFor = Callable[[int], WalkBudget]


def snapshot_seed(seed: int, snapshot: int) -> int:
    """Independent per-snapshot seed derived from (seed, snapshot)"""
    return int(np.random.SeedSequence([int(seed), int(snapshot)]).generate_state(1)[0])


def snapshot_boundaries(g: TemporalGraph, n_snapshots: int, mode: SnapshotMode) -> List[Tuple[int, int]]:
    """
    Half-open edge-index ranges, one per snapshot.

    equal-time: T equal-width time intervals over [t_min, t_max]; the last one
    is closed on the right. equal-count: T runs of ⌊M/T⌋ or ⌈M/T⌉ edges.
    """
    m = g.n_edges
    if m == 0:
        raise EmptyGraphError("cannot cut snapshots from a graph without edges")
    if SnapshotMode(mode) is SnapshotMode.EQUAL_COUNT:
        cuts = [(k * m) // n_snapshots for k in range(n_snapshots + 1)]
    else:
        t_min, t_max = g.t_min, g.t_max
        width = (t_max - t_min) / n_snapshots
        inner = [g.index_at_time(t_min + k * width, side="left") for k in range(1, n_snapshots)]
        if t_max == t_min:
            inner = [0] * (n_snapshots - 1)
        cuts = [0] + inner + [m]
    return [(cuts[k], cuts[k + 1]) for k in range(n_snapshots)]


def _fill_inactive(block: np.ndarray, active: np.ndarray, previous: np.ndarray, policy: InactivePolicy) -> None:
    inactive = np.ones(block.shape[0], dtype=bool)
    inactive[active] = False
    if policy is InactivePolicy.ZEROS or active.shape[0] == 0 and policy is InactivePolicy.MEAN_ACTIVE:
        block[inactive] = 0.0
    elif policy is InactivePolicy.LAST_ACTIVE:
        block[inactive] = previous[inactive]
    else:
        block[inactive] = block[active].mean(axis=0)


def snapshot_embeddings(
    g: TemporalGraph,
    snap_cfg: SnapshotConfig,
    budget_for: BudgetFor,
    train_cfg: TrainConfig,
    seed: int = 0,
    threads: int = 1,
) -> np.ndarray:
    """
    Concatenated (N, D) snapshot embedding for g's node id space.

    budget_for maps the number of active nodes in a snapshot to its walk
    budget. A snapshot without edges contributes only inactive-policy rows.
    """
    n, d = g.n_nodes, snap_cfg.per_snapshot_dim
    blocks: List[np.ndarray] = []
    previous = np.zeros((n, d))
    for k, (start, stop) in enumerate(snapshot_boundaries(g, snap_cfg.n_snapshots, snap_cfg.mode)):
        block = np.zeros((n, d))
        if stop <= start:
            logger.warning(f"Snapshot {k + 1}/{snap_cfg.n_snapshots} has no edges")
            active = np.zeros(0, dtype=np.int64)
        else:
            sub = g.edge_slice(start, stop)
            active = sub.active_nodes()
            k_seed = snapshot_seed(seed, k)
            walks = static_walks(sub, budget_for(int(active.shape[0])), seed=k_seed, threads=threads)
            z = train(walks, train_cfg.with_dimension(d).with_seed(k_seed), labels=sub.labels)
            block[:] = z.in_vectors
            logger.debug(f"Snapshot {k + 1}: {stop - start} edges, {active.shape[0]} active nodes")
        _fill_inactive(block, active, previous, InactivePolicy(snap_cfg.inactive_policy))
        blocks.append(block)
        previous = block
    embedding = np.hstack(blocks)
    if embedding.shape != (n, snap_cfg.dimension):
        raise InvariantViolation(f"snapshot embedding has shape {embedding.shape}, expected {(n, snap_cfg.dimension)}")
    return embedding
