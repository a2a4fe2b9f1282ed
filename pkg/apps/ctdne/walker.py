#!/usr/bin/env python3
"""
Temporal random walks.

Forward walks start at an edge drawn from F_s and keep stepping to a temporal
neighbor drawn from F_Γ until none is left or the length cap is reached.
generate_walks runs them until the number of temporal context windows reaches
the budget β. Backward walks end at a freshly arrived edge and feed the online
learner. Static walks ignore time and serve as the baseline.
"""

import logging
from bisect import bisect_right
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from apps.ctdne.errors import ConfigError, DataError, EmptyGraphError, WalkGenerationError
from apps.ctdne.models import BiasKind, SamplingOptions, TemporalEdge, TemporalWalk, WalkBudget, WalkKind
from apps.ctdne.sampling import NeighborSampler, WalkStreams, build_initial_edge_cdf, initial_index_at, make_rng
from apps.ctdne.temporal_graph import AdjacencySnapshot, NeighborView, TemporalGraph
from apps.ctdne.utils.io_helper import open_text

logger = logging.getLogger(__name__)

# rng stream tags; forward walks use WalkStreams(seed) untagged
STATIC_STREAM = 1 << 40
RELAX_STREAM = 1 << 41

WALK_BATCH = 64
REJECTION_GUARD = 100


def _forward_walk(
    snap: AdjacencySnapshot,
    edge: TemporalEdge,
    t: int,
    limit: int,
    sampler: NeighborSampler,
    scale: float,
    u: Sequence[float],
) -> TemporalWalk:
    """Walk from `edge` onwards; the step adding node k + 1 consumes u[k]"""
    nodes = [edge.src, edge.dst]
    times = [t]
    current, now = edge.dst, t
    uniform = sampler.uniform
    while len(nodes) < limit:
        adjacency = snap.times[current]
        start = bisect_right(adjacency, now)
        k = len(adjacency) - start
        if k == 0:
            break
        draw = u[len(nodes) - 1]
        if uniform:
            j = start + min(int(draw * k), k - 1)
        else:
            j = start + sampler.pick(snap.view(current, start), draw, scale)
        current, now = snap.nodes[current][j], adjacency[j]
        nodes.append(current)
        times.append(now)
    return TemporalWalk(nodes=nodes, times=times, kind=WalkKind.TEMPORAL)


def temporal_walk(
    g: TemporalGraph,
    start_edge: TemporalEdge,
    t: int,
    max_len: int,
    cap: int,
    fg: BiasKind,
    rng: np.random.Generator,
    options: Optional[SamplingOptions] = None,
) -> TemporalWalk:
    """
    One forward temporal walk beginning with start_edge.

    Args:
        t: Current time, normally start_edge.time.
        max_len: L, the maximum number of nodes.
        cap: Residual budget cap; the walk holds at most min(max_len, cap) nodes.
    """
    if cap < 2:
        raise ConfigError(f"walk cap must be >= 2, got {cap}")
    if not g.has_edge(start_edge.src, start_edge.dst, start_edge.time):
        raise DataError(f"start edge {start_edge} is not in the graph")
    sampler = NeighborSampler(fg, options)
    limit = min(max_len, cap)
    u = rng.random(limit).tolist()
    return _forward_walk(g.walk_snapshot(), start_edge, t, limit, sampler, sampler.scale_for(g), u)


def _collect_walks(
    sample: Callable[[int], TemporalWalk],
    budget: WalkBudget,
    threads: int = 1,
) -> List[TemporalWalk]:
    """
    Draw walks 0, 1, 2, ... until Σ(|S| − ω + 1) reaches β.

    Walk i is sampled up to L from its own rng stream and then cut to the
    residual cap ω + β − C − 1, which yields the same walk as sampling with that
    cap directly. Output does not depend on `threads`.
    """
    kept: List[TemporalWalk] = []
    windows = 0
    streak = 0
    rejected = 0
    index = 0
    guard = REJECTION_GUARD * budget.beta
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while windows < budget.beta:
            if executor is not None:
                batch = list(executor.map(sample, range(index, index + WALK_BATCH * threads)))
            else:
                batch = [sample(index)]
            for walk in batch:
                index += 1
                cap = min(budget.max_len, budget.omega + budget.beta - windows - 1)
                walk = walk.truncated(cap)
                if len(walk) >= budget.omega:
                    kept.append(walk)
                    windows += len(walk) - budget.omega + 1
                    streak = 0
                    if windows >= budget.beta:
                        break
                else:
                    streak += 1
                    rejected += 1
                    if streak >= guard:
                        raise WalkGenerationError(
                            f"{streak} consecutive walks were shorter than omega={budget.omega}; "
                            f"the graph cannot supply beta={budget.beta} context windows"
                        )
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    logger.info(f"Kept {len(kept)} walks ({windows} context windows, beta={budget.beta}), rejected {rejected}")
    return kept


def relaxed_walks(
    g: TemporalGraph,
    walks: Sequence[TemporalWalk],
    length: int,
    seed: int,
) -> List[TemporalWalk]:
    """
    One fallback walk for every node with edges that no walk visits.

    These follow adjacency in either direction and may go back in time.
    """
    seen = set()
    for walk in walks:
        seen.update(walk.nodes)
    extra: List[TemporalWalk] = []
    for v in range(g.n_nodes):
        if v in seen:
            continue
        if len(g.incident(v)) == 0:
            continue
        rng = make_rng(seed, RELAX_STREAM, v)
        nodes, times = [v], []
        current = v
        while len(nodes) < length:
            view = g.incident(current)
            if len(view) == 0:
                break
            j = int(rng.integers(len(view)))
            current = int(view.nodes[j])
            nodes.append(current)
            times.append(int(view.times[j]))
        if len(nodes) >= 2:
            extra.append(TemporalWalk(nodes=nodes, times=times, kind=WalkKind.RELAXED))
    if extra:
        logger.info(f"Added {len(extra)} relaxed walks for nodes missed by the walk corpus")
    return extra


def generate_walks(
    g: TemporalGraph,
    budget: WalkBudget,
    fs: BiasKind = BiasKind.UNIFORM,
    fg: BiasKind = BiasKind.UNIFORM,
    seed: int = 0,
    options: Optional[SamplingOptions] = None,
    threads: int = 1,
) -> List[TemporalWalk]:
    """
    Temporal walk corpus meeting the context window budget.

    Walks shorter than ω are rejected. With budget.relax, nodes left out of
    every kept walk receive one relaxed walk of length ω.
    """
    if g.n_edges == 0:
        raise EmptyGraphError("cannot generate walks on a graph without edges")
    options = options or SamplingOptions()
    cdf = build_initial_edge_cdf(g, fs, scale=options.exp_scale)
    sampler = NeighborSampler(fg, options)
    scale = sampler.scale_for(g)
    snap = g.walk_snapshot()
    streams = WalkStreams(seed)

    def sample(i: int) -> TemporalWalk:
        u = streams.uniforms(i, budget.max_len).tolist()
        e = initial_index_at(cdf, u[0])
        edge = TemporalEdge(snap.src[e], snap.dst[e], snap.edge_times[e])
        return _forward_walk(snap, edge, edge.time, budget.max_len, sampler, scale, u)

    walks = _collect_walks(sample, budget, threads)
    if budget.relax:
        walks.extend(relaxed_walks(g, walks, budget.omega, seed))
    return walks


def static_walks(
    g: TemporalGraph,
    budget: WalkBudget,
    seed: int = 0,
    threads: int = 1,
) -> List[TemporalWalk]:
    """Time-ignoring walks: uniform start edge, uniform next neighbor, same β accounting"""
    if g.n_edges == 0:
        raise EmptyGraphError("cannot generate walks on a graph without edges")
    m = g.n_edges
    snap = g.walk_snapshot()
    streams = WalkStreams(seed, STATIC_STREAM)

    def sample(i: int) -> TemporalWalk:
        u = streams.uniforms(i, budget.max_len).tolist()
        e = min(int(u[0] * m), m - 1)
        nodes = [snap.src[e], snap.dst[e]]
        times = [snap.edge_times[e]]
        current = snap.dst[e]
        while len(nodes) < budget.max_len:
            k = len(snap.nodes[current])
            if k == 0:
                break
            j = min(int(u[len(nodes) - 1] * k), k - 1)
            times.append(snap.times[current][j])
            current = snap.nodes[current][j]
            nodes.append(current)
        return TemporalWalk(nodes=nodes, times=times, kind=WalkKind.STATIC)

    walks = _collect_walks(sample, budget, threads)
    if budget.relax:
        walks.extend(relaxed_walks(g, walks, budget.omega, seed))
    return walks


def backward_walks_for_edge(
    g: TemporalGraph,
    e: TemporalEdge,
    count: int,
    omega: int,
    max_len: int,
    fg: BiasKind,
    rng: np.random.Generator,
    options: Optional[SamplingOptions] = None,
) -> List[TemporalWalk]:
    """
    Walks ending with the new edge (e.src, e.dst, e.time), in forward orientation.

    Each walk grows backwards from e.src through predecessors reached strictly
    earlier than the current time. F_Γ is applied with the time axis mirrored,
    so "early" means close to the current time. Short walks are kept; omega is
    accepted for signature symmetry only.
    """
    if not g.has_edge(e.src, e.dst, e.time):
        raise DataError(f"edge {e} is not in the graph")
    sampler = NeighborSampler(fg, options)
    scale = sampler.scale_for(g)
    walks: List[TemporalWalk] = []
    for _ in range(count):
        rev_nodes = [e.dst, e.src]
        rev_times = [e.time]
        current, now = e.src, e.time
        while len(rev_nodes) < max_len:
            preds = g.predecessors(current, now)
            if len(preds) == 0:
                break
            latest_first = preds.reversed()
            mirrored = NeighborView(latest_first.nodes, -latest_first.times)
            i = sampler.choose(mirrored, rng, scale)
            current, now = int(latest_first.nodes[i]), int(latest_first.times[i])
            rev_nodes.append(current)
            rev_times.append(now)
        walks.append(TemporalWalk(nodes=rev_nodes[::-1], times=rev_times[::-1], kind=WalkKind.TEMPORAL))
    return walks


@dataclass
class WalkStats:
    """Walk length histogram plus per-node occurrence and start counts"""
    length_histogram: Dict[int, int] = field(default_factory=dict)
    occurrences: Dict[int, int] = field(default_factory=dict)
    starts: Dict[int, int] = field(default_factory=dict)

    def tables(self, labels: Optional[Sequence[str]] = None) -> Dict[str, pd.DataFrame]:
        """CSV-ready tables keyed by name (length, occurrences, starts)"""
        def name(v: int):
            return labels[v] if labels is not None else v

        lengths = sorted(self.length_histogram.items())
        occ = sorted(self.occurrences.items())
        starts = sorted(self.starts.items())
        return {
            "length": pd.DataFrame(lengths, columns=["length", "count"]),
            "occurrences": pd.DataFrame([(name(v), c) for v, c in occ], columns=["node", "occurrences"]),
            "starts": pd.DataFrame([(name(v), c) for v, c in starts], columns=["node", "starts"]),
        }


def walk_stats(walks: Sequence[TemporalWalk]) -> WalkStats:
    """Exact counts over a walk corpus"""
    if not walks:
        raise DataError("walk statistics need at least one walk")
    lengths: Counter = Counter()
    occurrences: Counter = Counter()
    starts: Counter = Counter()
    for walk in walks:
        lengths[len(walk)] += 1
        occurrences.update(walk.nodes)
        starts[walk.nodes[0]] += 1
    return WalkStats(length_histogram=dict(lengths), occurrences=dict(occurrences), starts=dict(starts))


def write_walks(walks: Iterable[TemporalWalk], path: Union[str, Path], labels: Sequence[str]) -> int:
    """One walk per line, space-separated node labels; returns the number written"""
    written = 0
    with open_text(path, "w") as f:
        for walk in walks:
            f.write(" ".join(labels[v] for v in walk.nodes))
            f.write("\n")
            written += 1
    return written
