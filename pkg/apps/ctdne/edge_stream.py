#!/usr/bin/env python3
"""
Edge stream consumer - replays timestamped edges and keeps embeddings current.

For every arriving edge: insert it into the graph, sample walks that end with
it, and apply an online skip-gram update. Per-edge wall time is measured with
a monotonic clock around those three steps only.
"""

import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from apps.ctdne.embedder import EmbeddingMatrix, online_update, train
from apps.ctdne.models import BiasKind, RunConfig, SamplingOptions, TemporalEdge, TemporalWalk, TrainConfig
from apps.ctdne.sampling import make_rng
from apps.ctdne.temporal_graph import EdgeRecord, TemporalGraph
from apps.ctdne.walker import backward_walks_for_edge, generate_walks

logger = logging.getLogger(__name__)

STREAM_TAG = 1 << 47
PROGRESS_EVERY = 1000


@dataclass
class LatencyReport:
    """Per-edge update latency summary in milliseconds (None when no edges streamed)"""
    count: int
    mean_ms: Optional[float] = None
    median_ms: Optional[float] = None
    p99_ms: Optional[float] = None
    max_ms: Optional[float] = None

    @classmethod
    def from_seconds(cls, samples: Sequence[float]) -> "LatencyReport":
        if len(samples) == 0:
            return cls(count=0)
        ms = np.asarray(samples, dtype=np.float64) * 1000.0
        return cls(
            count=int(ms.shape[0]),
            mean_ms=float(ms.mean()),
            median_ms=float(np.median(ms)),
            p99_ms=float(np.percentile(ms, 99)),
            max_ms=float(ms.max()),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return {
            "count": self.count,
            "mean_ms": self.mean_ms,
            "median_ms": self.median_ms,
            "p99_ms": self.p99_ms,
            "max_ms": self.max_ms,
        }


class OnlineEmbeddingConsumer:
    """
    Consumes an edge stream and updates embeddings incrementally.

    With batch_edges > 1, edges are inserted on arrival but walk sampling and
    the online update are deferred until the batch is full (or flush() is
    called); each edge of the batch is charged the amortized batch time.
    """

    def __init__(
        self,
        graph: TemporalGraph,
        embeddings: EmbeddingMatrix,
        train_cfg: TrainConfig,
        walks_per_edge: int = 10,
        omega: int = 10,
        max_len: int = 80,
        fg: BiasKind = BiasKind.UNIFORM,
        options: Optional[SamplingOptions] = None,
        batch_edges: int = 1,
        seed: int = 0,
    ):
        """
        Initialize stream consumer.

        Args:
            graph: Graph receiving the streamed edges (may be empty).
            embeddings: Matrix updated in place; grows with the graph.
            walks_per_edge: Backward walks sampled per new edge.
        """
        self.graph = graph
        self.embeddings = embeddings
        self.train_cfg = train_cfg
        self.walks_per_edge = walks_per_edge
        self.omega = omega
        self.max_len = max_len
        self.fg = BiasKind(fg)
        self.options = options or SamplingOptions()
        self.batch_edges = max(batch_edges, 1)
        self.seed = seed
        self.processed = 0
        self.latencies: List[float] = []
        self.running = False
        self._pending: List[TemporalEdge] = []
        self._pending_elapsed = 0.0

    def _walks_for(self, edge: TemporalEdge, index: int) -> List[TemporalWalk]:
        rng = make_rng(self.seed, STREAM_TAG, index)
        return backward_walks_for_edge(
            self.graph, edge, self.walks_per_edge, self.omega, self.max_len, self.fg, rng, self.options
        )

    def _update(self, walks: List[TemporalWalk]) -> None:
        if self.graph.n_nodes > self.embeddings.n_nodes:
            self.embeddings.grow(self.graph.labels)
        online_update(self.embeddings, walks, self.train_cfg)

    def process_edge(self, src: object, dst: object, t: int) -> None:
        """Insert one edge and, once the batch is full, update embeddings"""
        start = time.perf_counter()
        edge = self.graph.add_edge(src, dst, t)
        self._pending.append(edge)
        self._pending_elapsed += time.perf_counter() - start
        if len(self._pending) >= self.batch_edges:
            self.flush()

    def flush(self) -> None:
        """Sample walks for buffered edges and apply one online update"""
        if not self._pending:
            return
        start = time.perf_counter()
        first = self.processed
        walks: List[TemporalWalk] = []
        for offset, edge in enumerate(self._pending):
            walks.extend(self._walks_for(edge, first + offset))
        self._update(walks)
        elapsed = self._pending_elapsed + time.perf_counter() - start

        size = len(self._pending)
        self.latencies.extend([elapsed / size] * size)
        self.processed += size
        self._pending = []
        self._pending_elapsed = 0.0
        if self.processed // PROGRESS_EVERY != (self.processed - size) // PROGRESS_EVERY:
            logger.info(f"Streamed {self.processed} edges (N={self.graph.n_nodes})")

    def consume(self, records: Iterable[Tuple[object, object, int]]) -> LatencyReport:
        """Process every record in order, then flush the final partial batch"""
        self.running = True
        for src, dst, t in records:
            if not self.running:
                logger.warning("Stream consumer stopped before the end of the stream")
                break
            self.process_edge(src, dst, t)
        self.flush()
        self.running = False
        return self.report()

    def stop(self) -> None:
        """Stop consuming after the current edge"""
        self.running = False

    def report(self) -> LatencyReport:
        return LatencyReport.from_seconds(self.latencies)


def warm_start(
    records: Sequence[EdgeRecord],
    cfg: RunConfig,
) -> Tuple[TemporalGraph, EmbeddingMatrix]:
    """Bulk-load and batch-train on records (empty records give an empty graph and matrix)"""
    train_cfg = cfg.train_config()
    if not records:
        graph = TemporalGraph.empty(directed=cfg.directed, unit_scale=cfg.unit_scale)
        return graph, EmbeddingMatrix.initialize([], train_cfg.dimension, seed=train_cfg.seed)
    graph = TemporalGraph.from_records(records, directed=cfg.directed, unit_scale=cfg.unit_scale, presorted=True)
    budget = cfg.walk_budget(int(graph.active_nodes().shape[0]))
    walks = generate_walks(
        graph, budget, cfg.fs, cfg.fg, seed=cfg.seed, options=cfg.sampling_options(), threads=cfg.threads
    )
    logger.info(f"Warm-up on {graph.n_edges} edges: {len(walks)} walks")
    return graph, train(walks, train_cfg, labels=graph.labels)


def replay_stream(
    records: Sequence[EdgeRecord],
    cfg: RunConfig,
) -> Tuple[TemporalGraph, EmbeddingMatrix, LatencyReport]:
    """
    Replay records in time order as a stream.

    The first ⌊warmup·M⌋ edges are bulk-loaded and batch-trained; the rest are
    streamed through an OnlineEmbeddingConsumer.
    """
    ordered = sorted(((str(s), str(d), int(t)) for s, d, t in records), key=lambda r: (r[2], r[0], r[1]))
    n_warm = int(np.floor(cfg.warmup * len(ordered)))
    graph, embeddings = warm_start(ordered[:n_warm], cfg)
    consumer = OnlineEmbeddingConsumer(
        graph,
        embeddings,
        cfg.train_config(),
        walks_per_edge=cfg.walks_per_edge,
        omega=cfg.omega,
        max_len=cfg.walk_length,
        fg=cfg.fg,
        options=cfg.sampling_options(),
        batch_edges=cfg.batch_edges,
        seed=cfg.seed,
    )
    report = consumer.consume(ordered[n_warm:])
    logger.info(f"Streamed {report.count} edges, mean latency {report.mean_ms} ms")
    return graph, embeddings, report
