#!/usr/bin/env python3
"""
Continuous-time dynamic network store.

Edges are kept globally sorted by time and every node has a time-sorted
adjacency array, so the temporal neighborhood Γ_t(v) (neighbors reached by an
edge strictly after t) is a contiguous suffix found by binary search.

Adjacency arrays are finalized after bulk loading; streaming inserts land in a
per-node overflow buffer that is merged the next time the node is read.
"""

import bisect
import logging
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from apps.ctdne.errors import EdgeListParseError, EmptyGraphError
from apps.ctdne.models import GraphStats, TemporalEdge
from apps.ctdne.utils.io_helper import open_text

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400
COMMENT_PREFIXES = ("%", "#")
_FIELD_SPLIT = re.compile(r"[\s,]+")

EdgeRecord = Tuple[str, str, int]


@dataclass(frozen=True)
class NeighborView:
    """Ordered (neighbor, time) pairs; a view into adjacency storage, not a copy"""
    nodes: np.ndarray
    times: np.ndarray

    def __len__(self) -> int:
        return int(self.nodes.shape[0])

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(zip(self.nodes.tolist(), self.times.tolist()))

    def pairs(self) -> List[Tuple[int, int]]:
        return list(self)

    def reversed(self) -> "NeighborView":
        return NeighborView(self.nodes[::-1], self.times[::-1])


_EMPTY = np.zeros(0, dtype=np.int64)


class _Adjacency:
    """Per-node time-sorted (neighbor, time) arrays with a lazily merged overflow buffer"""

    def __init__(self):
        self._nodes: List[np.ndarray] = []
        self._times: List[np.ndarray] = []
        self._pending: Dict[int, List[Tuple[int, int]]] = {}

    def add_node(self) -> None:
        self._nodes.append(_EMPTY)
        self._times.append(_EMPTY)

    def finalize(self, entries: List[List[Tuple[int, int]]]) -> None:
        """Replace storage with arrays built from per-node lists already sorted by time"""
        self._nodes = []
        self._times = []
        self._pending = {}
        for items in entries:
            if items:
                arr = np.asarray(items, dtype=np.int64)
                self._nodes.append(np.ascontiguousarray(arr[:, 0]))
                self._times.append(np.ascontiguousarray(arr[:, 1]))
            else:
                self._nodes.append(_EMPTY)
                self._times.append(_EMPTY)

    def append(self, v: int, w: int, t: int) -> None:
        self._pending.setdefault(v, []).append((w, t))

    def arrays(self, v: int) -> Tuple[np.ndarray, np.ndarray]:
        pending = self._pending.pop(v, None)
        if pending:
            extra = np.asarray(pending, dtype=np.int64)
            nodes = np.concatenate([self._nodes[v], extra[:, 0]])
            times = np.concatenate([self._times[v], extra[:, 1]])
            if times.shape[0] > 1 and np.any(times[1:] < times[:-1]):
                order = np.argsort(times, kind="stable")
                nodes = nodes[order]
                times = times[order]
            self._nodes[v] = nodes
            self._times[v] = times
        return self._nodes[v], self._times[v]

    def degree(self, v: int) -> int:
        return int(self._nodes[v].shape[0]) + len(self._pending.get(v, ()))


@dataclass(frozen=True)
class AdjacencySnapshot:
    """
    Read-only copy of the out-adjacency and edge sequence for tight walk loops.

    Lists serve bisect and O(1) indexing without the graph lock; the arrays
    back the weighted F_Γ kinds.
    """
    nodes: List[List[int]]
    times: List[List[int]]
    node_arrays: List[np.ndarray]
    time_arrays: List[np.ndarray]
    src: List[int]
    dst: List[int]
    edge_times: List[int]

    def after(self, v: int, t: int) -> int:
        """Offset of Γ_t(v) in v's adjacency"""
        return bisect.bisect_right(self.times[v], t)

    def view(self, v: int, start: int = 0) -> NeighborView:
        return NeighborView(self.node_arrays[v][start:], self.time_arrays[v][start:])


class TemporalGraph:
    """
    Temporal multigraph over dense node ids 0..N-1 with an external label map.

    Undirected graphs store each edge in both endpoints' adjacency (self-loops
    once). Directed graphs keep separate out- and in-adjacency; Γ_t uses the
    out-adjacency and backward walks use the in-adjacency.
    """

    def __init__(self, directed: bool = False, unit_scale: float = 1.0):
        self.directed = directed
        self.unit_scale = unit_scale
        self._labels: List[str] = []
        self._index: Dict[str, int] = {}
        self._src: List[int] = []
        self._dst: List[int] = []
        self._time: List[int] = []
        self._out = _Adjacency()
        self._in = _Adjacency() if directed else self._out
        self._edge_cache: Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]] = None
        self._snapshot: Optional[AdjacencySnapshot] = None
        self._lock = threading.RLock()

    # Construction
    @classmethod
    def from_records(
        cls,
        records: Iterable[Tuple[object, object, int]],
        directed: bool = False,
        unit_scale: float = 1.0,
        labels: Optional[Sequence[str]] = None,
        presorted: bool = False,
    ) -> "TemporalGraph":
        """
        Bulk-build a graph from (src_label, dst_label, time) records.

        Records are sorted by (time, src label, dst label) unless presorted, so
        the result does not depend on input order. Node ids follow `labels`
        first (if given), then first appearance in the sorted edge sequence.
        """
        graph = cls(directed=directed, unit_scale=unit_scale)
        rows = [(str(s), str(d), int(t)) for s, d, t in records]
        if not presorted:
            rows.sort(key=lambda r: (r[2], r[0], r[1]))

        for label in labels or ():
            graph._register(label)
        for s, d, _ in rows:
            graph._register(s)
            graph._register(d)

        n = len(graph._labels)
        out_entries: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
        in_entries: List[List[Tuple[int, int]]] = [[] for _ in range(n)] if directed else out_entries
        for s, d, t in rows:
            u, v = graph._index[s], graph._index[d]
            graph._src.append(u)
            graph._dst.append(v)
            graph._time.append(t)
            out_entries[u].append((v, t))
            if directed:
                in_entries[v].append((u, t))
            elif u != v:
                out_entries[v].append((u, t))

        graph._out.finalize(out_entries)
        if directed:
            graph._in.finalize(in_entries)
        return graph

    @classmethod
    def empty(cls, directed: bool = False, unit_scale: float = 1.0) -> "TemporalGraph":
        """Graph with no nodes or edges, ready for streaming inserts"""
        return cls(directed=directed, unit_scale=unit_scale)

    def _register(self, label: str) -> int:
        idx = self._index.get(label)
        if idx is None:
            idx = len(self._labels)
            self._labels.append(label)
            self._index[label] = idx
            self._out.add_node()
            if self.directed:
                self._in.add_node()
        return idx

    # Basic properties
    @property
    def n_nodes(self) -> int:
        return len(self._labels)

    @property
    def n_edges(self) -> int:
        return len(self._time)

    @property
    def labels(self) -> List[str]:
        return list(self._labels)

    @property
    def t_min(self) -> int:
        if not self._time:
            raise EmptyGraphError("graph has no edges")
        return self._time[0]

    @property
    def t_max(self) -> int:
        if not self._time:
            raise EmptyGraphError("graph has no edges")
        return self._time[-1]

    def node_id(self, label: object) -> int:
        """Dense id of an external label"""
        return self._index[str(label)]

    def label_of(self, node: int) -> str:
        """External label of a dense id"""
        return self._labels[node]

    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src, dst, time) arrays in time order"""
        cache = self._edge_cache
        if cache is None:
            with self._lock:
                cache = (
                    np.asarray(self._src, dtype=np.int64),
                    np.asarray(self._dst, dtype=np.int64),
                    np.asarray(self._time, dtype=np.int64),
                )
                self._edge_cache = cache
        return cache

    def walk_snapshot(self) -> AdjacencySnapshot:
        """Adjacency snapshot, rebuilt after the graph changes"""
        snapshot = self._snapshot
        if snapshot is None:
            with self._lock:
                pairs = [self._out.arrays(v) for v in range(self.n_nodes)]
                snapshot = AdjacencySnapshot(
                    nodes=[nodes.tolist() for nodes, _ in pairs],
                    times=[times.tolist() for _, times in pairs],
                    node_arrays=[nodes for nodes, _ in pairs],
                    time_arrays=[times for _, times in pairs],
                    src=list(self._src),
                    dst=list(self._dst),
                    edge_times=list(self._time),
                )
                self._snapshot = snapshot
        return snapshot

    def edge(self, index: int) -> TemporalEdge:
        return TemporalEdge(self._src[index], self._dst[index], self._time[index])

    def iter_edges(self) -> Iterator[TemporalEdge]:
        for i in range(self.n_edges):
            yield self.edge(i)

    def degree(self, v: int) -> int:
        """Temporal degree |Γ(v)| (out-degree for directed graphs)"""
        self._check_node(v)
        return self._out.degree(v)

    # Mutation
    def add_edge(self, src: object, dst: object, time: int) -> TemporalEdge:
        """
        Insert an edge, registering unseen labels.

        Appends are O(1) amortized when time >= t_max; earlier times are inserted
        after any existing edges with the same time.
        """
        time = int(time)
        with self._lock:
            u = self._register(str(src))
            v = self._register(str(dst))
            if not self._time or time >= self._time[-1]:
                self._src.append(u)
                self._dst.append(v)
                self._time.append(time)
            else:
                pos = bisect.bisect_right(self._time, time)
                self._src.insert(pos, u)
                self._dst.insert(pos, v)
                self._time.insert(pos, time)
            self._out.append(u, v, time)
            if self.directed:
                self._in.append(v, u, time)
            elif u != v:
                self._out.append(v, u, time)
            self._edge_cache = None
            self._snapshot = None
        if time < 0:
            logger.warning(f"Accepted stream edge with negative timestamp {time}")
        return TemporalEdge(u, v, time)

    # Queries
    def _check_node(self, v: int) -> None:
        if not 0 <= v < len(self._labels):
            raise IndexError(f"node id {v} out of range for graph with {len(self._labels)} nodes")

    def _out_arrays(self, v: int) -> Tuple[np.ndarray, np.ndarray]:
        with self._lock:
            return self._out.arrays(v)

    def _in_arrays(self, v: int) -> Tuple[np.ndarray, np.ndarray]:
        with self._lock:
            return self._in.arrays(v)

    def temporal_neighbors(self, v: int, t: int) -> NeighborView:
        """Γ_t(v): adjacency entries with time strictly greater than t, ascending by time"""
        self._check_node(v)
        nodes, times = self._out_arrays(v)
        start = int(np.searchsorted(times, t, side="right"))
        return NeighborView(nodes[start:], times[start:])

    def predecessors(self, v: int, t: int) -> NeighborView:
        """Entries reaching v by an edge strictly before t, ascending by time"""
        self._check_node(v)
        nodes, times = self._in_arrays(v)
        stop = int(np.searchsorted(times, t, side="left"))
        return NeighborView(nodes[:stop], times[:stop])

    def neighbors(self, v: int) -> NeighborView:
        """Full (time-ignoring) adjacency of v"""
        self._check_node(v)
        nodes, times = self._out_arrays(v)
        return NeighborView(nodes, times)

    def incident(self, v: int) -> NeighborView:
        """Every adjacency entry touching v regardless of direction"""
        self._check_node(v)
        if not self.directed:
            return self.neighbors(v)
        out_nodes, out_times = self._out_arrays(v)
        in_nodes, in_times = self._in_arrays(v)
        return NeighborView(np.concatenate([out_nodes, in_nodes]), np.concatenate([out_times, in_times]))

    def active_nodes(self) -> np.ndarray:
        """Ids of nodes with at least one incident edge"""
        return np.asarray([v for v in range(self.n_nodes) if len(self.incident(v)) > 0], dtype=np.int64)

    def has_edge(self, src: int, dst: int, time: int) -> bool:
        """Whether edge (src, dst, time) exists"""
        if not (0 <= src < self.n_nodes and 0 <= dst < self.n_nodes):
            return False
        nodes, times = self._out_arrays(src)
        lo = int(np.searchsorted(times, time, side="left"))
        hi = int(np.searchsorted(times, time, side="right"))
        return bool(np.any(nodes[lo:hi] == dst))

    # Derived graphs
    def edge_slice(self, start: int, stop: int) -> "TemporalGraph":
        """Graph over edges[start:stop] sharing this graph's full node id space"""
        records = [
            (self._labels[self._src[i]], self._labels[self._dst[i]], self._time[i])
            for i in range(max(start, 0), min(stop, self.n_edges))
        ]
        return TemporalGraph.from_records(
            records, directed=self.directed, unit_scale=self.unit_scale, labels=self._labels, presorted=True
        )

    def index_at_time(self, t: int, side: str = "left") -> int:
        """Position of time t in the sorted edge sequence"""
        return int(np.searchsorted(self.edge_arrays()[2], t, side=side))

    def state(self) -> Tuple:
        """Complete internal state as plain Python values (for equality checks)"""
        adjacency = []
        for v in range(self.n_nodes):
            nodes, times = self._out_arrays(v)
            entry = (nodes.tolist(), times.tolist())
            if self.directed:
                in_nodes, in_times = self._in_arrays(v)
                entry = entry + (in_nodes.tolist(), in_times.tolist())
            adjacency.append(entry)
        return (
            self.directed,
            tuple(self._labels),
            tuple(self._src),
            tuple(self._dst),
            tuple(self._time),
            tuple(adjacency),
        )

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"TemporalGraph({kind}, n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def _parse_time(token: str, line_number: int) -> int:
    try:
        value = int(token)
    except ValueError:
        try:
            as_float = float(token)
        except ValueError:
            raise EdgeListParseError(f"timestamp {token!r} is not a number", line_number)
        if not as_float.is_integer():
            raise EdgeListParseError(f"timestamp {token!r} is not an integer", line_number)
        value = int(as_float)
    if value < 0:
        raise EdgeListParseError(f"negative timestamp {value}", line_number)
    return value


def read_edge_records(path: Union[str, Path]) -> List[EdgeRecord]:
    """
    Parse an edge-list file into (src_label, dst_label, time) records in file order.

    Lines hold `src dst time` or `src dst weight time` separated by whitespace
    or commas; weights are ignored. Lines starting with '%' or '#' are comments.
    """
    records: List[EdgeRecord] = []
    with open_text(path, "r") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith(COMMENT_PREFIXES):
                continue
            fields = [tok for tok in _FIELD_SPLIT.split(line) if tok]
            if len(fields) < 3:
                raise EdgeListParseError(f"expected at least 3 fields, got {len(fields)}", line_number)
            time_token = fields[2] if len(fields) == 3 else fields[3]
            records.append((fields[0], fields[1], _parse_time(time_token, line_number)))
    return records


def load_edge_list(path: Union[str, Path], directed: bool = False, unit_scale: float = 1.0) -> TemporalGraph:
    """Load a timestamped edge-list file into a TemporalGraph"""
    records = read_edge_records(path)
    if not records:
        raise EmptyGraphError(f"no edges in {path}")
    graph = TemporalGraph.from_records(records, directed=directed, unit_scale=unit_scale)
    logger.info(
        f"Loaded {path}: N={graph.n_nodes}, M={graph.n_edges}, t=[{graph.t_min}, {graph.t_max}], "
        f"{'directed' if directed else 'undirected'}"
    )
    return graph


def add_edge(g: TemporalGraph, src: object, dst: object, time: int) -> TemporalEdge:
    """Insert an edge into g; unseen labels become new nodes"""
    return g.add_edge(src, dst, time)


def temporal_neighbors(g: TemporalGraph, v: int, t: int) -> NeighborView:
    """Γ_t(v) of g"""
    return g.temporal_neighbors(v, t)


def graph_stats(g: TemporalGraph) -> GraphStats:
    """Edge count, mean/max temporal degree, timespan in days"""
    if g.n_edges == 0:
        raise EmptyGraphError("graph statistics need at least one edge")
    degrees = [g.degree(v) for v in range(g.n_nodes)]
    timespan = (g.t_max - g.t_min) / g.unit_scale / SECONDS_PER_DAY
    return GraphStats(
        n_nodes=g.n_nodes,
        n_edges=g.n_edges,
        mean_degree=sum(degrees) / g.n_nodes,
        max_degree=max(degrees),
        timespan_days=timespan,
    )
