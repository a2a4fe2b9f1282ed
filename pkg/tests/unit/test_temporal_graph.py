#!/usr/bin/env python3
"""
Unit tests for the temporal graph store.
"""

import gzip

import numpy as np
import pytest

from apps.ctdne.errors import EdgeListParseError, EmptyGraphError
from apps.ctdne.temporal_graph import (
    TemporalGraph,
    add_edge,
    graph_stats,
    load_edge_list,
    read_edge_records,
    temporal_neighbors,
)


def _labels(g, view):
    return [g.label_of(v) for v in view.nodes.tolist()]


class TestLoadEdgeList:
    """Tests for edge-list ingestion."""

    def test_reference_stream(self, stream_file):
        """Test loading the reference stream file."""
        g = load_edge_list(stream_file)

        assert g.n_nodes == 6
        assert g.n_edges == 8
        assert g.t_min == 1
        assert g.t_max == 10
        assert g.labels == ["1", "2", "3", "4", "5", "6"]

    def test_shuffled_file_gives_identical_state(self, stream_edges, edge_file):
        """Test that line order does not change the stored graph."""
        shuffled = [stream_edges[i] for i in (5, 0, 7, 3, 1, 6, 2, 4)]
        ordered = load_edge_list(edge_file("sorted.txt", stream_edges))
        permuted = load_edge_list(edge_file("shuffled.txt", shuffled))

        assert ordered.state() == permuted.state()

    def test_self_loop_stored_once(self, edge_file):
        """Test a single self-loop edge."""
        g = load_edge_list(edge_file("loop.txt", [("7", "7", 0)]))

        assert g.n_nodes == 1
        assert g.n_edges == 1
        assert g.neighbors(0).pairs() == [(0, 0)]

    def test_self_loop_directed(self, edge_file):
        """Test a self-loop in a directed graph."""
        g = load_edge_list(edge_file("loop.txt", [("7", "7", 0)]), directed=True)

        assert g.neighbors(0).pairs() == [(0, 0)]
        assert g.predecessors(0, 1).pairs() == [(0, 0)]

    def test_weight_column_and_comments(self, tmp_path):
        """Test four-field lines, comma separators and comment lines."""
        path = tmp_path / "weighted.txt"
        path.write_text("% header\n# another\na,b,0.5,3\n\nb c 2 1\n", encoding="utf-8")

        g = load_edge_list(path)

        assert g.n_edges == 2
        assert [e.time for e in g.iter_edges()] == [1, 3]

    def test_integral_float_timestamp(self, tmp_path):
        """Test that '3.0' is accepted as time 3."""
        path = tmp_path / "float.txt"
        path.write_text("a b 3.0\n", encoding="utf-8")

        assert read_edge_records(path) == [("a", "b", 3)]

    def test_gzip_input(self, tmp_path, stream_edges):
        """Test reading a gzip-compressed edge list."""
        path = tmp_path / "stream.txt.gz"
        with gzip.open(path, "wt", encoding="utf-8") as f:
            for s, d, t in stream_edges:
                f.write(f"{s} {d} {t}\n")

        assert load_edge_list(path).n_edges == 8

    def test_malformed_line_reports_line_number(self, tmp_path):
        """Test that a short line raises a parse error with its line number."""
        path = tmp_path / "bad.txt"
        path.write_text("a b 1\nc d\n", encoding="utf-8")

        with pytest.raises(EdgeListParseError) as exc_info:
            load_edge_list(path)

        assert exc_info.value.line_number == 2
        assert "line 2" in str(exc_info.value)

    def test_non_numeric_timestamp(self, tmp_path):
        """Test that a non-numeric timestamp is rejected."""
        path = tmp_path / "bad.txt"
        path.write_text("a b yesterday\n", encoding="utf-8")

        with pytest.raises(EdgeListParseError):
            load_edge_list(path)

    def test_fractional_timestamp(self, tmp_path):
        """Test that a fractional timestamp is rejected."""
        path = tmp_path / "bad.txt"
        path.write_text("a b 3.5\n", encoding="utf-8")

        with pytest.raises(EdgeListParseError):
            load_edge_list(path)

    def test_negative_timestamp(self, tmp_path):
        """Test that a negative timestamp is rejected."""
        path = tmp_path / "bad.txt"
        path.write_text("a b 1\na c -4\n", encoding="utf-8")

        with pytest.raises(EdgeListParseError) as exc_info:
            load_edge_list(path)

        assert exc_info.value.line_number == 2

    def test_empty_file(self, tmp_path):
        """Test that a file without edges raises 'no edges'."""
        path = tmp_path / "empty.txt"
        path.write_text("% only a comment\n", encoding="utf-8")

        with pytest.raises(EmptyGraphError, match="no edges"):
            load_edge_list(path)


class TestAddEdge:
    """Tests for streaming inserts."""

    def test_completes_reference_graph(self, stream_edges, stream_graph):
        """Test that adding the last edge yields the full graph."""
        g = TemporalGraph.from_records(stream_edges[:-1])

        add_edge(g, "6", "3", 10)

        assert g.state() == stream_graph.state()

    def test_new_labels_extend_nodes(self, stream_graph):
        """Test that each unseen label adds exactly one node."""
        add_edge(stream_graph, "7", "1", 11)
        assert stream_graph.n_nodes == 7

        add_edge(stream_graph, "8", "9", 12)
        assert stream_graph.n_nodes == 9

    def test_out_of_order_edge_keeps_sorted(self, stream_graph):
        """Test inserting an edge earlier than t_max."""
        add_edge(stream_graph, "1", "5", 6)

        times = stream_graph.edge_arrays()[2]
        assert np.all(np.diff(times) >= 0)
        assert stream_graph.n_edges == 9
        for v in range(stream_graph.n_nodes):
            assert np.all(np.diff(stream_graph.neighbors(v).times) >= 0)
        assert stream_graph.has_edge(0, 4, 6)

    def test_insert_into_empty_graph(self):
        """Test streaming into an empty graph."""
        g = TemporalGraph.empty()

        edge = g.add_edge("x", "y", 5)

        assert (edge.src, edge.dst, edge.time) == (0, 1, 5)
        assert g.temporal_neighbors(0, 4).pairs() == [(1, 5)]

    def test_interleaved_inserts_stay_sorted(self, random_graph):
        """Test that any interleaving of inserts keeps every adjacency sorted."""
        rng = np.random.default_rng(3)
        for _ in range(100):
            u, v = rng.integers(40, size=2)
            random_graph.add_edge(str(u), str(v), int(rng.integers(60)))

        assert np.all(np.diff(random_graph.edge_arrays()[2]) >= 0)
        for v in range(random_graph.n_nodes):
            assert np.all(np.diff(random_graph.neighbors(v).times) >= 0)


class TestTemporalNeighbors:
    """Tests for Γ_t(v)."""

    def test_multiset_neighborhood(self, neighborhood_graph):
        """Test that repeated neighbors are kept in time order."""
        g = neighborhood_graph

        view = temporal_neighbors(g, g.node_id("2"), 6)

        assert _labels(g, view) == ["4", "3", "5", "3"]
        assert view.times.tolist() == [7, 8, 9, 10]

    def test_reference_stream_neighborhood(self, stream_graph):
        """Test Γ_2 of node 3 on the reference stream."""
        g = stream_graph

        view = g.temporal_neighbors(g.node_id("3"), 2)

        assert _labels(g, view) == ["4", "4", "5", "6"]
        assert view.times.tolist() == [3, 5, 7, 10]

    def test_empty_at_t_max(self, stream_graph):
        """Test that no node has temporal neighbors at t_max."""
        for v in range(stream_graph.n_nodes):
            assert len(stream_graph.temporal_neighbors(v, stream_graph.t_max)) == 0

    def test_strictly_later(self, chain_graph):
        """Test that an edge at exactly t is excluded."""
        b = chain_graph.node_id("b")

        assert chain_graph.temporal_neighbors(b, 1).pairs() == [(chain_graph.node_id("c"), 2)]
        assert chain_graph.temporal_neighbors(b, 2).pairs() == []

    def test_out_of_range_node(self, stream_graph):
        """Test that an unknown node id raises IndexError."""
        with pytest.raises(IndexError):
            stream_graph.temporal_neighbors(6, 0)

    def test_matches_brute_force(self, random_graph):
        """Test Γ_t against a filter over the edge list for every node and time."""
        g = random_graph
        edges = list(g.iter_edges())
        for v in range(g.n_nodes):
            for t in range(-1, 51):
                expected = sorted(
                    [(e.dst, e.time) for e in edges if e.src == v and e.time > t]
                    + [(e.src, e.time) for e in edges if e.dst == v and e.src != v and e.time > t],
                    key=lambda p: p[1],
                )
                got = g.temporal_neighbors(v, t).pairs()
                assert sorted(got) == sorted(expected)
                assert [p[1] for p in got] == [p[1] for p in expected]

    def test_snapshot_matches_queries(self, random_graph):
        """Test that the walk snapshot answers Γ_t like the graph."""
        g = random_graph
        snap = g.walk_snapshot()

        for v in range(g.n_nodes):
            for t in (-1, 10, 25, 49):
                start = snap.after(v, t)
                expected = g.temporal_neighbors(v, t).pairs()
                assert list(zip(snap.nodes[v][start:], snap.times[v][start:])) == expected
                assert snap.view(v, start).pairs() == expected
        assert list(zip(snap.src, snap.dst, snap.edge_times)) == [(e.src, e.dst, e.time) for e in g.iter_edges()]

    def test_snapshot_refreshed_after_insert(self, stream_graph):
        """Test that a streamed edge shows up in the next snapshot."""
        before = stream_graph.walk_snapshot()
        assert stream_graph.walk_snapshot() is before

        stream_graph.add_edge("1", "6", 11)

        after = stream_graph.walk_snapshot()
        assert after is not before
        assert (5, 11) in zip(after.nodes[0], after.times[0])
        assert after.edge_times[-1] == 11
        assert (5, 11) not in zip(before.nodes[0], before.times[0])

    def test_directed_predecessors(self):
        """Test in-adjacency lookups in a directed graph."""
        g = TemporalGraph.from_records([("a", "b", 1), ("c", "b", 3), ("b", "a", 4)], directed=True)
        b = g.node_id("b")

        assert g.temporal_neighbors(b, 0).pairs() == [(g.node_id("a"), 4)]
        assert g.predecessors(b, 3).pairs() == [(g.node_id("a"), 1)]
        assert g.predecessors(b, 4).pairs() == [(g.node_id("a"), 1), (g.node_id("c"), 3)]


class TestGraphStats:
    """Tests for graph_stats."""

    def test_reference_stream(self, stream_graph):
        """Test degree statistics of the reference stream."""
        stats = graph_stats(stream_graph)

        assert stats.n_edges == 8
        assert stats.mean_degree == pytest.approx(16 / 6)
        assert stats.max_degree == 5
        assert stream_graph.degree(stream_graph.node_id("3")) == 5

    def test_single_edge(self):
        """Test a single undirected edge at time 0."""
        stats = graph_stats(TemporalGraph.from_records([("u", "v", 0)]))

        assert stats.mean_degree == 1.0
        assert stats.max_degree == 1
        assert stats.timespan_days == 0.0

    def test_timespan_uses_unit_scale(self):
        """Test that unit_scale converts timestamps to seconds."""
        g = TemporalGraph.from_records([("u", "v", 0), ("v", "w", 86_400_000)], unit_scale=1000.0)

        assert graph_stats(g).timespan_days == pytest.approx(1.0)

    def test_empty_graph(self):
        """Test that an empty graph has no statistics."""
        with pytest.raises(EmptyGraphError):
            graph_stats(TemporalGraph.empty())

    def test_undirected_degree_sum(self, random_graph):
        """Test that undirected degrees sum to 2M."""
        total = sum(random_graph.degree(v) for v in range(random_graph.n_nodes))

        assert total == 2 * random_graph.n_edges


class TestDerivedGraphs:
    """Tests for edge slices and active nodes."""

    def test_edge_slice_keeps_node_space(self, stream_graph):
        """Test that a slice shares the full label list."""
        sub = stream_graph.edge_slice(0, 6)

        assert sub.labels == stream_graph.labels
        assert sub.n_edges == 6
        assert sub.t_max == 7

    def test_active_nodes(self, stream_graph):
        """Test that nodes without edges in a slice are inactive."""
        sub = stream_graph.edge_slice(0, 4)

        assert sub.active_nodes().tolist() == [0, 1, 2, 3]
