#!/usr/bin/env python3
"""
Unit tests for synthetic streams.
"""

import pytest

from apps.ctdne.errors import ConfigError
from apps.ctdne.synthetic import two_community_stream, write_edge_list
from apps.ctdne.temporal_graph import load_edge_list, read_edge_records


class TestTwoCommunityStream:
    """Tests for two_community_stream."""

    def test_shape(self):
        """Test edge count, timestamps and community labels."""
        stream = two_community_stream(n_nodes=20, n_edges=100, seed=1)

        assert len(stream.records) == 100
        assert [t for _, _, t in stream.records] == list(range(100))
        assert len(stream.communities) == 20
        assert set(stream.communities.values()) == {0, 1}

    def test_no_self_loops(self):
        """Test that endpoints always differ."""
        stream = two_community_stream(n_nodes=10, n_edges=300, seed=2)

        assert all(src != dst for src, dst, _ in stream.records)

    def test_tail_is_intra_community(self):
        """Test that edges after the noise prefix stay within one community."""
        stream = two_community_stream(n_nodes=30, n_edges=200, noise_fraction=0.25, seed=3)
        communities = stream.communities

        tail = stream.records[50:]
        assert all(communities[src] == communities[dst] for src, dst, _ in tail)

    def test_deterministic(self):
        """Test that a seed reproduces the stream."""
        first = two_community_stream(n_nodes=12, n_edges=40, seed=5)
        second = two_community_stream(n_nodes=12, n_edges=40, seed=5)
        other = two_community_stream(n_nodes=12, n_edges=40, seed=6)

        assert first.records == second.records
        assert first.records != other.records

    @pytest.mark.parametrize("kwargs", [
        {"n_nodes": 3},
        {"n_edges": 0},
        {"noise_fraction": 1.0},
        {"noise_fraction": -0.1},
    ])
    def test_invalid(self, kwargs):
        """Test parameter validation."""
        with pytest.raises(ConfigError):
            two_community_stream(**kwargs)


class TestWriteEdgeList:
    """Tests for write_edge_list."""

    @pytest.mark.parametrize("name", ["stream.txt", "stream.txt.gz"])
    def test_readable_by_loader(self, tmp_path, name):
        """Test that written files load back as the same records."""
        stream = two_community_stream(n_nodes=8, n_edges=30, seed=4)

        path = write_edge_list(stream.records, tmp_path / name)

        assert read_edge_records(path) == stream.records
        assert load_edge_list(path).n_edges == 30
