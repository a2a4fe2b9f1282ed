#!/usr/bin/env python3
"""
Pytest configuration and fixtures for ctdne tests.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path so `apps.ctdne` imports resolve
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from apps.ctdne.temporal_graph import TemporalGraph  # noqa: E402

# Small edge stream used throughout: labels 1..6 map to ids 0..5
STREAM_EDGES = [
    ("1", "2", 1),
    ("2", "3", 2),
    ("3", "4", 3),
    ("4", "1", 4),
    ("3", "4", 5),
    ("5", "3", 7),
    ("2", "5", 8),
    ("6", "3", 10),
]

# v2 has four temporal neighbors after t=6, reaching v3 twice
NEIGHBORHOOD_EDGES = [
    ("2", "8", 2),
    ("2", "7", 4),
    ("1", "2", 6),
    ("2", "4", 7),
    ("2", "3", 8),
    ("2", "5", 9),
    ("2", "3", 10),
]


def write_edges(path: Path, edges) -> Path:
    """Write 'src dst time' lines"""
    path.write_text("".join(f"{s} {d} {t}\n" for s, d, t in edges), encoding="utf-8")
    return path


def random_records(n_nodes: int, n_edges: int, seed: int, max_time: int = 50):
    """Random edge records with integer timestamps in [0, max_time)"""
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(n_edges):
        u, v = rng.choice(n_nodes, size=2, replace=False)
        records.append((str(u), str(v), int(rng.integers(max_time))))
    return records


def random_temporal_graph(n_nodes: int, n_edges: int, seed: int, max_time: int = 50, directed: bool = False):
    """Random multigraph with integer timestamps in [0, max_time)"""
    return TemporalGraph.from_records(random_records(n_nodes, n_edges, seed, max_time), directed=directed)


@pytest.fixture
def stream_edges():
    """Edge records of the small reference stream, in time order"""
    return list(STREAM_EDGES)


@pytest.fixture
def stream_graph():
    """Undirected graph over the reference stream"""
    return TemporalGraph.from_records(STREAM_EDGES)


@pytest.fixture
def stream_file(tmp_path):
    """Reference stream written as an edge-list file"""
    return write_edges(tmp_path / "stream.txt", STREAM_EDGES)


@pytest.fixture
def neighborhood_graph():
    """Undirected graph where v2 has a multiset temporal neighborhood"""
    return TemporalGraph.from_records(NEIGHBORHOOD_EDGES)


@pytest.fixture
def chain_graph():
    """Two-edge time chain a-b (t=1), b-c (t=2)"""
    return TemporalGraph.from_records([("a", "b", 1), ("b", "c", 2)])


@pytest.fixture
def random_graph():
    """Random undirected temporal graph with 30 nodes and 200 edges"""
    return random_temporal_graph(30, 200, seed=7)


@pytest.fixture
def random_file(tmp_path):
    """Edge-list file with 30 nodes and 200 random edges"""
    return write_edges(tmp_path / "random.txt", random_records(30, 200, seed=7))


@pytest.fixture
def out_dir(tmp_path):
    """Empty output directory"""
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def graph_factory():
    """random_temporal_graph as a fixture"""
    return random_temporal_graph


@pytest.fixture
def edge_file(tmp_path):
    """Write records to a named file under tmp_path"""
    def make(name, edges):
        return write_edges(tmp_path / name, edges)
    return make
