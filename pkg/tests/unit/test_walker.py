#!/usr/bin/env python3
"""
Unit tests for temporal, static and backward walks.
"""

from collections import Counter, defaultdict
from itertools import product

import numpy as np
import pytest
from scipy.stats import chi2, chisquare

from apps.ctdne.errors import ConfigError, DataError, EmptyGraphError, WalkGenerationError
from apps.ctdne.models import BiasKind, TemporalEdge, TemporalWalk, WalkBudget, WalkKind
from apps.ctdne.sampling import make_rng
from apps.ctdne.temporal_graph import TemporalGraph
from apps.ctdne.walker import (
    backward_walks_for_edge,
    generate_walks,
    relaxed_walks,
    static_walks,
    temporal_walk,
    walk_stats,
    write_walks,
)

# reference stream ids: v1=0, v2=1, v3=2, v4=3, v5=4, v6=5


def _contains(walk, sequence):
    n = len(sequence)
    return any(walk.nodes[i:i + n] == list(sequence) for i in range(len(walk.nodes) - n + 1))


def _windows(walks, omega):
    return sum(len(w) - omega + 1 for w in walks if w.kind is not WalkKind.RELAXED)


def _enumerate_walks(g, max_len):
    """Every walk uniform/uniform sampling can return, with its probability"""
    support = defaultdict(float)

    def extend(nodes, times, p):
        view = g.temporal_neighbors(nodes[-1], times[-1]) if len(nodes) < max_len else None
        if view is None or len(view) == 0:
            support[(tuple(nodes), tuple(times))] += p
            return
        for w, t in view.pairs():
            extend(nodes + [w], times + [t], p / len(view))

    for e in g.iter_edges():
        extend([e.src, e.dst], [e.time], 1.0 / g.n_edges)
    return support


def _full_cap_walks(walks, budget):
    """Walks drawn while the residual cap was still at least L"""
    kept, windows = [], 0
    for w in walks:
        if budget.omega + budget.beta - windows - 1 >= budget.max_len:
            kept.append(w)
        windows += len(w) - budget.omega + 1
    return kept


def _oracle_fit(walks, oracle):
    """(χ² statistic, degrees of freedom, p-value, walks outside the oracle support)"""
    n = len(walks)
    counts = Counter((tuple(w.nodes), tuple(w.times)) for w in walks)
    unexpected = set(counts) - set(oracle)
    keys = sorted(oracle)
    expected = np.array([oracle[k] * n for k in keys])
    observed = np.array([counts.get(k, 0) for k in keys], dtype=np.float64)
    small = expected < 5
    if small.any():
        expected = np.append(expected[~small], expected[small].sum())
        observed = np.append(observed[~small], observed[small].sum())
    if expected.shape[0] < 2:
        return 0.0, 0, 1.0, unexpected
    result = chisquare(observed, f_exp=expected * observed.sum() / expected.sum())
    return float(result.statistic), expected.shape[0] - 1, float(result.pvalue), unexpected


class TestTemporalWalk:
    """Tests for a single forward walk."""

    def test_reaches_valid_three_node_walk(self, stream_graph):
        """Test that [v1, v2, v5] with times (1, 8) is reachable."""
        start = TemporalEdge(0, 1, 1)
        walks = [temporal_walk(stream_graph, start, 1, 3, 3, BiasKind.UNIFORM, make_rng(s)) for s in range(100)]

        found = [w for w in walks if w.nodes == [0, 1, 4]]
        assert found
        assert found[0].times == [1, 8]
        assert all(w.nodes[:2] == [0, 1] for w in walks)

    def test_last_edge_cannot_extend(self, stream_graph):
        """Test that a walk from the latest edge stops immediately."""
        walk = temporal_walk(stream_graph, TemporalEdge(5, 2, 10), 10, 80, 80, BiasKind.UNIFORM, make_rng(0))

        assert walk.nodes == [5, 2]
        assert walk.times == [10]

    def test_respects_cap(self, random_graph):
        """Test that the residual cap bounds the walk length."""
        edge = random_graph.edge(0)

        walk = temporal_walk(random_graph, edge, edge.time, 80, 3, BiasKind.UNIFORM, make_rng(1))

        assert 2 <= len(walk) <= 3

    def test_cap_below_two(self, stream_graph):
        """Test that cap < 2 is a configuration error."""
        with pytest.raises(ConfigError):
            temporal_walk(stream_graph, TemporalEdge(0, 1, 1), 1, 80, 1, BiasKind.UNIFORM, make_rng(0))

    def test_unknown_start_edge(self, stream_graph):
        """Test that a start edge outside the graph is rejected."""
        with pytest.raises(DataError):
            temporal_walk(stream_graph, TemporalEdge(0, 5, 3), 3, 80, 80, BiasKind.UNIFORM, make_rng(0))


class TestGenerateWalks:
    """Tests for budgeted walk generation."""

    def test_time_invalid_sequence_never_produced(self, stream_graph):
        """Test that v4 -> v1 -> v2 never appears in a temporal walk."""
        budget = WalkBudget(beta=5000, omega=2, max_len=6, relax=False)

        walks = generate_walks(stream_graph, budget, seed=4)

        assert not any(_contains(w, (3, 0, 1)) for w in walks)
        assert all(w.is_time_respecting() for w in walks)

    def test_smallest_budget(self, chain_graph):
        """Test β=1, ω=2: one walk cut to the residual cap is enough."""
        budget = WalkBudget(beta=1, omega=2, max_len=80, relax=False)

        walks = generate_walks(chain_graph, budget, seed=0)

        assert len(walks) == 1
        assert len(walks[0]) == 2
        assert _windows(walks, 2) == 1

    def test_chain_walk_fills_budget(self, chain_graph):
        """Test that [a, b, c] can cover β=2 in one walk."""
        budget = WalkBudget(beta=2, omega=2, max_len=80, relax=False)
        a, b, c = (chain_graph.node_id(x) for x in "abc")

        corpora = [generate_walks(chain_graph, budget, seed=s) for s in range(30)]

        assert any(len(walks) == 1 and walks[0].nodes == [a, b, c] for walks in corpora)
        assert all(_windows(walks, 2) == 2 for walks in corpora)

    def test_budget_bounds(self, random_graph):
        """Test β ≤ Σ(|S| − ω + 1) < β + L and ω ≤ |S| ≤ L."""
        budget = WalkBudget(beta=400, omega=3, max_len=8)

        walks = generate_walks(random_graph, budget, BiasKind.EXPONENTIAL, BiasKind.LINEAR, seed=2)
        temporal = [w for w in walks if w.kind is WalkKind.TEMPORAL]

        assert budget.beta <= _windows(walks, 3) < budget.beta + budget.max_len
        assert all(3 <= len(w) <= 8 for w in temporal)
        assert all(w.is_time_respecting() for w in temporal)

    @pytest.mark.parametrize("fs,fg", [
        (BiasKind.UNIFORM, BiasKind.UNIFORM),
        (BiasKind.LINEAR, BiasKind.EXPONENTIAL),
        (BiasKind.EXPONENTIAL, BiasKind.LINEAR),
    ])
    def test_temporal_validity(self, graph_factory, fs, fg):
        """Test that every kept walk strictly increases in time."""
        g = graph_factory(20, 150, seed=11, max_time=30)

        walks = generate_walks(g, WalkBudget(beta=300, omega=2, max_len=10, relax=False), fs, fg, seed=1)

        assert all(w.is_time_respecting() for w in walks)
        for w in walks:
            for u, v, t in zip(w.nodes, w.nodes[1:], w.times):
                assert g.has_edge(u, v, t)

    @pytest.mark.slow
    def test_temporal_validity_suite(self, graph_factory):
        """Test 10⁵ walks over 50 random graphs and all nine F_s x F_Γ variants."""
        variants = list(product(BiasKind, BiasKind))
        budget = WalkBudget(beta=16_000, omega=3, max_len=10, relax=True)
        temporal_count = 0
        for index in range(50):
            g = graph_factory(20, 150, seed=1000 + index, max_time=30, directed=index % 5 == 4)
            edges = {(e.src, e.dst, e.time) for e in g.iter_edges()}
            if not g.directed:
                edges |= {(v, u, t) for u, v, t in edges}
            fs, fg = variants[index % len(variants)]

            walks = generate_walks(g, budget, fs, fg, seed=index)

            temporal = [w for w in walks if w.kind is WalkKind.TEMPORAL]
            relaxed = [w for w in walks if w.kind is WalkKind.RELAXED]
            assert len(temporal) + len(relaxed) == len(walks)
            for w in temporal:
                assert w.is_time_respecting()
                assert all(step in edges for step in zip(w.nodes, w.nodes[1:], w.times))
            covered = {v for w in temporal for v in w.nodes}
            starts = [w.nodes[0] for w in relaxed]
            assert len(relaxed) <= g.n_nodes
            assert len(set(starts)) == len(starts)
            assert not covered & set(starts)
            temporal_count += len(temporal)
        assert temporal_count >= 100_000

    def test_deterministic_for_seed(self, random_graph):
        """Test that a seed reproduces the corpus."""
        budget = WalkBudget(beta=200, omega=3, max_len=10)

        first = generate_walks(random_graph, budget, seed=9)
        second = generate_walks(random_graph, budget, seed=9)

        assert [w.nodes for w in first] == [w.nodes for w in second]

    def test_independent_of_threads(self, random_graph):
        """Test that the corpus does not depend on the thread count."""
        budget = WalkBudget(beta=300, omega=3, max_len=10)

        single = generate_walks(random_graph, budget, seed=5, threads=1)
        parallel = generate_walks(random_graph, budget, seed=5, threads=3)

        assert [w.nodes for w in single] == [w.nodes for w in parallel]
        assert [w.times for w in single] == [w.times for w in parallel]

    def test_relaxed_walks_cover_unreachable_nodes(self):
        """Test that nodes missed by every kept walk get a tagged fallback walk."""
        g = TemporalGraph.from_records([("a", "b", 1), ("b", "c", 2), ("c", "d", 3), ("x", "y", 10)])
        budget = WalkBudget(beta=2, omega=3, max_len=10, relax=True)

        walks = generate_walks(g, budget, seed=0)

        relaxed = [w for w in walks if w.kind is WalkKind.RELAXED]
        starts = {w.nodes[0] for w in relaxed}
        assert {g.node_id("x"), g.node_id("y")} <= starts
        assert all(len(w) == 3 for w in relaxed)
        covered = {v for w in walks for v in w.nodes}
        assert covered == set(range(g.n_nodes))

    def test_no_relax(self):
        """Test that relax=False leaves uncovered nodes out."""
        g = TemporalGraph.from_records([("a", "b", 1), ("b", "c", 2), ("c", "d", 3), ("x", "y", 10)])

        walks = generate_walks(g, WalkBudget(beta=2, omega=3, max_len=10, relax=False), seed=0)

        assert all(w.kind is WalkKind.TEMPORAL for w in walks)
        assert g.node_id("x") not in {v for w in walks for v in w.nodes}

    def test_rejection_guard(self):
        """Test that a graph unable to supply length-ω walks aborts."""
        g = TemporalGraph.from_records([("a", "b", 5), ("b", "c", 5), ("c", "a", 5)])

        with pytest.raises(WalkGenerationError):
            generate_walks(g, WalkBudget(beta=1, omega=3, max_len=10), seed=0)

    def test_empty_graph(self):
        """Test that walks need at least one edge."""
        with pytest.raises(EmptyGraphError):
            generate_walks(TemporalGraph.empty(), WalkBudget(beta=1, omega=2, max_len=4))


class TestWalkOracle:
    """Tests comparing sampled walks with exhaustive enumeration."""

    @staticmethod
    def _check(g, seed, beta=100_000, max_len=4):
        budget = WalkBudget(beta=beta, omega=2, max_len=max_len, relax=False)
        walks = _full_cap_walks(generate_walks(g, budget, seed=seed), budget)
        oracle = _enumerate_walks(g, max_len)

        statistic, dof, pvalue, unexpected = _oracle_fit(walks, oracle)

        assert not unexpected
        seen = {(tuple(w.nodes), tuple(w.times)) for w in walks}
        assert all(key in seen for key, p in oracle.items() if p * len(walks) >= 20)
        return statistic, dof, pvalue

    def test_reference_stream(self, stream_graph):
        """Test uniform/uniform path frequencies on the reference stream with a χ² test."""
        _, dof, pvalue = self._check(stream_graph, seed=3)

        assert dof > 0
        assert pvalue > 0.01

    @pytest.mark.parametrize("seed", range(5))
    def test_small_random_graphs(self, graph_factory, seed):
        """Test sampled support and frequencies on small random graphs."""
        g = graph_factory(5, 9, seed=100 + seed, max_time=5)

        _, _, pvalue = self._check(g, seed=seed, beta=30_000)

        assert pvalue > 1e-4

    @pytest.mark.slow
    def test_graph_corpus(self, graph_factory):
        """Test 200 graphs with at most 6 nodes and 10 edges: support and pooled χ²."""
        rng = np.random.default_rng(2024)
        total_statistic, total_dof = 0.0, 0
        for index in range(200):
            n_nodes = int(rng.integers(3, 7))
            n_edges = int(rng.integers(2, 11))
            g = graph_factory(n_nodes, n_edges, seed=index, max_time=6, directed=index % 4 == 3)

            statistic, dof, pvalue = self._check(g, seed=index)

            assert pvalue > 1e-5, f"graph {index}"
            total_statistic += statistic
            total_dof += dof
        assert chi2.sf(total_statistic, total_dof) > 0.01


class TestStaticWalks:
    """Tests for time-ignoring walks."""

    def test_can_go_back_in_time(self, stream_graph):
        """Test that static walks produce v4 -> v1 -> v2."""
        walks = static_walks(stream_graph, WalkBudget(beta=3000, omega=2, max_len=6, relax=False), seed=0)

        assert any(_contains(w, (3, 0, 1)) for w in walks)
        assert all(w.kind is WalkKind.STATIC for w in walks)

    def test_lengths_concentrate_at_cap(self, stream_graph):
        """Test that static walks on a connected graph reach the length cap."""
        walks = static_walks(stream_graph, WalkBudget(beta=500, omega=2, max_len=5, relax=False), seed=1)

        full = sum(1 for w in walks if len(w) == 5)
        assert full >= 0.9 * (len(walks) - 1)

    def test_isolated_node_never_visited(self, stream_edges):
        """Test that a degree-0 node never appears in a walk."""
        g = TemporalGraph.from_records(stream_edges, labels=["iso"])
        iso = g.node_id("iso")

        walks = static_walks(g, WalkBudget(beta=500, omega=2, max_len=6), seed=2)

        assert all(iso not in w.nodes for w in walks)

    def test_budget_accounting(self, random_graph):
        """Test that static walks use the same β bookkeeping."""
        budget = WalkBudget(beta=250, omega=4, max_len=9, relax=False)

        walks = static_walks(random_graph, budget, seed=3)

        assert budget.beta <= _windows(walks, 4) < budget.beta + budget.max_len

    def test_empty_graph(self):
        """Test that static walks need at least one edge."""
        with pytest.raises(EmptyGraphError):
            static_walks(TemporalGraph.empty(), WalkBudget(beta=1, omega=2, max_len=4))


class TestBackwardWalks:
    """Tests for walks ending in a new edge."""

    def test_undirected_extensions(self, stream_graph):
        """Test the possible backward extensions of v2 before time 8."""
        walks = backward_walks_for_edge(
            stream_graph, TemporalEdge(1, 4, 8), 50, 2, 80, BiasKind.UNIFORM, make_rng(0)
        )

        allowed = {(0, 1, 4): [1, 8], (2, 1, 4): [2, 8]}
        assert len(walks) == 50
        for w in walks:
            assert tuple(w.nodes) in allowed
            assert w.times == allowed[tuple(w.nodes)]

    def test_directed_uses_in_edges(self, stream_edges):
        """Test that a directed graph only follows edges into the source."""
        g = TemporalGraph.from_records(stream_edges, directed=True)

        walks = backward_walks_for_edge(g, TemporalEdge(1, 4, 8), 10, 2, 80, BiasKind.UNIFORM, make_rng(0))

        assert all(w.nodes == [0, 1, 4] and w.times == [1, 8] for w in walks)

    def test_fresh_source(self, stream_graph):
        """Test that a source without earlier edges yields [src, dst]."""
        stream_graph.add_edge("9", "1", 12)
        edge = TemporalEdge(stream_graph.node_id("9"), stream_graph.node_id("1"), 12)

        walks = backward_walks_for_edge(stream_graph, edge, 5, 2, 80, BiasKind.EXPONENTIAL, make_rng(1))

        assert all(w.nodes == [edge.src, edge.dst] for w in walks)

    def test_ends_with_new_edge_and_respects_time(self, random_graph):
        """Test that reversed backward walks are forward temporal walks."""
        edge = random_graph.edge(random_graph.n_edges - 1)

        walks = backward_walks_for_edge(random_graph, edge, 20, 2, 6, BiasKind.LINEAR, make_rng(3))

        for w in walks:
            assert w.nodes[-2:] == [edge.src, edge.dst]
            assert w.times[-1] == edge.time
            assert w.is_time_respecting()
            assert len(w) <= 6

    def test_unknown_edge(self, stream_graph):
        """Test that the new edge must already be inserted."""
        with pytest.raises(DataError):
            backward_walks_for_edge(stream_graph, TemporalEdge(0, 4, 9), 1, 2, 80, BiasKind.UNIFORM, make_rng(0))


class TestRelaxedWalks:
    """Tests for fallback walks."""

    def test_only_missing_nodes(self, stream_graph):
        """Test that covered nodes get no fallback walk."""
        covered = [TemporalWalk(nodes=[0, 1, 2, 3], times=[1, 2, 3])]

        extra = relaxed_walks(stream_graph, covered, 3, seed=0)

        assert sorted(w.nodes[0] for w in extra) == [4, 5]
        assert all(w.kind is WalkKind.RELAXED for w in extra)


class TestWalkStats:
    """Tests for walk statistics."""

    def test_histogram_and_conservation(self):
        """Test the length histogram and count conservation."""
        walks = [TemporalWalk(nodes=[0, 1, 2], times=[1, 2]), TemporalWalk(nodes=[2, 3, 0, 1, 4], times=[1, 2, 3, 4])]

        stats = walk_stats(walks)

        assert stats.length_histogram == {3: 1, 5: 1}
        assert sum(stats.occurrences.values()) == 8
        assert sum(stats.starts.values()) == 2
        assert stats.starts == {0: 1, 2: 1}

    def test_tables(self):
        """Test CSV-ready tables with labels."""
        walks = [TemporalWalk(nodes=[0, 1], times=[1]), TemporalWalk(nodes=[1, 0], times=[1])]

        tables = walk_stats(walks).tables(["a", "b"])

        assert list(tables["length"].columns) == ["length", "count"]
        assert tables["length"].values.tolist() == [[2, 2]]
        assert tables["occurrences"].values.tolist() == [["a", 2], ["b", 2]]
        assert tables["starts"].values.tolist() == [["a", 1], ["b", 1]]

    def test_empty(self):
        """Test that statistics need at least one walk."""
        with pytest.raises(DataError):
            walk_stats([])

    def test_write_walks(self, tmp_path):
        """Test one labelled walk per line."""
        walks = [TemporalWalk(nodes=[0, 1, 2], times=[1, 2]), TemporalWalk(nodes=[2, 0], times=[5])]

        written = write_walks(walks, tmp_path / "walks.txt", ["a", "b", "c"])

        assert written == 2
        assert (tmp_path / "walks.txt").read_text(encoding="utf-8") == "a b c\nc a\n"
