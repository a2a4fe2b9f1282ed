#!/usr/bin/env python3
"""
Integration tests running the CLI commands end to end on one dataset.
"""

import pandas as pd
import pytest

from apps.ctdne.cli import EXIT_OK, main
from apps.ctdne.embedder import load_embeddings
from apps.ctdne.synthetic import two_community_stream, write_edge_list
from apps.ctdne.utils.io_helper import read_json

pytestmark = [pytest.mark.integration, pytest.mark.slow]

SMALL = ["--omega", "3", "--L", "10", "--R", "2", "--D", "16", "--seeds", "2"]


@pytest.fixture
def dataset(tmp_path):
    """Synthetic stream written as a gzipped edge list"""
    stream = two_community_stream(n_nodes=40, n_edges=600, noise_fraction=0.3, seed=11)
    return write_edge_list(stream.records, tmp_path / "communities.txt.gz")


class TestCLIPipeline:
    """Tests for every command on the same input."""

    def test_all_commands(self, dataset, tmp_path, capsys):
        """Test that each command succeeds and writes its outputs."""
        outputs = {}
        for command, extra in [
            ("stats", []),
            ("train", ["--export-walks"]),
            ("stream", ["--warmup", "0.8", "--walks-per-edge", "2"]),
            ("eval", ["--variant", "static"]),
            ("snapshots", ["--T", "4"]),
        ]:
            out = tmp_path / command
            code = main([command, "--input", str(dataset), *SMALL, *extra, "--out", str(out)])
            capsys.readouterr()
            assert code == EXIT_OK, command
            manifest = read_json(out / "manifest.json")
            assert manifest["command"] == command
            outputs[command] = out

        assert read_json(outputs["stats"] / "graph_stats.json")["n_edges"] == 600
        assert load_embeddings(outputs["train"] / "embeddings.txt").dimension == 16
        assert read_json(outputs["stream"] / "summary.json")["streamed_edges"] == 120
        assert set(pd.read_csv(outputs["eval"] / "results.csv")["variant"]) == {"static"}
        assert len(pd.read_csv(outputs["snapshots"] / "comparison.csv")) == 2

    def test_train_is_reproducible(self, dataset, tmp_path, capsys):
        """Test that one seed gives identical embedding files across thread counts."""
        for name, threads in [("one", "1"), ("four", "4")]:
            main(["train", "--input", str(dataset), *SMALL, "--seed", "3", "--threads", threads,
                  "--out", str(tmp_path / name)])
        capsys.readouterr()

        first = (tmp_path / "one" / "embeddings.txt").read_text(encoding="utf-8")
        second = (tmp_path / "four" / "embeddings.txt").read_text(encoding="utf-8")
        assert first == second
