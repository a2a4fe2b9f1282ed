#!/usr/bin/env python3
"""
Unit tests for configuration resolution.
"""

import json

import pytest

from apps.ctdne.config import ENV_SEED, normalize_key, read_config_file, resolve_config
from apps.ctdne.errors import ConfigError


class TestNormalizeKey:
    """Tests for normalize_key."""

    @pytest.mark.parametrize("raw,expected", [
        ("--walk-length", "walk_length"),
        ("walk-length", "walk_length"),
        ("L", "walk_length"),
        ("R", "walks_per_node"),
        ("D", "dimension"),
        ("T", "snapshots"),
        ("Omega", "omega"),
    ])
    def test_aliases(self, raw, expected):
        """Test flag spellings and short aliases."""
        assert normalize_key(raw) == expected


class TestReadConfigFile:
    """Tests for read_config_file."""

    def test_key_values(self, tmp_path):
        """Test comments, blank lines and aliases."""
        path = tmp_path / "run.cfg"
        path.write_text("# walks\nomega = 5\n\nL=40  # max length\nfs=exp\n", encoding="utf-8")

        assert read_config_file(path) == {"omega": "5", "walk_length": "40", "fs": "exp"}

    def test_bad_line(self, tmp_path):
        """Test that a line without '=' names its line number."""
        path = tmp_path / "run.cfg"
        path.write_text("omega=5\nnonsense\n", encoding="utf-8")

        with pytest.raises(ConfigError, match="line 2"):
            read_config_file(path)

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file is a configuration error."""
        with pytest.raises(ConfigError):
            read_config_file(tmp_path / "missing.cfg")


class TestResolveConfig:
    """Tests for resolve_config layering."""

    def test_defaults(self):
        """Test resolution without any layer."""
        cfg = resolve_config({}, environ={})

        assert cfg.seed == 0
        assert cfg.omega == 10

    def test_flags_override_file(self, tmp_path):
        """Test that flags win over the config file."""
        path = tmp_path / "run.cfg"
        path.write_text("omega=5\nD=64\n", encoding="utf-8")

        cfg = resolve_config({"omega": 4, "dimension": None}, config_file=path, environ={})

        assert cfg.omega == 4
        assert cfg.dimension == 64

    def test_env_seed(self, tmp_path):
        """Test that the environment seed sits between file and flags."""
        path = tmp_path / "run.cfg"
        path.write_text("seed=3\n", encoding="utf-8")

        assert resolve_config({}, config_file=path, environ={ENV_SEED: "11"}).seed == 11
        assert resolve_config({"seed": 2}, config_file=path, environ={ENV_SEED: "11"}).seed == 2

    def test_manifest_replay(self, tmp_path):
        """Test that a manifest restores its configuration and ignores the env seed."""
        manifest = tmp_path / "manifest.json"
        manifest.write_text(
            json.dumps({"command": "train", "config": {"omega": 6, "seed": 8, "dimension": 32}}), encoding="utf-8"
        )

        cfg = resolve_config({"dimension": 16}, manifest=manifest, environ={ENV_SEED: "99"})

        assert cfg.omega == 6
        assert cfg.seed == 8
        assert cfg.dimension == 16

    def test_bad_manifest(self, tmp_path):
        """Test that an unreadable manifest is a configuration error."""
        manifest = tmp_path / "manifest.json"
        manifest.write_text("{not json", encoding="utf-8")

        with pytest.raises(ConfigError):
            resolve_config({}, manifest=manifest, environ={})

    def test_invalid_merged_value(self):
        """Test that the merged mapping is validated."""
        with pytest.raises(ConfigError):
            resolve_config({"omega": 1}, environ={})
