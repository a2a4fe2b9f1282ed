#!/usr/bin/env python3
"""
Synthetic temporal benchmark streams.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

from apps.ctdne.errors import ConfigError
from apps.ctdne.sampling import make_rng
from apps.ctdne.temporal_graph import EdgeRecord
from apps.ctdne.utils.io_helper import open_text

logger = logging.getLogger(__name__)

SYNTHETIC_STREAM = 1 << 48


@dataclass
class SyntheticStream:
    """Edge records in time order plus the planted community of every node label"""
    records: List[EdgeRecord]
    communities: Dict[str, int] = field(default_factory=dict)


def two_community_stream(
    n_nodes: int = 200,
    n_edges: int = 5000,
    noise_fraction: float = 0.5,
    seed: int = 0,
) -> SyntheticStream:
    """
    Two planted communities; the first noise_fraction of the stream connects
    uniformly random node pairs, the rest only connects nodes of the same
    community. Edge i has timestamp i.
    """
    if n_nodes < 4:
        raise ConfigError(f"need at least 4 nodes, got {n_nodes}")
    if n_edges < 1:
        raise ConfigError(f"need at least 1 edge, got {n_edges}")
    if not 0.0 <= noise_fraction < 1.0:
        raise ConfigError(f"noise fraction must be in [0, 1), got {noise_fraction}")

    rng = make_rng(seed, SYNTHETIC_STREAM)
    half = n_nodes // 2
    members = [list(range(0, half)), list(range(half, n_nodes))]
    communities = {str(v): 0 if v < half else 1 for v in range(n_nodes)}
    n_noise = int(noise_fraction * n_edges)

    records: List[EdgeRecord] = []
    for t in range(n_edges):
        if t < n_noise:
            u, v = (int(x) for x in rng.choice(n_nodes, size=2, replace=False))
        else:
            group = members[int(rng.integers(2))]
            i, j = rng.choice(len(group), size=2, replace=False)
            u, v = group[int(i)], group[int(j)]
        records.append((str(u), str(v), t))
    logger.debug(f"Generated {n_edges} edges over {n_nodes} nodes ({n_noise} noise edges)")
    return SyntheticStream(records=records, communities=communities)


def write_edge_list(records: List[EdgeRecord], path: Union[str, Path]) -> Path:
    """Write 'src dst time' lines (gzip when the path ends in .gz)"""
    path = Path(path)
    with open_text(path, "w") as f:
        for src, dst, t in records:
            f.write(f"{src} {dst} {t}\n")
    return path
