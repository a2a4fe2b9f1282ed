#!/usr/bin/env python3
"""
Write a synthetic two-community temporal edge list.

The first part of the stream is uniform noise, the rest connects nodes of the
same community only, so future links are predictable from temporal structure.

Usage:
    python scripts/generate_synthetic_stream.py OUT_FILE [N_NODES] [N_EDGES] [NOISE_FRACTION] [SEED]
"""

import sys
from pathlib import Path

# Make the apps package importable when run from a checkout
project_root = Path(__file__).resolve().parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from apps.ctdne.synthetic import two_community_stream, write_edge_list  # noqa: E402


def generate(out_file: Path, n_nodes: int, n_edges: int, noise_fraction: float, seed: int) -> Path:
    """
    Generate and write the stream.

    Args:
        out_file: Destination edge list (.gz accepted)
        n_nodes: Number of nodes, split into two equal communities
        n_edges: Number of timestamped edges
        noise_fraction: Leading share of uniformly random edges
        seed: Random seed
    """
    stream = two_community_stream(n_nodes=n_nodes, n_edges=n_edges, noise_fraction=noise_fraction, seed=seed)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(stream.records, out_file)
    print(f"Wrote {len(stream.records)} edges over {n_nodes} nodes to {out_file}")
    return out_file


if __name__ == '__main__':
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(1)

    out_file = Path(sys.argv[1])
    n_nodes = int(sys.argv[2]) if len(sys.argv) > 2 else 200
    n_edges = int(sys.argv[3]) if len(sys.argv) > 3 else 5000
    noise_fraction = float(sys.argv[4]) if len(sys.argv) > 4 else 0.5
    seed = int(sys.argv[5]) if len(sys.argv) > 5 else 0

    generate(out_file, n_nodes, n_edges, noise_fraction, seed)
