#!/usr/bin/env python3
"""
Initial-edge (F_s) and temporal-neighbor (F_Γ) distributions.

Each distribution is uniform, linear (rank based) or exponential. Exponentials
are evaluated in shifted form, exp(x - max(x)), on time differences multiplied
by a rescale factor, so no timestamp range can overflow them. Sampling is an
inverse-CDF binary search (numpy.searchsorted) except for uniform neighbor
selection, which draws an index directly.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from apps.ctdne.errors import EmptyGraphError
from apps.ctdne.models import BiasKind, Favor, SamplingOptions, TemporalEdge
from apps.ctdne.temporal_graph import NeighborView, TemporalGraph

logger = logging.getLogger(__name__)

CDF_TOLERANCE = 1e-9

# walk index lives in the top 64-bit word of the 256-bit Philox counter
WALK_COUNTER_SHIFT = 192


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Counter-based generator keyed by (seed, *stream).

    Walk i of a run uses make_rng(seed, i), so the sample sequence of each
    walk is independent of how walks are scheduled across workers.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


class WalkStreams:
    """
    Per-walk uniform blocks under one Philox key.

    The key is hashed once from (seed, *stream); walk i reads from counter
    block i << 192, so each walk has its own stream without a SeedSequence per
    walk and the draws of walk i do not depend on which worker samples it.
    """

    def __init__(self, seed: int, *stream: int):
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        self.key = np.random.SeedSequence([self.seed, *self.stream]).generate_state(2, np.uint64)

    def generator(self, index: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key, counter=int(index) << WALK_COUNTER_SHIFT))

    def uniforms(self, index: int, size: int) -> np.ndarray:
        """`size` uniforms in [0, 1) owned by walk `index`"""
        return self.generator(index).random(size)


@dataclass(frozen=True)
class EdgeCdf:
    """Cumulative distribution over the time-sorted edge array"""
    cumulative: np.ndarray
    kind: BiasKind

    def __len__(self) -> int:
        return int(self.cumulative.shape[0])

    @property
    def probabilities(self) -> np.ndarray:
        return np.diff(self.cumulative, prepend=0.0)

    @classmethod
    def from_weights(cls, weights: Sequence[float], kind: BiasKind = BiasKind.UNIFORM) -> "EdgeCdf":
        """Normalize non-negative weights into a CDF ending at exactly 1.0"""
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.shape[0] == 0:
            raise EmptyGraphError("edge distribution needs at least one edge")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("edge weights must be finite and non-negative")
        total = w.sum()
        if total <= 0:
            raise ValueError("edge weights sum to zero")
        cumulative = np.cumsum(w / total)
        cumulative[-1] = 1.0
        return cls(cumulative=cumulative, kind=kind)


def _linear_ranks(times: np.ndarray, favor: Favor) -> np.ndarray:
    """Ranks 1..K by ascending time (stable); EARLY flips them so the earliest gets K"""
    k = times.shape[0]
    order = np.argsort(times, kind="stable")
    ranks = np.empty(k, dtype=np.float64)
    ranks[order] = np.arange(1, k + 1, dtype=np.float64)
    if favor is Favor.EARLY:
        ranks = (k + 1) - ranks
    return ranks


def _shifted_exp(times: np.ndarray, scale: float, favor: Favor) -> np.ndarray:
    """exp of rescaled time offsets, shifted so the largest exponent is 0"""
    offsets = (times - times.min()).astype(np.float64) * scale
    if favor is Favor.EARLY:
        offsets = -offsets
    return np.exp(offsets - offsets.max())


def build_initial_edge_cdf(
    g: TemporalGraph,
    kind: BiasKind,
    scale: Optional[float] = None,
) -> EdgeCdf:
    """
    F_s over g's edges.

    Uniform: 1/M. Linear: proportional to the ascending time rank (1..M, ties by
    edge order). Exponential: proportional to exp[(T(e) - t_min) * scale],
    scale defaulting to 1 / (t_max - t_min); falls back to uniform when all
    edges share one timestamp.
    """
    m = g.n_edges
    if m == 0:
        raise EmptyGraphError("cannot build an initial edge distribution for an empty graph")
    kind = BiasKind(kind)
    times = g.edge_arrays()[2]

    if kind is BiasKind.UNIFORM:
        cumulative = np.arange(1, m + 1, dtype=np.float64) / m
        cumulative[-1] = 1.0
        return EdgeCdf(cumulative=cumulative, kind=kind)

    if kind is BiasKind.LINEAR:
        # edge array is already time sorted, so position + 1 is the rank
        return EdgeCdf.from_weights(np.arange(1, m + 1, dtype=np.float64), kind)

    if g.t_max == g.t_min:
        logger.debug("All edges share one timestamp; exponential F_s falls back to uniform")
        return EdgeCdf.from_weights(np.ones(m), kind)
    if scale is None:
        scale = 1.0 / (g.t_max - g.t_min)
    return EdgeCdf.from_weights(_shifted_exp(times, scale, Favor.LATE), kind)


def sample_initial_edge(cdf: EdgeCdf, g: TemporalGraph, rng: np.random.Generator) -> TemporalEdge:
    """Draw an edge from F_s by binary search over the CDF"""
    return g.edge(sample_initial_index(cdf, rng))


def sample_initial_index(cdf: EdgeCdf, rng: np.random.Generator) -> int:
    """Index into the edge array drawn from F_s"""
    return initial_index_at(cdf, rng.random())


def initial_index_at(cdf: EdgeCdf, u: float) -> int:
    """Inverse F_s at the uniform u"""
    m = len(cdf)
    if cdf.kind is BiasKind.UNIFORM:
        return min(int(u * m), m - 1)
    return min(int(np.searchsorted(cdf.cumulative, u, side="right")), m - 1)


def neighbor_weights(
    neighbors: NeighborView,
    kind: BiasKind,
    scale: float = 1.0,
    exp_favor: Favor = Favor.LATE,
    linear_favor: Favor = Favor.EARLY,
) -> np.ndarray:
    """
    F_Γ probabilities over a temporal neighborhood.

    Uniform: 1/|Γ|. Exponential: proportional to exp[τ(w) - τ(v)] after
    rescaling; with exp_favor=LATE later neighbors weigh more, EARLY negates the
    exponent. Linear: proportional to a 1..K rank; with linear_favor=EARLY the
    neighbor closest in time to the current node gets rank K.
    """
    k = len(neighbors)
    if k == 0:
        raise ValueError("temporal neighborhood is empty; the walk should terminate")
    kind = BiasKind(kind)
    if kind is BiasKind.UNIFORM or k == 1:
        return np.full(k, 1.0 / k)
    if kind is BiasKind.LINEAR:
        weights = _linear_ranks(neighbors.times, linear_favor)
    else:
        weights = _shifted_exp(neighbors.times, scale, exp_favor)
    return weights / weights.sum()


def sample_neighbor(
    weights: Optional[np.ndarray],
    neighbors: NeighborView,
    rng: np.random.Generator,
    kind: BiasKind = BiasKind.LINEAR,
) -> Tuple[int, int]:
    """
    Pick one (neighbor, time) pair.

    Uniform kind ignores the weights and draws an index in O(1); other kinds
    search the prefix sums of the weights.
    """
    index = sample_neighbor_index(weights, len(neighbors), rng, kind)
    return int(neighbors.nodes[index]), int(neighbors.times[index])


def sample_neighbor_index(
    weights: Optional[np.ndarray],
    k: int,
    rng: np.random.Generator,
    kind: BiasKind = BiasKind.LINEAR,
) -> int:
    """Index drawn from the neighbor distribution"""
    if kind is BiasKind.UNIFORM or weights is None:
        return int(rng.integers(k))
    cumulative = np.cumsum(weights)
    u = rng.random() * cumulative[-1]
    return min(int(np.searchsorted(cumulative, u, side="right")), k - 1)


class NeighborSampler:
    """F_Γ bound to a bias kind and sampling options"""

    def __init__(self, kind: BiasKind, options: Optional[SamplingOptions] = None):
        self.kind = BiasKind(kind)
        self.options = options or SamplingOptions()

    def scale_for(self, g: TemporalGraph) -> float:
        return self.options.scale_for(g.t_min, g.t_max)

    @property
    def uniform(self) -> bool:
        return self.kind is BiasKind.UNIFORM

    def choose(self, neighbors: NeighborView, rng: np.random.Generator, scale: float) -> int:
        """Index of the chosen entry in `neighbors`"""
        return self.pick(neighbors, rng.random(), scale)

    def pick(self, neighbors: NeighborView, u: float, scale: float) -> int:
        """Inverse F_Γ at the uniform u"""
        k = len(neighbors)
        if self.kind is BiasKind.UNIFORM or k == 1:
            return min(int(u * k), k - 1)
        weights = neighbor_weights(
            neighbors,
            self.kind,
            scale=scale,
            exp_favor=self.options.exp_favor,
            linear_favor=self.options.linear_favor,
        )
        cumulative = np.cumsum(weights)
        return min(int(np.searchsorted(cumulative, u * cumulative[-1], side="right")), k - 1)
