#!/usr/bin/env python3
"""
Skip-gram with negative sampling over walk corpora.

Each center position trains against every context within ±ω (one positive
target per context plus k negatives drawn from the unigram^0.75 walk-frequency
distribution). The center uses its input vector, contexts and negatives use
output vectors. All pairs of one walk form a single SGD step whose gradients
are taken at the vectors from before that walk.

Batch training decays the step size linearly over the total pair count.
Online updates use a fixed step and grow the matrix for unseen nodes.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from apps.ctdne.errors import DataError, EmbeddingFormatError, InvariantViolation
from apps.ctdne.models import TemporalWalk, TrainConfig
from apps.ctdne.sampling import make_rng
from apps.ctdne.utils.io_helper import open_text

logger = logging.getLogger(__name__)

# rng stream tags
INIT_STREAM = 1 << 42
TRAIN_STREAM = 1 << 43
ONLINE_STREAM = 1 << 44

RESAMPLE_ROUNDS = 8


@dataclass
class EmbeddingMatrix:
    """
    Node embeddings keyed by dense node id.

    in_vectors are the embeddings; out_vectors are the context parameters.
    counts holds walk-frequency counts feeding the noise distribution.
    """
    labels: List[str]
    in_vectors: np.ndarray
    out_vectors: np.ndarray
    counts: np.ndarray
    seed: int = 0
    updates: int = 0
    _noise: Optional[np.ndarray] = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def initialize(cls, labels: Sequence[str], dimension: int, seed: int = 0) -> "EmbeddingMatrix":
        """in vectors uniform in [-0.5/D, 0.5/D], out vectors zero"""
        if dimension < 1:
            raise DataError(f"embedding dimension must be >= 1, got {dimension}")
        n = len(labels)
        rng = make_rng(seed, INIT_STREAM)
        bound = 0.5 / dimension
        return cls(
            labels=[str(label) for label in labels],
            in_vectors=rng.uniform(-bound, bound, size=(n, dimension)),
            out_vectors=np.zeros((n, dimension)),
            counts=np.zeros(n, dtype=np.int64),
            seed=seed,
        )

    @property
    def n_nodes(self) -> int:
        return int(self.in_vectors.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.in_vectors.shape[1])

    def index(self, label: object) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"no embedding for node {label!r}")

    def vector(self, label: object) -> np.ndarray:
        """Embedding row of a node label"""
        return self.in_vectors[self.index(label)]

    def score(self, i: int, j: int) -> float:
        """σ(z_i · z'_j)"""
        return float(expit(self.in_vectors[i] @ self.out_vectors[j]))

    def grow(self, labels: Sequence[str]) -> int:
        """
        Append rows for labels beyond the current row count.

        `labels` is the full label list (row i <-> labels[i]); new rows are
        initialized from a per-row rng stream. Returns the number of rows added.
        """
        n, d = self.n_nodes, self.dimension
        added = len(labels) - n
        if added <= 0:
            return 0
        bound = 0.5 / d
        fresh = np.vstack([make_rng(self.seed, INIT_STREAM, row).uniform(-bound, bound, size=d)
                           for row in range(n, len(labels))])
        self.in_vectors = np.vstack([self.in_vectors, fresh])
        self.out_vectors = np.vstack([self.out_vectors, np.zeros((added, d))])
        self.counts = np.concatenate([self.counts, np.zeros(added, dtype=np.int64)])
        self.labels.extend(str(label) for label in labels[n:])
        return added

    def count_walks(self, walks: Sequence[TemporalWalk]) -> None:
        for walk in walks:
            np.add.at(self.counts, np.asarray(walk.nodes, dtype=np.int64), 1)

    def refresh_noise(self, exponent: float = 0.75) -> None:
        """Rebuild the cumulative unigram^exponent table"""
        weights = np.power(self.counts.astype(np.float64), exponent)
        total = weights.sum()
        self._noise = np.cumsum(weights) / total if total > 0 else None

    def draw_negatives(self, rng: np.random.Generator, shape: Tuple[int, ...]) -> Optional[np.ndarray]:
        if self._noise is None:
            return None
        picks = np.searchsorted(self._noise, rng.random(shape), side="right")
        return np.minimum(picks, self._noise.shape[0] - 1)

    def check_finite(self, rows: Optional[np.ndarray] = None) -> None:
        """Raise InvariantViolation on NaN/inf entries (all rows, or only `rows`)"""
        in_part = self.in_vectors if rows is None else self.in_vectors[rows]
        out_part = self.out_vectors if rows is None else self.out_vectors[rows]
        if not (np.all(np.isfinite(in_part)) and np.all(np.isfinite(out_part))):
            raise InvariantViolation("embedding matrix contains NaN or infinite entries")

    def same_vectors(self, other: "EmbeddingMatrix") -> bool:
        """Labels and embedding rows are identical"""
        return self.labels == other.labels and np.array_equal(self.in_vectors, other.in_vectors)

    def copy(self) -> "EmbeddingMatrix":
        return EmbeddingMatrix(
            labels=list(self.labels),
            in_vectors=self.in_vectors.copy(),
            out_vectors=self.out_vectors.copy(),
            counts=self.counts.copy(),
            seed=self.seed,
            updates=self.updates,
            _noise=None if self._noise is None else self._noise.copy(),
        )


def sgns_loss_and_grads(
    center_vec: np.ndarray,
    target_vecs: np.ndarray,
    labels: np.ndarray,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Negative-sampling loss of one center against its targets and its gradients.

    loss = -Σ_k [y_k log σ(x_k) + (1 - y_k) log σ(-x_k)], x_k = target_k · center.

    Returns:
        (loss, d loss / d center, d loss / d targets)
    """
    x = target_vecs @ center_vec
    y = np.asarray(labels, dtype=np.float64)
    loss = float(np.sum(y * np.logaddexp(0.0, -x) + (1.0 - y) * np.logaddexp(0.0, x)))
    err = expit(x) - y
    return loss, err @ target_vecs, np.outer(err, center_vec)


def apply_sgd_step(
    z: EmbeddingMatrix,
    centers: Union[int, np.ndarray],
    contexts: np.ndarray,
    negatives: Optional[np.ndarray],
    lr: float,
    valid: Optional[np.ndarray] = None,
) -> None:
    """
    One SGD step over (center, context) pairs and their negatives.

    Every gradient is taken at the vectors as they were before the step, so
    repeated rows accumulate. Scores go through one product of the distinct
    center rows with the distinct target rows.

    Args:
        centers: One input row for all contexts, or (c,) rows paired with them.
        contexts: (c,) positive target rows.
        negatives: (c, k) noise rows, or None to train positives only.
        valid: (c, k) mask; masked negatives contribute nothing.
    """
    contexts = np.asarray(contexts, dtype=np.int64)
    centers = np.broadcast_to(np.asarray(centers, dtype=np.int64), contexts.shape)
    if negatives is None:
        targets = contexts[:, None]
        weights = np.ones(targets.shape, dtype=np.float64)
    else:
        targets = np.concatenate([contexts[:, None], negatives], axis=1)
        weights = np.ones(targets.shape, dtype=np.float64)
        if valid is not None:
            weights[:, 1:] = valid
    y = np.zeros(targets.shape)
    y[:, 0] = 1.0

    rows, center_slot = np.unique(centers, return_inverse=True)
    cols, target_slot = np.unique(targets.ravel(), return_inverse=True)
    center_slot = np.repeat(center_slot.ravel(), targets.shape[1])
    target_slot = target_slot.ravel()

    l1 = z.in_vectors[rows]
    l2 = z.out_vectors[cols]
    x = (l1 @ l2.T)[center_slot, target_slot]
    g = (y.ravel() - expit(x)) * lr * weights.ravel()
    coupling = np.bincount(
        center_slot * cols.shape[0] + target_slot,
        weights=g,
        minlength=rows.shape[0] * cols.shape[0],
    ).reshape(rows.shape[0], cols.shape[0])
    z.out_vectors[cols] += coupling.T @ l1
    z.in_vectors[rows] += coupling @ l2


def _walk_pairs(length: int, reach: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(center, context) positions with 1 <= |i - j| <= reach[i]"""
    positions = np.arange(length)
    gap = np.abs(positions[:, None] - positions[None, :])
    return np.nonzero((gap > 0) & (gap <= reach[:, None]))


def _pair_count(length: int, window: int) -> int:
    return sum(2 * (length - d) for d in range(1, min(window, length - 1) + 1))


def _negatives_for(
    z: EmbeddingMatrix,
    contexts: np.ndarray,
    k: int,
    rng: np.random.Generator,
) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """Noise rows per context, redrawing picks that hit the context itself"""
    negatives = z.draw_negatives(rng, (contexts.shape[0], k))
    if negatives is None:
        return None, None
    clash = negatives == contexts[:, None]
    for _ in range(RESAMPLE_ROUNDS):
        if not clash.any():
            break
        negatives[clash] = z.draw_negatives(rng, (int(clash.sum()),))
        clash = negatives == contexts[:, None]
    return negatives, ~clash


def _train_walks(
    z: EmbeddingMatrix,
    walks: Sequence[TemporalWalk],
    cfg: TrainConfig,
    rng: np.random.Generator,
    lr_schedule,
) -> int:
    """Run the skip-gram pass over walks, one step per walk; returns the number of pairs trained"""
    trained = 0
    for walk in walks:
        nodes = np.asarray(walk.nodes, dtype=np.int64)
        reach = np.full(nodes.shape[0], cfg.omega, dtype=np.int64)
        if cfg.shrink_window:
            reach -= rng.integers(cfg.omega, size=nodes.shape[0])
        center_pos, context_pos = _walk_pairs(nodes.shape[0], reach)
        if center_pos.shape[0] == 0:
            continue
        contexts = nodes[context_pos]
        negatives, valid = _negatives_for(z, contexts, cfg.negatives, rng)
        apply_sgd_step(z, nodes[center_pos], contexts, negatives, lr_schedule(trained), valid)
        trained += contexts.shape[0]
    return trained


def _check_walks(walks: Sequence[TemporalWalk], n_rows: int) -> None:
    for walk in walks:
        if len(walk) < 2:
            raise DataError(f"walks must hold at least 2 nodes, got {walk.nodes}")
        if min(walk.nodes) < 0 or max(walk.nodes) >= n_rows:
            raise DataError(f"walk references node ids outside 0..{n_rows - 1}")


def train(
    walks: Sequence[TemporalWalk],
    cfg: TrainConfig,
    labels: Optional[Sequence[str]] = None,
) -> EmbeddingMatrix:
    """
    Batch skip-gram training.

    Rows follow `labels` (row i <-> labels[i]); without labels, rows are
    0..max node id and labelled by their id.
    """
    if not walks:
        raise DataError("cannot train embeddings on an empty walk set")
    if labels is None:
        labels = [str(v) for v in range(max(max(w.nodes) for w in walks) + 1)]
    _check_walks(walks, len(labels))

    z = EmbeddingMatrix.initialize(labels, cfg.dimension, seed=cfg.seed)
    z.count_walks(walks)
    z.refresh_noise(cfg.ns_exponent)

    per_epoch = sum(_pair_count(len(w), cfg.omega) for w in walks)
    total = max(per_epoch * cfg.epochs, 1)

    for epoch in range(cfg.epochs):
        done_before = per_epoch * epoch
        if cfg.workers > 1:
            _train_hogwild(z, walks, cfg, epoch, done_before, total)
            continue
        rng = make_rng(cfg.seed, TRAIN_STREAM, epoch)

        def schedule(done: int) -> float:
            progress = min((done_before + done) / total, 1.0)
            return cfg.lr0 - (cfg.lr0 - cfg.lr_min) * progress

        trained = _train_walks(z, walks, cfg, rng, schedule)
        logger.info(f"Epoch {epoch + 1}/{cfg.epochs}: {trained} pairs, final step {schedule(trained):.6f}")

    z.check_finite()
    return z


def _train_hogwild(
    z: EmbeddingMatrix,
    walks: Sequence[TemporalWalk],
    cfg: TrainConfig,
    epoch: int,
    done_before: int,
    total: int,
) -> None:
    """Lock-free multi-writer epoch; overlapping row updates may be lost"""
    chunks = [walks[w::cfg.workers] for w in range(cfg.workers)]
    progress = [0] * cfg.workers

    def run(worker: int) -> int:
        rng = make_rng(cfg.seed, TRAIN_STREAM, epoch, worker)

        def schedule(done: int) -> float:
            progress[worker] = done
            fraction = min((done_before + sum(progress)) / total, 1.0)
            return cfg.lr0 - (cfg.lr0 - cfg.lr_min) * fraction

        return _train_walks(z, chunks[worker], cfg, rng, schedule)

    with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
        trained = sum(executor.map(run, range(cfg.workers)))
    logger.info(f"Epoch {epoch + 1}/{cfg.epochs}: {trained} pairs across {cfg.workers} workers")


def online_update(
    z: EmbeddingMatrix,
    walks: Sequence[TemporalWalk],
    cfg: TrainConfig,
    labels: Optional[Sequence[str]] = None,
) -> EmbeddingMatrix:
    """
    Incremental skip-gram update from walks around newly arrived edges.

    Grows rows for unseen nodes first (from `labels` when given, else by id),
    then applies the batch pair rules at the fixed online step size. An empty
    walk set leaves z untouched.
    """
    if not walks:
        return z
    with z._lock:
        if labels is not None:
            z.grow(labels)
        else:
            highest = max(max(w.nodes) for w in walks)
            if highest >= z.n_nodes:
                z.grow(z.labels + [str(v) for v in range(z.n_nodes, highest + 1)])
        _check_walks(walks, z.n_nodes)

        z.count_walks(walks)
        if z._noise is None or z.updates % cfg.noise_refresh == 0:
            z.refresh_noise(cfg.ns_exponent)

        rng = make_rng(cfg.seed, ONLINE_STREAM, z.updates)
        step = cfg.online_step
        _train_walks(z, walks, cfg, rng, lambda done: step)
        z.updates += 1
        z.check_finite(np.unique(np.concatenate([np.asarray(w.nodes) for w in walks])))
    return z


def _format_float(value: float) -> str:
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def save_embeddings(z: EmbeddingMatrix, path: Union[str, Path]) -> Path:
    """Write 'N D' then one 'label f1 ... fD' line per node with round-trip floats"""
    z.check_finite()
    path = Path(path)
    with open_text(path, "w") as f:
        f.write(f"{z.n_nodes} {z.dimension}\n")
        for label, row in zip(z.labels, z.in_vectors.tolist()):
            f.write(label + " " + " ".join(_format_float(x) for x in row) + "\n")
    logger.info(f"Saved {z.n_nodes}x{z.dimension} embeddings to {path}")
    return path


def load_embeddings(path: Union[str, Path]) -> EmbeddingMatrix:
    """Parse the text embedding format (gzip accepted by extension)"""
    with open_text(path, "r") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise EmbeddingFormatError("header must be 'N D'", 1)
        try:
            n, d = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingFormatError(f"header {' '.join(header)!r} is not two integers", 1)
        if n < 0 or d < 1:
            raise EmbeddingFormatError(f"invalid header N={n}, D={d}", 1)

        labels: List[str] = []
        rows = np.zeros((n, d))
        seen = set()
        for line_number, raw in enumerate(f, start=2):
            fields = raw.split()
            if not fields:
                continue
            if len(labels) == n:
                raise EmbeddingFormatError(f"more than {n} rows", line_number)
            if len(fields) != d + 1:
                raise EmbeddingFormatError(
                    f"row for {fields[0]!r} has {len(fields) - 1} values, header says {d}", line_number
                )
            if fields[0] in seen:
                raise EmbeddingFormatError(f"duplicate label {fields[0]!r}", line_number)
            try:
                rows[len(labels)] = [float(x) for x in fields[1:]]
            except ValueError:
                raise EmbeddingFormatError(f"row for {fields[0]!r} holds a non-numeric value", line_number)
            seen.add(fields[0])
            labels.append(fields[0])
    if len(labels) != n:
        raise EmbeddingFormatError(f"header says {n} rows, found {len(labels)}", len(labels) + 1)

    z = EmbeddingMatrix(
        labels=labels,
        in_vectors=rows,
        out_vectors=np.zeros((n, d)),
        counts=np.zeros(n, dtype=np.int64),
    )
    z.check_finite()
    return z
