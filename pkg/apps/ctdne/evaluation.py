#!/usr/bin/env python3
"""
Temporal link prediction harness.

The edge stream is split by time: the first fraction of edges trains the
embedding, pairs first seen afterwards are positives and an equal number of
non-adjacent pairs are negatives. Pair features come from one of four edge
operators; a logistic regression is fit on 75% of the labeled pairs. The
operator is chosen on the fitting pairs alone and scored on the other 25%.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from scipy.special import expit
from scipy.stats import rankdata

from apps.ctdne.errors import ConfigError, DataError, SplitError
from apps.ctdne.models import EdgeOperator, LinkPredictionResult, NegativeScope
from apps.ctdne.sampling import make_rng
from apps.ctdne.temporal_graph import TemporalGraph
from apps.ctdne.utils.providers import EmbeddingProvider

logger = logging.getLogger(__name__)

SPLIT_STREAM = 1 << 45
HOLDOUT_STREAM = 1 << 46
SELECT_STREAM = 1 << 49

DEFAULT_L2 = 1e-4
MIN_EDGES_FOR_SPLIT = 4
MIN_PER_CLASS = 3

Pair = Tuple[int, int]


def _unordered(u: int, v: int) -> Pair:
    return (u, v) if u <= v else (v, u)


@dataclass
class EvalSplit:
    """Training graph plus labeled test pairs (unordered, as (low id, high id))"""
    train_graph: TemporalGraph
    positives: np.ndarray
    negatives: np.ndarray
    split_fraction: float = 0.75

    def pairs_and_labels(self) -> Tuple[np.ndarray, np.ndarray]:
        """(P+Q, 2) pairs and their 1/0 labels, positives first"""
        pairs = np.vstack([self.positives, self.negatives])
        labels = np.concatenate([np.ones(len(self.positives)), np.zeros(len(self.negatives))])
        return pairs, labels


def _pair_set(src: np.ndarray, dst: np.ndarray) -> Set[Pair]:
    return {_unordered(int(u), int(v)) for u, v in zip(src.tolist(), dst.tolist())}


def _sample_negatives(
    n_nodes: int,
    count: int,
    forbidden: Set[Pair],
    rng: np.random.Generator,
) -> List[Pair]:
    available = n_nodes * (n_nodes - 1) // 2 - len(forbidden)
    if available < count:
        raise SplitError(f"only {available} non-adjacent pairs for {count} negatives")
    if available < 4 * count:
        candidates = [
            (u, v) for u in range(n_nodes) for v in range(u + 1, n_nodes) if (u, v) not in forbidden
        ]
        picks = rng.choice(len(candidates), size=count, replace=False)
        return sorted(candidates[i] for i in picks)

    chosen: Set[Pair] = set()
    while len(chosen) < count:
        u, v = (int(x) for x in rng.integers(n_nodes, size=2))
        if u == v:
            continue
        pair = _unordered(u, v)
        if pair in forbidden or pair in chosen:
            continue
        chosen.add(pair)
    return sorted(chosen)


def temporal_split(
    g: TemporalGraph,
    fraction: float = 0.75,
    seed: int = 0,
    negative_scope: NegativeScope = NegativeScope.ALL,
) -> EvalSplit:
    """
    Split g by time into a training graph and labeled test pairs.

    The first ⌊fraction·M⌋ edges form the training graph (over the full node id
    space). Later edges, as unordered pairs without self-loops and minus every
    training pair, are the positives. Negatives are sampled without replacement
    from pairs adjacent in neither the training edges nor the positives; with
    scope ALL they also avoid every other edge of g.
    """
    if not 0 < fraction < 1:
        raise ConfigError(f"split fraction must be in (0, 1), got {fraction}")
    m = g.n_edges
    if m < MIN_EDGES_FOR_SPLIT:
        raise SplitError(f"need at least {MIN_EDGES_FOR_SPLIT} edges to split, got {m}")

    cut = int(np.floor(fraction * m))
    src, dst, _ = g.edge_arrays()
    train_pairs = _pair_set(src[:cut], dst[:cut])
    test_pairs = {p for p in _pair_set(src[cut:], dst[cut:]) if p[0] != p[1]}
    positives = sorted(test_pairs - train_pairs)
    if not positives:
        raise SplitError("test window fully overlaps training pairs")

    forbidden = train_pairs | set(positives)
    if NegativeScope(negative_scope) is NegativeScope.ALL:
        forbidden |= test_pairs
    forbidden = {p for p in forbidden if p[0] != p[1]}
    negatives = _sample_negatives(g.n_nodes, len(positives), forbidden, make_rng(seed, SPLIT_STREAM))

    logger.info(f"Split at edge {cut}/{m}: {len(positives)} positives, {len(negatives)} negatives")
    return EvalSplit(
        train_graph=g.edge_slice(0, cut),
        positives=np.asarray(positives, dtype=np.int64).reshape(-1, 2),
        negatives=np.asarray(negatives, dtype=np.int64).reshape(-1, 2),
        split_fraction=fraction,
    )


def edge_embedding(z_i: np.ndarray, z_j: np.ndarray, op: EdgeOperator) -> np.ndarray:
    """Φ(z_i, z_j), elementwise; works row-wise on (P, D) arrays too"""
    z_i = np.asarray(z_i, dtype=np.float64)
    z_j = np.asarray(z_j, dtype=np.float64)
    if z_i.shape != z_j.shape:
        raise ValueError(f"embedding shapes differ: {z_i.shape} vs {z_j.shape}")
    op = EdgeOperator(op)
    if op is EdgeOperator.MEAN:
        return (z_i + z_j) / 2.0
    if op is EdgeOperator.HADAMARD:
        return z_i * z_j
    if op is EdgeOperator.ABS_DIFF:
        return np.abs(z_i - z_j)
    return (z_i - z_j) ** 2


def edge_features(embeddings: np.ndarray, pairs: np.ndarray, op: EdgeOperator) -> np.ndarray:
    """Feature rows for node-id pairs"""
    return edge_embedding(embeddings[pairs[:, 0]], embeddings[pairs[:, 1]], op)


def auc(scores: Sequence[float], labels: Sequence[float]) -> float:
    """ROC AUC as the Mann-Whitney rank statistic (ties count 1/2)"""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = int(labels.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs both positive and negative examples")
    ranks = rankdata(scores, method="average")
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass
class LogisticRegressionClassifier:
    """Linear classifier σ(w·x + b) with an L2 penalty on w"""
    weights: np.ndarray
    bias: float
    l2: float = DEFAULT_L2

    @staticmethod
    def _objective(params: np.ndarray, x: np.ndarray, y: np.ndarray, l2: float) -> Tuple[float, np.ndarray]:
        w, b = params[:-1], params[-1]
        s = x @ w + b
        loss = np.mean(np.logaddexp(0.0, s) - y * s) + 0.5 * l2 * (w @ w)
        r = (expit(s) - y) / x.shape[0]
        grad = np.concatenate([x.T @ r + l2 * w, [r.sum()]])
        return float(loss), grad

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray, l2: float = DEFAULT_L2) -> "LogisticRegressionClassifier":
        """Minimize mean log-loss + (λ/2)·|w|² with L-BFGS"""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        result = minimize(
            cls._objective,
            np.zeros(x.shape[1] + 1),
            args=(x, y, l2),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 1000},
        )
        if not result.success:
            logger.debug(f"Logistic regression stopped early: {result.message}")
        return cls(weights=result.x[:-1], bias=float(result.x[-1]), l2=l2)

    def decision_function(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.weights + self.bias

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        """Calibrated scores σ(w·x + b)"""
        return expit(self.decision_function(x))

    def predict(self, x: np.ndarray) -> np.ndarray:
        return (self.predict_proba(x) >= 0.5).astype(np.int64)

    def log_loss(self, x: np.ndarray, y: np.ndarray) -> float:
        s = self.decision_function(x)
        return float(np.mean(np.logaddexp(0.0, s) - np.asarray(y) * s))


@dataclass
class ClassifierFit:
    classifier: LogisticRegressionClassifier
    holdout_auc: float
    holdout_accuracy: float
    fit_index: np.ndarray
    holdout_index: np.ndarray


def stratified_holdout(
    labels: np.ndarray,
    holdout: float,
    seed: int,
    stream: int = HOLDOUT_STREAM,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-class random split; each class puts ⌈holdout·n⌉ examples (at least one,
    never all) into the hold-out.
    """
    rng = make_rng(seed, stream)
    fit_parts, held_parts = [], []
    for value in (0, 1):
        members = np.flatnonzero(labels == value)
        members = members[rng.permutation(members.shape[0])]
        n_held = min(max(int(np.ceil(holdout * members.shape[0])), 1), members.shape[0] - 1)
        held_parts.append(members[:n_held])
        fit_parts.append(members[n_held:])
    return np.sort(np.concatenate(fit_parts)), np.sort(np.concatenate(held_parts))


def train_classifier(
    features: np.ndarray,
    labels: np.ndarray,
    holdout: float = 0.25,
    seed: int = 0,
    l2: float = DEFAULT_L2,
    stream: int = HOLDOUT_STREAM,
) -> ClassifierFit:
    """Fit on the stratified (1 - holdout) part and score the hold-out"""
    labels = np.asarray(labels)
    for value in (0, 1):
        if int((labels == value).sum()) < 2:
            raise DataError("classifier needs at least 2 examples of each class")
    fit_index, holdout_index = stratified_holdout(labels, holdout, seed, stream)
    classifier = LogisticRegressionClassifier.fit(features[fit_index], labels[fit_index], l2=l2)
    held_x, held_y = features[holdout_index], labels[holdout_index]
    return ClassifierFit(
        classifier=classifier,
        holdout_auc=auc(classifier.predict_proba(held_x), held_y),
        holdout_accuracy=float(np.mean(classifier.predict(held_x) == held_y)),
        fit_index=fit_index,
        holdout_index=holdout_index,
    )


def evaluate_embeddings(
    embeddings: np.ndarray,
    split: EvalSplit,
    seed: int = 0,
    operators: Sequence[EdgeOperator] = tuple(EdgeOperator),
    holdout: float = 0.25,
) -> Tuple[EdgeOperator, float, Dict[str, float]]:
    """
    Pick an operator on the fitting pairs, then score it on the hold-out.

    The labeled pairs are split once into fitting pairs and a hold-out. Each
    operator is fit on part of the fitting pairs and ranked by AUC on the rest;
    the winner is refit on all fitting pairs and its hold-out AUC is reported,
    so the hold-out plays no part in the choice.

    Returns:
        (chosen operator, its hold-out AUC, selection AUC per operator)
    """
    pairs, labels = split.pairs_and_labels()
    for value in (0, 1):
        if int((labels == value).sum()) < MIN_PER_CLASS:
            raise DataError(f"operator selection needs at least {MIN_PER_CLASS} pairs of each class")
    fit_index, holdout_index = stratified_holdout(labels, holdout, seed)
    fit_labels = labels[fit_index]

    per_operator: Dict[str, float] = {}
    best: Optional[EdgeOperator] = None
    for op in operators:
        features = edge_features(embeddings, pairs[fit_index], op)
        selection = train_classifier(features, fit_labels, holdout=holdout, seed=seed, stream=SELECT_STREAM)
        per_operator[op.value] = selection.holdout_auc
        if best is None or selection.holdout_auc > per_operator[best.value]:
            best = op

    features = edge_features(embeddings, pairs, best)
    classifier = LogisticRegressionClassifier.fit(features[fit_index], fit_labels)
    score = auc(classifier.predict_proba(features[holdout_index]), labels[holdout_index])
    return best, score, per_operator


def run_link_prediction(
    g: TemporalGraph,
    provider: EmbeddingProvider,
    seeds: Sequence[int],
    split_fraction: float = 0.75,
    negative_scope: NegativeScope = NegativeScope.ALL,
    threads: int = 1,
) -> LinkPredictionResult:
    """
    Split, embed the training graph, score test pairs; once per seed.

    The seed drives the negatives, the embedding and the classifier hold-out.
    Seeds run concurrently with threads > 1; results keep seed order.
    """
    def one_seed(seed: int) -> Tuple[int, str, float]:
        split = temporal_split(g, split_fraction, seed=seed, negative_scope=negative_scope)
        embeddings = provider.embed(split.train_graph, seed)
        op, score, _ = evaluate_embeddings(embeddings, split, seed=seed)
        logger.info(f"[{provider.name}] seed {seed}: AUC {score:.4f} ({op.value})")
        return seed, op.value, score

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = list(executor.map(one_seed, seeds))
    else:
        outcomes = [one_seed(seed) for seed in seeds]

    return LinkPredictionResult(
        variant=provider.name,
        seeds=[s for s, _, _ in outcomes],
        operators=[op for _, op, _ in outcomes],
        aucs=[score for _, _, score in outcomes],
    )


def dtdne_baseline(
    g: TemporalGraph,
    provider: EmbeddingProvider,
    seeds: Sequence[int],
    split_fraction: float = 0.75,
    negative_scope: NegativeScope = NegativeScope.ALL,
    threads: int = 1,
) -> LinkPredictionResult:
    """Snapshot baseline through the same harness; `provider` embeds by snapshots"""
    if g.n_edges == 0:
        raise DataError("snapshot baseline needs a non-empty edge list")
    return run_link_prediction(g, provider, seeds, split_fraction, negative_scope, threads)


RESULT_COLUMNS = ["dataset", "variant", "operator", "seed", "auc"]


def results_frame(results: Sequence[LinkPredictionResult], dataset: str) -> pd.DataFrame:
    """One row per (variant, seed)"""
    rows = [
        (dataset, result.variant, op, seed, score)
        for result in results
        for seed, op, score in zip(result.seeds, result.operators, result.aucs)
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def summarize(frame: pd.DataFrame) -> Dict[str, Dict[str, object]]:
    """Per-variant mean/std AUC (population std) and most chosen operator"""
    summary: Dict[str, Dict[str, object]] = {}
    for variant, rows in frame.groupby("variant", sort=True):
        result = LinkPredictionResult(
            variant=str(variant),
            seeds=[int(s) for s in rows["seed"]],
            aucs=[float(a) for a in rows["auc"]],
            operators=[str(o) for o in rows["operator"]],
        )
        entry = result.to_dict()
        entry["dataset"] = str(rows["dataset"].iloc[0])
        summary[str(variant)] = entry
    return summary


def gain_percent(ctdne_auc: float, baseline_auc: float) -> float:
    """Relative AUC gain of CTDNE over a baseline, in percent"""
    return (ctdne_auc - baseline_auc) / baseline_auc * 100.0
